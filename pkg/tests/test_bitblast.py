import random

import pytest
from hypothesis import given, settings, strategies as st

from rcc.bitblast import (
    CARRY, NONZERO, FlagError, WidthError, bit_name, blast_aexp, blast_aexp_to_vm, blast_program,
    blast_to_vm, decode_state, encode_state, flag_consistent, required_width, run_blasted,
)
from rcc.imp import (
    Assign, Bin, Const, If, Reg, Seq, While, canonical, check_lang, maxconst, run_impminus, run_impw, sub,
)
from rcc.impminus_vm import flatten, run_vm
from rcc.randprog import random_impw, random_state

REGS = ["r0", "r1", "r2", "r3"]


def test_encode_five():
    bs = encode_state({"x": 5}, 4)
    assert [bs[bit_name("x", i)] for i in range(1, 5)] == [1, 0, 1, 0]
    assert bs["x#0"] == 1


def test_encode_zero():
    bs = encode_state({"x": 0}, 4)
    assert set(bs.values()) == {0}


def test_encode_too_wide():
    with pytest.raises(WidthError):
        encode_state({"x": 16}, 4)


@given(st.dictionaries(st.sampled_from(REGS), st.integers(0, 255)))
def test_decode_inverts_encode(s):
    assert decode_state(encode_state(s, 8), 8) == s


def test_decode_checks_flag():
    bs = encode_state({"x": 5}, 4)
    bs["x#0"] = 0
    with pytest.raises(FlagError):
        decode_state(bs, 4)
    assert decode_state(bs, 4, strict=False) == {"x": 5}


def run_aexp(a, s, w, target="t"):
    p = blast_aexp(a, w, target)
    check_lang(p, "impminus")
    out = run_impminus(p, encode_state(s, w)).state
    assert flag_consistent(out, w, [target])
    return decode_state(out, w)[target]


def test_add_example():
    assert run_aexp(Bin("+", Reg("x"), Reg("y")), {"x": 3, "y": 1}, 4) == 4


def test_sub_example():
    assert run_aexp(Bin("-", Reg("x"), Reg("y")), {"x": 2, "y": 5}, 4) == 0


def test_const_zero():
    p = blast_aexp(Const(0), 4, "t")
    out = run_impminus(p, encode_state({"t": 9}, 4)).state
    assert all(out[bit_name("t", i)] == 0 for i in range(5))


def test_scratch_registers_are_cleared():
    p = blast_aexp(Bin("+", Reg("x"), Const(3)), 4, "t")
    out = run_impminus(p, encode_state({"x": 7}, 4)).state
    assert not any(v for k, v in out.items() if k.startswith("%bb::"))
    assert out.get(CARRY, 0) == 0 and out.get(NONZERO, 0) == 0


@pytest.mark.parametrize("m,n,w", [(1, 3, 4), (0, 0, 1), (5, 0, 3), (0, 4, 5), (7, 2, 5)])
def test_required_width(m, n, w):
    p = Assign("a", Const(m))
    assert required_width(p, {}, n) == w
    assert m * 2 ** n < 2 ** w and n < w


def test_if_on_zero_register():
    p = If("x", Assign("y", Const(1)), Assign("y", Const(2)))
    vm = blast_to_vm(p, 4)
    assert run_blasted(vm, {"x": 0})[0]["y"] == 2
    assert run_blasted(vm, {"x": 8})[0]["y"] == 1


def test_sum_loop():
    # y := 1 + 1 + 1 counted by a loop
    p = Seq(Assign("i", Const(3)),
            While("i", Seq(Assign("y", Bin("+", Reg("y"), Const(1))), Assign("i", sub("i", 1)))))
    ref = run_impw(p, {})
    w = required_width(p, {}, ref.steps)
    out, steps = run_blasted(blast_to_vm(p, w), {})
    assert out == {**ref.state, "i": 0} and out["y"] == 3
    assert steps <= 10 * ref.steps * w


def test_vm_matches_tree_interpreter():
    rng = random.Random(4)
    for _ in range(60):
        p = random_impw(rng, depth=3, max_iter=2)
        s = random_state(rng, REGS, 8)
        ref = run_impw(p, s)
        w = required_width(p, s, ref.steps)
        w = min(w, 12)
        tree = blast_program(p, w)
        t_out = run_impminus(tree, encode_state(s, w), fuel=10**8)
        flat_out, flat_steps = run_vm(flatten(tree), encode_state(s, w))
        vm = blast_to_vm(p, w)
        v_state, v_steps = run_vm(vm, encode_state(s, w))
        assert t_out.steps == flat_steps == v_steps
        assert canonical(t_out.state) == canonical(flat_out) == canonical(v_state)


def test_vm_is_compact():
    p = Assign("a", Bin("+", Reg("b"), Reg("c")))
    small, big = blast_to_vm(p, 8), blast_to_vm(p, 4096)
    assert small.n_nodes == big.n_nodes


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31))
def test_blasting_simulates_words(seed):
    rng = random.Random(seed)
    p = random_impw(rng)
    s = random_state(rng, REGS, 16)
    ref = run_impw(p, s)
    w = required_width(p, s, ref.steps)
    out, _ = run_blasted(blast_to_vm(p, w), s)
    assert canonical(out) == canonical(ref.state)


def test_width_guard():
    vm = blast_to_vm(Assign("a", Reg("b")), 3)
    with pytest.raises(WidthError):
        run_blasted(vm, {"b": 8})


@pytest.mark.parametrize("op", ["+", "-"])
def test_circuits_exhaustive_small(op):
    w = 4
    vm = blast_aexp_to_vm(Bin(op, Reg("a"), Reg("b")), w, "t")
    for a in range(8):
        for b in range(8):
            got = run_blasted(vm, {"a": a, "b": b, "t": 0})[0]["t"]
            assert got == (a + b if op == "+" else max(a - b, 0))


def test_swap_carry_mutant_is_wrong():
    vm = blast_aexp_to_vm(Bin("+", Reg("a"), Reg("b")), 4, "t", mutation="swap_carry")
    assert run_blasted(vm, {"a": 1, "b": 1, "t": 0})[0]["t"] != 2


def test_maxconst_of_blasted_program():
    assert maxconst(blast_aexp(Const(5), 4, "t")) == 1
