import random

import pytest
from hypothesis import given, settings, strategies as st

from rcc.compile_imptc import stdlib_primitives
from rcc.imp import (
    Assign, Call, Const, Reg, Seq, all_regs, check_lang, restrict, run_impw, run_impwc, vars_of,
)
from rcc.inliner import RenameError, inline_calls, rename_registers
from rcc.randprog import random_callee, random_impw, random_state


def test_rename_identity():
    p = random_impw(random.Random(1))
    assert rename_registers(p, lambda r: r) == p
    assert rename_registers(p, {}) == p


def test_rename_prefix():
    p = random_impw(random.Random(2))
    q = rename_registers(p, lambda r: "k7::" + r)
    assert all_regs(q) == {"k7::" + r for r in all_regs(p)}


def test_rename_non_injective():
    p = Seq(Assign("a", Const(1)), Assign("b", Const(2)))
    with pytest.raises(RenameError):
        rename_registers(p, {"a": "b"})


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**31))
def test_renaming_commutes_with_runs(seed):
    rng = random.Random(seed)
    p = random_impw(rng)
    s = random_state(rng, ["r0", "r1", "r2", "r3"])
    m = {r: f"z{i}" for i, r in enumerate(sorted(all_regs(p)))}
    out = run_impw(p, s).state
    ren = run_impw(rename_registers(p, m), {m.get(r, r): v for r, v in s.items()}).state
    assert ren == {m.get(r, r): v for r, v in out.items()}


def test_no_calls_unchanged():
    p = random_impw(random.Random(3))
    assert inline_calls(p) == p


def test_eq_call():
    _, eq = stdlib_primitives()["eq"]
    p = Seq(Assign("eq.arg.0", Const(3)), Seq(Assign("eq.arg.1", Const(3)), Call(eq, "eq.ret")))
    q = check_lang(inline_calls(p), "impw")
    assert run_impw(q, {}).state["eq.ret"] == 1


def test_each_call_gets_its_own_prefix():
    callee = Assign("g.ret", Const(1))
    q = inline_calls(Seq(Call(callee, "g.ret"), Call(callee, "g.ret")))
    prefixes = {r.split("::")[0] for r in all_regs(q) if "::" in r}
    assert prefixes == {"call0", "call1"}


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**31))
def test_random_calls(seed):
    rng = random.Random(seed)
    callee, ret = random_callee(rng, "g")
    p = Seq(random_impw(rng, depth=2), Seq(Call(callee, ret), Assign("r0", Reg(ret))))
    s = random_state(rng, ["r0", "r1", "r2", "r3"] + [f"g.r{i}" for i in range(3)])
    a = run_impwc(p, s).state
    b = run_impw(inline_calls(p), s).state
    assert restrict(a, vars_of(p)) == restrict(b, vars_of(p))


def test_count_pipeline(pipeline):
    from rcc.natenc import natify
    from rcc.frontend import nat_list, parse_type

    # the encoding of a longer list already costs millions of steps
    art = pipeline["count"]
    xs = natify(pipeline.program, parse_type("List Nat"), nat_list([1]))
    s = {"count.arg.0": 1, "count.arg.1": xs, "count.arg.2": 3}
    assert run_impwc(art.impwc, s).state["count.ret"] == 4
    assert run_impw(art.impw, s).state["count.ret"] == 4
