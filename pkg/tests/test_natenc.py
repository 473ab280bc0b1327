import random

import pytest
from hypothesis import given, strategies as st

from rcc import frontend as F
from rcc import holnat as H
from rcc.frontend import NAT, NatV, nat_list
from rcc.natenc import (
    EncodingError, case_term, decode_ctor, denatify, encode_ctor, encoded, fst, is_well_encoded,
    lower_case_shape, natify, pair, random_value, selector, snd, unpair,
)

LIST_NAT = F.parse_type("List Nat")


@pytest.mark.parametrize("a,b,n", [(0, 0, 0), (1, 2, 8), (5, 1, 22)])
def test_pair(a, b, n):
    assert pair(a, b) == n
    assert unpair(n) == (a, b)


@given(st.integers(0, 2**32), st.integers(0, 2**32))
def test_unpair_inverts_pair(a, b):
    assert unpair(pair(a, b)) == (a, b)


@given(st.integers(0, 10**12))
def test_pair_inverts_unpair(n):
    assert pair(*unpair(n)) == n


def test_list_constructors(corpus):
    e = encoded(corpus.adt("List"))
    assert encode_ctor(e, "Nil", []) == pair(1, 0) == 1
    assert encode_ctor(e, "Cons", [5, 1]) == pair(2, pair(5, 1)) == 322


def test_nullary_tag(corpus):
    e = encoded(corpus.adt("Tree"))
    assert encode_ctor(e, "Leaf", []) == pair(1, 0)
    e = encoded(corpus.adt("Option"))
    assert encode_ctor(e, 1, []) == pair(1, 0)


def test_selectors():
    assert selector(2, 1, 322) == 5
    assert selector(2, 2, 322) == 1
    for x in range(200):
        assert selector(1, 1, x) == snd(x)
    with pytest.raises(EncodingError):
        selector(2, 3, 322)


def test_natify_examples(corpus):
    assert natify(corpus, LIST_NAT, nat_list([])) == 1
    assert natify(corpus, NAT, NatV(7)) == 7
    assert natify(corpus, LIST_NAT, nat_list([5])) == 322


def test_denatify_examples(corpus):
    assert denatify(corpus, LIST_NAT, 1) == nat_list([])
    assert denatify(corpus, NAT, 7) == NatV(7)


def test_denatify_bad_tag(corpus):
    bad = pair(3, 0)
    with pytest.raises(EncodingError):
        denatify(corpus, LIST_NAT, bad)
    assert not is_well_encoded(corpus, LIST_NAT, bad)
    # lenient decoding maps unknown tags to the last constructor
    e = encoded(corpus.adt("List"))
    assert decode_ctor(e, bad, lenient=True)[0] == 2


def test_lenient_terminates(corpus):
    # 3 = pair(2, 0) is a Cons whose fields both decode from 0
    v = denatify(corpus, LIST_NAT, 3, lenient=True)
    assert v == nat_list([0])
    for n in range(300):
        denatify(corpus, F.parse_type("Tree"), n, lenient=True)


@pytest.mark.parametrize("ty", ["List Nat", "Tree", "Option (List Nat)"])
def test_round_trip(corpus, ty):
    t = F.parse_type(ty, corpus)
    rng = random.Random(ty)
    for _ in range(200):
        v = random_value(corpus, t, rng, max_nat=20, max_size=6)
        assert denatify(corpus, t, natify(corpus, t, v)) == v


def test_random_value_size(corpus):
    rng = random.Random(0)
    v = random_value(corpus, LIST_NAT, rng, size=4)
    assert len(F.list_items(v)) == 4


def test_natify_injective(corpus):
    rng = random.Random(1)
    seen = {}
    for _ in range(500):
        v = random_value(corpus, LIST_NAT, rng, max_nat=4, max_size=3)
        n = natify(corpus, LIST_NAT, v)
        assert seen.setdefault(n, v) == v


def _nat_case(e, tag, fields):
    """Evaluate ``lower_case_shape(e)`` with ``f<i>`` returning ``(i, args)``."""
    f = lower_case_shape(e)
    env = H.NatProgram([H.NatFunDef(f"f{i}", e.arity(i), H.Num(0)) for i in range(1, e.n_ctors + 1)])
    calls = []

    def find(t):
        # which arm did evaluation pick? walk the If chain by hand
        while isinstance(t, H.If):
            test = H.eval_nat(env, H.NatFunDef("t", 1, t.cond), [encode_ctor(e, tag, fields)])
            t = t.then if test else t.else_
        calls.append(t)
        return t

    arm = find(f.body)
    args = [H.eval_nat(env, H.NatFunDef("a", 1, a), [encode_ctor(e, tag, fields)]) for a in arm.args]
    return int(arm.g[1:]), args, calls


def test_case_shape_list(corpus):
    e = encoded(corpus.adt("List"))
    body = lower_case_shape(e).body
    x = H.Arg(0)
    assert body == H.If(
        H.Call("eq", (H.Call("fst", (x,)), H.Num(1))),
        H.Call("f1", ()),
        H.Call("f2", (H.Call("fst", (H.Call("snd", (x,)),)), H.Call("snd", (H.Call("snd", (x,)),)))),
    )


def test_case_shape_single_ctor():
    prog = F.parse_program("data Box = Box Nat")
    body = lower_case_shape(encoded(prog.adt("Box"))).body
    assert not any(isinstance(t, H.If) for t in H.walk(body))
    assert body == H.Call("f1", (H.Call("snd", (H.Arg(0),)),))


def test_case_shape_three_ctors():
    prog = F.parse_program("data T = A | B Nat | C Nat Nat Nat")
    e = encoded(prog.adt("T"))
    body = lower_case_shape(e).body
    assert sum(isinstance(t, H.If) for t in H.walk(body)) == 2
    assert isinstance(body.else_, H.If) and not isinstance(body.else_.else_, H.If)
    rng = random.Random(3)
    for tag in (1, 2, 3):
        for _ in range(20):
            fields = [rng.randrange(30) for _ in range(e.arity(tag))]
            got_tag, got_args, _ = _nat_case(e, tag, fields)
            assert (got_tag, got_args) == (tag, fields)


def test_case_term_arity_check(corpus):
    with pytest.raises(EncodingError):
        case_term(encoded(corpus.adt("List")), H.Arg(0), [H.Num(0)])


@given(st.integers(1, 10**9))
def test_encoding_bit_length(n):
    # the encoding of a one-element list stays within a constant factor
    # of the squared size of its element
    assert pair(2, pair(n, 1)).bit_length() <= 4 * n.bit_length() + 8


def test_fst_snd():
    assert fst(8) == 1 and snd(8) == 2
