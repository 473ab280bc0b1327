import pytest

from rcc import holnat as H
from rcc.frontend import FuelExhausted
from rcc.natenc import natify
from rcc.frontend import parse_type, nat_list
from rcc.sexpr import SexprError

A0, A1 = H.Arg(0), H.Arg(1)


def test_eval_constants():
    assert H.eval_nat([], H.NatFunDef("k", 0, H.Num(42)), []) == 42
    assert H.eval_nat([], H.NatFunDef("k", 0, H.If(H.Num(0), H.Num(1), H.Num(2))), []) == 2


def test_eval_count(pipeline, corpus):
    xs = natify(corpus, parse_type("List Nat"), nat_list([1, 2, 1]))
    assert H.eval_nat(pipeline.nat_env, "count", [1, xs, 0]) == 2


def test_let_binding():
    # let y = x + 1 in let z = y + y in z - x
    body = H.Let(H.Call("add", (A0, H.Num(1))),
                 H.Let(H.Call("add", (H.LetBound(0), H.LetBound(0))),
                       H.Call("sub", (H.LetBound(0), A0))))
    assert H.eval_nat([], H.NatFunDef("f", 1, body), [3]) == 5


def test_primitives():
    assert H.apply_primitive("sub", [2, 5]) == 0
    assert H.apply_primitive("eq", [3, 3]) == 1
    assert H.apply_primitive("pair", [1, 2]) == 8
    assert H.apply_primitive("snd", [8]) == 2


def test_tail_loop_is_iterative():
    # f n = if n then f (n - 1) else 7
    body = H.If(A0, H.TailCall((H.Call("sub", (A0, H.Num(1))),)), H.Num(7))
    f = H.NatFunDef("f", 1, body)
    assert H.eval_nat([f], "f", [200_000], fuel=10**6) == 7
    with pytest.raises(FuelExhausted):
        H.eval_nat([f], "f", [100], fuel=10)


def test_calls_between_functions():
    g = H.NatFunDef("g", 1, H.Call("suc", (A0,)))
    f = H.NatFunDef("f", 2, H.Call("g", (H.Call("add", (A0, A1)),)))
    assert H.eval_nat([g, f], "f", [2, 3]) == 6


def test_validate_ok(pipeline):
    assert H.validate_fun(pipeline["count"].nat) is None


def test_validate_violations():
    tc = H.TailCall((A0,))
    v = H.validate_tail(H.Call("g", (tc,)), 1)
    assert v is not None and "non-tail" in v.message
    assert H.validate_tail(H.Let(tc, H.Num(0)), 1) is not None
    assert H.validate_tail(H.If(tc, H.Num(0), H.Num(1)), 1) is not None
    assert H.validate_tail(H.LetBound(0), 1) is not None
    assert H.validate_tail(H.Arg(2), 1) is not None
    assert H.validate_tail(H.TailCall((A0, A0)), 1) is not None
    assert H.validate_tail(H.Let(H.Num(1), H.If(H.LetBound(0), tc, H.Num(0))), 1) is None


def test_validate_callees():
    f = H.NatFunDef("f", 1, H.Call("nope", (A0,)))
    assert H.validate_fun(f, H.NatProgram()) is not None
    f = H.NatFunDef("f", 1, H.Call("add", (A0,)))
    assert H.validate_fun(f, H.NatProgram()) is not None


def test_text_round_trip(pipeline):
    defs = list(pipeline.nat_env)
    text = H.dump_program(defs)
    assert list(H.load_program(text)) == defs


@pytest.mark.parametrize("text", ["(def f 1 (arg x))", "(def f 1 (frob 1))", "(def f 1)"])
def test_text_errors(text):
    with pytest.raises(SexprError):
        H.load_program(text)


def test_duplicate_definition():
    f = H.NatFunDef("f", 0, H.Num(0))
    with pytest.raises(ValueError):
        H.NatProgram([f, f])
    with pytest.raises(ValueError):
        H.NatProgram([H.NatFunDef("add", 0, H.Num(0))])
