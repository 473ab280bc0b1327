import pytest
from hypothesis import given, settings, strategies as st

from rcc import frontend as F
from rcc.frontend import Case, ConV, NatV, nat_list


def test_list_declaration():
    prog = F.parse_program("data List a = Nil | Cons a (List a)")
    (decl,), funs = prog
    assert funs == []
    assert [c.name for c in decl.constructors] == ["Nil", "Cons"]
    assert [c.arity for c in decl.constructors] == [0, 2]


def test_empty_program():
    adts, funs = F.parse_program("")
    assert adts == [] and funs == []


def test_count_shape(corpus):
    f = corpus.fun("count")
    assert f.arity == 3
    assert isinstance(f.body, Case)


def test_parse_errors():
    with pytest.raises(F.ParseError):
        F.parse_program("fun f (x : Nat) : Nat = ")
    with pytest.raises(F.NameError_):
        F.parse_program("fun f (x : Nat) : Nat = g x")
    with pytest.raises(F.ArityError):
        F.parse_program("fun f (x : Nat) : Nat = add x")
    with pytest.raises(F.TypeError_):
        F.parse_program("data List a = Nil | Cons a (List a)\nfun f (x : Nat) : Nat = Nil")


def test_check_tail(corpus):
    assert F.check_tail(corpus.fun("count")) is None
    assert F.check_tail(corpus.fun("reverse")) is None
    bad = F.parse_program("fun f (x : Nat) : Nat = suc (f x)").fun("f")
    v = F.check_tail(bad)
    assert v is not None and v.term.head == "f"


def test_eval_ref_count(corpus):
    assert F.eval_ref(corpus, "count", [1, nat_list([1, 2, 1]), 0]) == NatV(2)


@pytest.mark.parametrize("a,n", [(0, 0), (3, 7), (9, 1)])
def test_count_empty(corpus, a, n):
    assert F.eval_ref(corpus, "count", [a, nat_list([]), n]) == NatV(n)


def test_monus():
    prog = F.parse_program("fun m (a : Nat) (b : Nat) : Nat = sub a b")
    assert F.eval_ref(prog, "m", [2, 5]) == NatV(0)
    assert F.eval_ref(prog, "m", [5, 2]) == NatV(3)


def test_pow_snd_instance(corpus):
    f = corpus.fun("pow_snd")
    assert f.param_names == ("n", "x")
    assert "pow_snd m (snd x)" in F.show_term(f.body)
    # snd (snd 8) = snd 2 = 1
    assert F.eval_ref(corpus, "pow_snd", [2, 8]) == NatV(1)


def test_map_suc(corpus):
    assert F.eval_ref(corpus, "map_suc", [nat_list([1, 2])]) == nat_list([2, 3])


def test_template_without_use():
    prog = F.parse_program(
        "fun k (f : Nat -> Nat) (x : Nat) : Nat = x\n"
        "fun k_suc = k suc\n")
    inst = prog.fun("k_suc")
    assert inst.params == (("x", F.NAT),) and inst.body == F.Var("x")


def test_pretty_print_round_trip(corpus):
    text = F.show_program(corpus)
    again = F.parse_program(text)
    assert F.show_program(again) == text
    for f in corpus.funs:
        assert again.fun(f.name) == f


def test_deep_tail_recursion(corpus):
    # tail calls run in constant Python stack
    assert F.eval_ref(corpus, "countdown", [100_000]) == NatV(0)


def test_fuel(corpus):
    with pytest.raises(F.FuelExhausted):
        F.eval_ref(corpus, "countdown", [1000], fuel=10)


def test_show_value(corpus):
    v = ConV("Tree", "Node", (ConV("Tree", "Leaf"), NatV(3), ConV("Tree", "Leaf")))
    assert F.show_value(v) == "Node Leaf 3 Leaf"
    assert F.show_value(nat_list([1, 2])) == "[1, 2]"


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 50), max_size=6))
def test_parse_value_round_trip(corpus, xs):
    v = nat_list(xs)
    assert F.parse_value(F.show_value(v), corpus) == v


def test_parse_value_ctor(corpus):
    v = F.parse_value("Some [1, 2]", corpus)
    assert v == ConV("Option", "Some", (nat_list([1, 2]),))
    assert F.parse_value(F.show_value(v), corpus) == v
    with pytest.raises(F.FrontendError):
        F.parse_value("Some", corpus)
