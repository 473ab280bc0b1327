import random

import pytest
from hypothesis import given, settings, strategies as st

from rcc.harness import (
    FULL_STACK, BinS, Lit, Profile, Read, SymState, bench_blowup, difftest, evaluate,
    fit_through_origin, mismatch_total, normalize_sym, sym_exec, width_sweep,
)
from rcc.imp import Assign, Bin, Const, Reg, Seq, While, run_impw, sub
from rcc.randprog import random_assign, random_state

S = SymState("s")


def test_hit_and_cont():
    assert normalize_sym(Read(S.update("a", Lit(5)), "a")) == Lit(5)
    assert normalize_sym(Read(S.update("a", Lit(5)), "b")) == Read(S, "b")
    assert normalize_sym(BinS("+", Lit(2), Lit(3))) == Lit(5)
    assert normalize_sym(BinS("-", Lit(2), Lit(3))) == Lit(0)


def test_state_keeps_latest_update():
    st_ = S.update("a", Lit(1)).update("b", Lit(2)).update("a", Lit(3))
    assert normalize_sym(st_) == SymState("s", (("b", Lit(2)), ("a", Lit(3))))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**31))
def test_symbolic_run_agrees(seed):
    rng = random.Random(seed)
    regs = ["a", "b", "c"]
    p = random_assign(rng, regs)
    for _ in range(rng.randrange(6)):
        p = Seq(p, random_assign(rng, regs))
    base = random_state(rng, regs)
    sym = sym_exec(p, S)
    want = run_impw(p, base).state
    assert evaluate(sym, base) == want
    assert evaluate(normalize_sym(sym), base) == want
    for r in regs:
        assert evaluate(normalize_sym(Read(sym, r)), base) == want[r]


def test_count_difftest(corpus, pipeline):
    reports = difftest(corpus, ["count"], cases=200, pipeline=pipeline)
    assert [r.stage for r in reports] == ["nat", "imptc", "impwc", "impw", "impminus"]
    assert mismatch_total(reports) == 0
    assert all(r.cases == 200 for r in reports)
    assert reports[-1].width > 0


def test_no_cases(corpus):
    assert difftest(corpus, ["count"], cases=0) == []


def test_deterministic(corpus, pipeline):
    a = difftest(corpus, ["sum"], cases=10, seed=3, pipeline=pipeline)
    b = difftest(corpus, ["sum"], cases=10, seed=3, pipeline=pipeline)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


def test_drop_cnt_reset_runs_forever(corpus):
    reports = difftest(corpus, ["countdown"], cases=5, mutation="drop_cnt_reset",
                       fuel=20_000, width="none")
    by = {r.stage: r for r in reports}
    assert by["nat"].ok and by["imptc"].ok
    assert by["impwc"].fuel_exhausted > 0
    assert by["impwc"].counterexample["error"] == "fuel exhausted"


def test_flip_if_counterexample(corpus):
    reports = difftest(corpus, ["is_leaf"], cases=5, mutation="flip_if", width="none")
    nat = reports[0]
    assert nat.mismatches > 0
    cex = nat.counterexample
    assert {"args", "expected", "got", "program"} <= set(cex)


def test_fixed_width_skips(corpus, pipeline):
    reports = difftest(corpus, ["countdown"], cases=10, width=4, pipeline=pipeline)
    bits = reports[-1]
    assert bits.cases + bits.skipped == 10 and bits.ok


def test_joint_profile(corpus):
    f = corpus.fun("append")
    rng = random.Random(0)
    for _ in range(100):
        xs, ys = FULL_STACK.sample(corpus, f, rng)
        assert _cells(xs) + _cells(ys) <= 1
    Profile(3, 2).sample(corpus, f, rng)


def _cells(v):
    return 0 if v.ctor == "Nil" else 1 + _cells(v.args[1])


def test_single_point_fit():
    c, res = fit_through_origin([4], [10])
    assert c == 2.5 and res == 0


def test_exact_fit():
    c, res = fit_through_origin([1, 2, 3], [2, 4, 6])
    assert c == pytest.approx(2) and res == pytest.approx(0)


def test_fit_needs_points():
    with pytest.raises(ValueError):
        fit_through_origin([], [])


def test_bench_count(corpus, pipeline):
    fits = bench_blowup(corpus, ["count"], cases=10, pipeline=pipeline)
    assert {f.stage for f in fits} == {"inline", "bitblast"}
    for f in fits:
        assert 0 < f.coefficient < float("inf") and f.points == 10


def test_width_sweep():
    p = Seq(Assign("i", Const(3)),
            While("i", Seq(Assign("y", Bin("+", Reg("y"), Const(1))), Assign("i", sub("i", 1)))))
    (w1, s1), (w2, s2), (w3, s3) = width_sweep(p, {})
    assert s1 < s2 < s3
    # at most linear growth in the width
    assert s2 / s1 <= w2 / w1 and s3 / s2 <= w3 / w2
