import random

from rcc.imp import check_lang, run_imptc, run_impw, vars_of
from rcc.randprog import random_callee, random_imptc, random_impw, random_state


def test_while_programs_terminate():
    rng = random.Random(0)
    for _ in range(300):
        p = random_impw(rng)
        check_lang(p, "impw")
        run_impw(p, random_state(rng, ["r0", "r1", "r2", "r3"]), fuel=100_000)


def test_tail_programs_terminate():
    rng = random.Random(1)
    callees = [random_callee(rng, "g")]
    for _ in range(300):
        p = random_imptc(rng, callees=callees)
        check_lang(p, "imptc")
        s = random_state(rng, ["r0", "r1", "r2", "r3", "%k"], 10)
        run_imptc(p, p, s, fuel=100_000)


def test_callee_writes_its_return_register():
    p, ret = random_callee(random.Random(2), "h")
    assert ret == "h.ret" and ret in vars_of(p)
    assert all(r.startswith("h.") or r.startswith("%loop") for r in vars_of(p))
