"""Seeded single-point mutants used to check that difftest notices bugs.

Each mutant is a rewrite of one stage's output (or, for the adder, a flag
of the bit-blaster). ``MUTANTS`` maps a name to ``(stage, rewrite)``.
"""

from . import holnat as H
from .imp import Assign, Const, Seq, While, all_regs
from .inliner import rename_unchecked
from .tail_elim import CNT


def _first(pred, t, rebuild):
    """Rewrite the first node of ``t`` (pre-order) satisfying ``pred``."""
    done = [False]

    def go(t):
        if done[0]:
            return t
        if pred(t):
            done[0] = True
            return rebuild(t)
        if isinstance(t, H.If):
            return H.If(go(t.cond), go(t.then), go(t.else_))
        if isinstance(t, H.Let):
            return H.Let(go(t.rhs), go(t.body))
        if isinstance(t, H.Call):
            return H.Call(t.g, tuple(go(a) for a in t.args))
        if isinstance(t, H.TailCall):
            return H.TailCall(tuple(go(a) for a in t.args))
        return t

    return go(t), done[0]


def flip_if(f):
    """Swap the arms of the first conditional of a nat-level function."""
    body, _ = _first(lambda t: isinstance(t, H.If), f.body, lambda t: H.If(t.cond, t.else_, t.then))
    return H.NatFunDef(f.name, f.arity, body)


def selector_off_by_one(f):
    """Make the first ``fst (snd x)`` read ``fst x`` instead."""
    def is_sel(t):
        return isinstance(t, H.Call) and t.g == "fst" and isinstance(t.args[0], H.Call) and t.args[0].g == "snd"

    body, _ = _first(is_sel, f.body, lambda t: H.Call("fst", t.args[0].args))
    return H.NatFunDef(f.name, f.arity, body)


def drop_cnt_reset(p):
    """Remove ``cnt := 0`` from the loop built by tail-call elimination."""
    reset = Assign(CNT, Const(0))
    loop = p.second
    if not (isinstance(loop, While) and isinstance(loop.body, Seq) and loop.body.first == reset):
        return p
    return Seq(p.first, While(loop.r, loop.body.second))


def non_injective_rename(p):
    """Merge two registers of the first inlined call site."""
    prefix = "call0::"
    regs = sorted(r for r in all_regs(p) if r.startswith(prefix))
    if len(regs) < 2:
        return p
    keep, gone = regs[0], regs[1]
    return rename_unchecked(p, lambda r: keep if r == gone else r)


MUTANTS = {
    "flip_if": ("nat", flip_if),
    "selector_off_by_one": ("nat", selector_off_by_one),
    "drop_cnt_reset": ("impwc", drop_cnt_reset),
    "non_injective_rename": ("impw", non_injective_rename),
    "swap_carry": ("bitblast", None),
}


def hooks_for(name):
    """Pipeline hooks and bit-blaster mutation flag for mutant ``name``."""
    if name is None:
        return {}, None
    stage, fn = MUTANTS[name]
    if stage == "bitblast":
        return {}, name
    return {stage: fn}, None
