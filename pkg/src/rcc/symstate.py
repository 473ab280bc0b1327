"""Symbolic states and the state-update normaliser.

A symbolic state is a base name plus an ordered list of updates. Reading a
register looks for the latest update of that register (a hit) and skips
updates of other registers; arithmetic on literals is folded.
"""

from dataclasses import dataclass

from .imp import Assign, Bin, Const, If, Reg, Seq


@dataclass(frozen=True)
class Lit:
    n: int


@dataclass(frozen=True)
class SymState:
    base: str
    updates: tuple = ()  # of (register, SymValue), oldest first

    def update(self, r, v):
        return SymState(self.base, self.updates + ((r, v),))


@dataclass(frozen=True)
class Read:
    state: SymState
    r: str


@dataclass(frozen=True)
class BinS:
    op: str
    lhs: object
    rhs: object


def _fold(op, a, b):
    if op == "+":
        return a + b
    return a - b if a > b else 0


def normalize_sym(v):
    """Normal form of a symbolic value or state."""
    if isinstance(v, SymState):
        latest = {}
        for r, x in v.updates:
            latest.pop(r, None)
            latest[r] = normalize_sym(x)
        return SymState(v.base, tuple(latest.items()))
    if isinstance(v, Lit):
        return v
    if isinstance(v, Read):
        for r, x in reversed(v.state.updates):
            if r == v.r:
                return normalize_sym(x)
        return Read(SymState(v.state.base), v.r)
    if isinstance(v, BinS):
        a, b = normalize_sym(v.lhs), normalize_sym(v.rhs)
        if isinstance(a, Lit) and isinstance(b, Lit):
            return Lit(_fold(v.op, a.n, b.n))
        return BinS(v.op, a, b)
    raise TypeError(f"not a symbolic value: {v!r}")


def sym_aval(a, st):
    if isinstance(a, Const):
        return Lit(a.n)
    if isinstance(a, Reg):
        return Read(st, a.r)
    return BinS(a.op, sym_aval(a.lhs, st), sym_aval(a.rhs, st))


def sym_exec(p, st):
    """Symbolically run a program made of assignments, sequences and
    conditionals whose conditions normalise to literals."""
    stack = [p]
    while stack:
        c = stack.pop()
        if isinstance(c, Assign):
            st = st.update(c.r, sym_aval(c.a, st))
        elif isinstance(c, Seq):
            stack.extend((c.second, c.first))
        elif isinstance(c, If):
            cond = normalize_sym(Read(st, c.r))
            if not isinstance(cond, Lit):
                raise ValueError(f"condition on {c.r!r} is not a literal: {cond!r}")
            stack.append(c.then if cond.n else c.else_)
        else:
            raise ValueError(f"{type(c).__name__} is not supported symbolically")
    return st


def evaluate(v, base):
    """Concrete value of ``v`` when every base state is ``base``."""
    if isinstance(v, Lit):
        return v.n
    if isinstance(v, Read):
        for r, x in reversed(v.state.updates):
            if r == v.r:
                return evaluate(x, base)
        return base.get(v.r, 0)
    if isinstance(v, BinS):
        return _fold(v.op, evaluate(v.lhs, base), evaluate(v.rhs, base))
    if isinstance(v, SymState):
        out = dict(base)
        for r, x in v.updates:
            out[r] = evaluate(x, base)
        return out
    raise TypeError(f"not a symbolic value: {v!r}")


__all__ = ["BinS", "Bin", "Lit", "Read", "SymState", "evaluate", "normalize_sym", "sym_aval", "sym_exec"]
