"""Compilation of nat-level functions to IMP^TC.

``compile_fun(f, registry)`` follows the usual destination-passing scheme
``[[t]](b, r)``: ``b`` is the compile-time list of registers holding the
enclosing let-bound values (innermost first) and ``r`` the register that
receives the value of ``t``.
"""

from . import holnat as H
from .imp import (
    RECURSE,
    Assign,
    Call,
    Const,
    If,
    Reg,
    Seq,
    While,
    add,
    assign,
    seq,
    sub,
)


class CompileError(Exception):
    pass


def arg_reg(f, i):
    return f"{f}.arg.{i}"


def ret_reg(f):
    return f"{f}.ret"


def tmp_reg(f, k):
    return f"{f}.tmp.{k}"


class RegNamer:
    """Hands out ``f.tmp.k`` temporaries in allocation order."""

    def __init__(self, fname):
        self.fname = fname
        self.counter = 0

    def arg(self, i):
        return arg_reg(self.fname, i)

    def ret(self):
        return ret_reg(self.fname)

    def fresh(self):
        r = tmp_reg(self.fname, self.counter)
        self.counter += 1
        return r


class Registry:
    """Callable IMP^W programs by name, with their arities."""

    def __init__(self, entries=None):
        self.entries = dict(entries or {})

    def register(self, name, arity, program):
        self.entries[name] = (arity, program)

    def __contains__(self, name):
        return name in self.entries

    def __getitem__(self, name):
        try:
            return self.entries[name]
        except KeyError:
            raise CompileError(f"no registered implementation for {name!r}") from None

    def copy(self):
        return Registry(self.entries)


class _Compiler:
    def __init__(self, f, registry):
        self.f = f
        self.registry = registry
        self.names = RegNamer(f.name)

    def comp(self, t, b, r):
        if isinstance(t, H.Num):
            return Assign(r, Const(t.n))
        if isinstance(t, H.Arg):
            if t.i >= self.f.arity:
                raise CompileError(f"arg {t.i} out of range in {self.f.name!r}")
            return Assign(r, Reg(self.names.arg(t.i)))
        if isinstance(t, H.LetBound):
            if t.i >= len(b):
                raise CompileError(f"bound {t.i} outside {len(b)} enclosing lets")
            return Assign(r, Reg(b[t.i]))
        if isinstance(t, H.If):
            x = self.names.fresh()
            cond = self.comp(t.cond, b, x)
            return Seq(cond, If(x, self.comp(t.then, b, r), self.comp(t.else_, b, r)))
        if isinstance(t, H.Let):
            x = self.names.fresh()
            rhs = self.comp(t.rhs, b, x)
            return Seq(rhs, self.comp(t.body, (x,) + b, r))
        if isinstance(t, H.Call):
            arity, program = self.registry[t.g]
            if arity != len(t.args):
                raise CompileError(f"{t.g!r} expects {arity} arguments, got {len(t.args)}")
            evals, copies = self.args(t.args, b, t.g)
            return seq(*evals, *copies, Call(program, ret_reg(t.g)), Assign(r, Reg(ret_reg(t.g))))
        if isinstance(t, H.TailCall):
            if len(t.args) != self.f.arity:
                raise CompileError(f"tail call with {len(t.args)} arguments in {self.f.name!r}")
            evals, copies = self.args(t.args, b, self.f.name)
            return seq(*evals, *copies, RECURSE)
        raise CompileError(f"not a NatTerm: {t!r}")

    def args(self, ts, b, g):
        # evaluate everything into fresh registers before touching any
        # argument register, so arguments that read each other stay intact
        xs, evals = [], []
        for t in ts:
            x = self.names.fresh()
            xs.append(x)
            evals.append(self.comp(t, b, x))
        copies = [Assign(arg_reg(g, i), Reg(x)) for i, x in enumerate(xs)]
        return evals, copies


def compile_fun(f, registry=None):
    """IMP^TC program computing ``f`` from ``f.arg.i`` into ``f.ret``."""
    if registry is None:
        registry = stdlib_primitives()
    bad = H.validate_tail(f.body, f.arity)
    if bad is not None:
        raise CompileError(f"{f.name}: {bad}")
    return _Compiler(f, registry).comp(f.body, (), ret_reg(f.name))


def normalize_seq(p):
    """Reassociate so that no Seq or If appears as the left child of a Seq.

    ``Seq(If(r, a, b), c)`` becomes ``If(r, Seq(a, c), Seq(b, c))``; the
    continuation object is shared, not copied. Step counts are unchanged."""
    return _norm_chain(_flatten(p), None)


def _flatten(c):
    out = []
    stack = [c]
    while stack:
        c = stack.pop()
        if isinstance(c, Seq):
            stack.append(c.second)
            stack.append(c.first)
        else:
            out.append(c)
    return out


def _norm_chain(items, tail):
    # ``tail`` is an already normalised continuation (or None)
    acc = tail
    for c in reversed(items):
        if isinstance(c, If):
            acc = If(c.r, _norm_chain(_flatten(c.then), acc), _norm_chain(_flatten(c.else_), acc))
            continue
        if isinstance(c, While):
            c = While(c.r, normalize_seq(c.body))
        acc = c if acc is None else Seq(c, acc)
    return acc


def is_seq_normal(p):
    stack = [p]
    while stack:
        c = stack.pop()
        if isinstance(c, Seq):
            if isinstance(c.first, (Seq, If)):
                return False
            stack.extend((c.first, c.second))
        elif isinstance(c, If):
            stack.extend((c.then, c.else_))
        elif isinstance(c, While):
            stack.append(c.body)
    return True


# ---------------------------------------------------------------------------
# primitive implementations


def _prim_add():
    return assign(ret_reg("add"), add(arg_reg("add", 0), arg_reg("add", 1)))


def _prim_sub():
    return assign(ret_reg("sub"), sub(arg_reg("sub", 0), arg_reg("sub", 1)))


def _prim_suc():
    return assign(ret_reg("suc"), add(arg_reg("suc", 0), 1))


def _prim_eq():
    a, b = arg_reg("eq", 0), arg_reg("eq", 1)
    t = [tmp_reg("eq", k) for k in range(3)]
    return seq(
        assign(t[0], sub(a, b)),
        assign(t[1], sub(b, a)),
        assign(t[2], add(t[0], t[1])),
        If(t[2], assign(ret_reg("eq"), 0), assign(ret_reg("eq"), 1)),
    )


def _prim_pair():
    # T(a+b) + b, with T(s) = s + (s-1) + ... + 1
    a, b = arg_reg("pair", 0), arg_reg("pair", 1)
    c, t = tmp_reg("pair", 0), tmp_reg("pair", 1)
    return seq(
        assign(c, add(a, b)),
        assign(t, 0),
        While(c, seq(assign(t, add(t, c)), assign(c, sub(c, 1)))),
        assign(ret_reg("pair"), add(t, b)),
    )


def _unpair_loop(g):
    """Shared body of fst/snd: find the largest w with T(w) <= n.

    Leaves w in ``g.tmp.0`` and ``n - T(w)`` in ``g.tmp.1``."""
    n = arg_reg(g, 0)
    w, rest, nxt, d, go = (tmp_reg(g, k) for k in range(5))
    # invariant: rest = n - T(w); step while w + 1 <= rest
    test = (assign(nxt, add(w, 1)), assign(d, sub(nxt, rest)), assign(go, sub(1, d)))
    return seq(
        assign(w, 0),
        assign(rest, n),
        *test,
        While(go, seq(assign(w, nxt), assign(rest, sub(rest, w)), *test)),
    )


def _prim_fst():
    w, rest = tmp_reg("fst", 0), tmp_reg("fst", 1)
    return seq(_unpair_loop("fst"), assign(ret_reg("fst"), sub(w, rest)))


def _prim_snd():
    rest = tmp_reg("snd", 1)
    return seq(_unpair_loop("snd"), assign(ret_reg("snd"), rest))


_PRIMS = {
    "add": (2, _prim_add),
    "sub": (2, _prim_sub),
    "eq": (2, _prim_eq),
    "suc": (1, _prim_suc),
    "fst": (1, _prim_fst),
    "snd": (1, _prim_snd),
    "pair": (2, _prim_pair),
}


def stdlib_primitives():
    """Fresh registry holding IMP^W implementations of the primitives."""
    return Registry({name: (arity, build()) for name, (arity, build) in _PRIMS.items()})


def written_regs(p):
    out = set()
    for c in seq_spine_all(p):
        if isinstance(c, Assign):
            out.add(c.r)
        elif isinstance(c, Call):
            out.add(c.ret)
    return out


def seq_spine_all(p):
    stack = [p]
    while stack:
        c = stack.pop()
        yield c
        if isinstance(c, Seq):
            stack.extend((c.second, c.first))
        elif isinstance(c, If):
            stack.extend((c.else_, c.then))
        elif isinstance(c, While):
            stack.append(c.body)

