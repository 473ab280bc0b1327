"""Inlining of calls with per-call-site register renaming."""

import itertools

from .imp import (
    Assign,
    AssignBit,
    Bin,
    Call,
    Reg,
    all_regs,
    check_lang,
    rewrite,
    seq,
    vars_of,
)


class RenameError(ValueError):
    pass


def _as_fn(m):
    if callable(m):
        return m
    return lambda r: m.get(r, r)


def rename_registers(p, m):
    """Apply the register map ``m`` (dict or function) everywhere in ``p``,
    callee bodies included. ``m`` must be injective on the registers of ``p``."""
    fn = _as_fn(m)
    regs = all_regs(p)
    image = {}
    for r in sorted(regs):
        t = fn(r)
        if t in image:
            raise RenameError(f"map is not injective: {image[t]!r} and {r!r} both go to {t!r}")
        image[t] = r
    return rename_unchecked(p, fn)


def rename_unchecked(p, fn):
    """Apply ``fn`` to every register of ``p`` without the injectivity check."""
    def aexp(a):
        if isinstance(a, Reg):
            return Reg(fn(a.r))
        if isinstance(a, Bin):
            return Bin(a.op, aexp(a.lhs), aexp(a.rhs))
        return a

    def leaf(c):
        if isinstance(c, Assign):
            return Assign(fn(c.r), aexp(c.a))
        if isinstance(c, AssignBit):
            return AssignBit(fn(c.r), c.bit)
        if isinstance(c, Call):
            return Call(rename_unchecked(c.callee, fn), fn(c.ret))
        return c

    return rewrite(p, leaf, fn)


def inline_calls(p, start=0):
    """Replace each ``Call(q, r)`` by copy-in, the renamed ``q``, and copy-out.

    Call sites get prefixes ``call0::``, ``call1::``... in traversal order."""
    counter = itertools.count(start)
    outer = vars_of(p)

    def leaf(c):
        if not isinstance(c, Call):
            return c
        callee = check_lang(c.callee, "impw")
        prefix = f"call{next(counter)}::"
        regs = sorted(all_regs(callee) | {c.ret})
        clash = [r for r in outer if r.startswith(prefix)]
        if clash:
            raise RenameError(f"prefix {prefix!r} collides with {clash[0]!r}")
        table = {r: prefix + r for r in regs}
        copy_in = [Assign(table[r], Reg(r)) for r in regs]
        body = rename_unchecked(callee, table.__getitem__)
        return seq(*copy_in, body, Assign(c.ret, Reg(table[c.ret])))

    return rewrite(p, leaf)
