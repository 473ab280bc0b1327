"""Replacing tail recursion by a while loop.

``p`` becomes ``cnt := 1; WHILE cnt DO (cnt := 0; p[cnt := 1 / RECURSE])``.
"""

from .imp import Assign, Const, Recurse, Seq, While, rewrite, vars_of

CNT = "%cnt"


class FreshnessError(ValueError):
    pass


def subst_recurse(p, replacement):
    """Replace every RECURSE in ``p`` by ``replacement``."""
    return rewrite(p, lambda c: replacement if isinstance(c, Recurse) else c)


def eliminate_recursion(p, cnt=CNT):
    if cnt in vars_of(p):
        raise FreshnessError(f"loop register {cnt!r} already occurs in the program")
    body = subst_recurse(p, Assign(cnt, Const(1)))
    return Seq(Assign(cnt, Const(1)), While(cnt, Seq(Assign(cnt, Const(0)), body)))
