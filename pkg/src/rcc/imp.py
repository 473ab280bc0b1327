"""Imperative languages and their step-counting big-step interpreters.

One command syntax is shared by all levels; a language tag restricts which
commands may appear:

* ``imptc``: Assign, Seq, If, Call, Recurse
* ``impwc``: Assign, Seq, If, Call, While
* ``impw``: Assign, Seq, If, While
* ``impminus``: AssignBit, Seq, If, While (all values are bits)

States are dicts from register name to natural; absent registers read 0.
"""

from dataclasses import dataclass, fields
import json

from .frontend import FuelExhausted
from .sexpr import SexprError, dumps, read


# ---------------------------------------------------------------------------
# syntax


@dataclass(frozen=True)
class Const:
    n: int


@dataclass(frozen=True)
class Reg:
    r: str


@dataclass(frozen=True)
class Bin:
    op: str  # "+" or "-"
    lhs: object
    rhs: object

    def __post_init__(self):
        if self.op not in ("+", "-"):
            raise ValueError(f"unknown operator {self.op!r}")
        if not isinstance(self.lhs, (Const, Reg)) or not isinstance(self.rhs, (Const, Reg)):
            raise ValueError("operands must be constants or registers")


@dataclass(frozen=True)
class Assign:
    r: str
    a: object


@dataclass(frozen=True)
class Seq:
    first: object
    second: object


@dataclass(frozen=True)
class If:
    r: str
    then: object
    else_: object


@dataclass(frozen=True)
class Call:
    callee: object
    ret: str


@dataclass(frozen=True)
class Recurse:
    pass


@dataclass(frozen=True)
class While:
    r: str
    body: object


@dataclass(frozen=True)
class AssignBit:
    r: str
    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError(f"bit assignment of non-bit {self.bit!r}")


RECURSE = Recurse()


def atom(x):
    if isinstance(x, (Const, Reg)):
        return x
    if isinstance(x, int):
        return Const(x)
    return Reg(x)


def assign(r, a):
    return Assign(r, a if isinstance(a, Bin) else atom(a))


def add(a, b):
    return Bin("+", atom(a), atom(b))


def sub(a, b):
    return Bin("-", atom(a), atom(b))


def seq(*cmds):
    """Right-nested sequence of ``cmds``."""
    cmds = [c for c in cmds if c is not None]
    if not cmds:
        raise ValueError("empty sequence")
    out = cmds[-1]
    for c in reversed(cmds[:-1]):
        out = Seq(c, out)
    return out


def seq_spine(c):
    """Split the right spine of a Seq chain into its items."""
    items = []
    while isinstance(c, Seq):
        items.append(c.first)
        c = c.second
    items.append(c)
    return items


# ---------------------------------------------------------------------------
# language membership

_ALLOWED = {
    "imptc": (Assign, Seq, If, Call, Recurse),
    "impwc": (Assign, Seq, If, Call, While),
    "impw": (Assign, Seq, If, While),
    "impminus": (AssignBit, Seq, If, While),
}
LANGS = tuple(_ALLOWED)


class LanguageError(ValueError):
    pass


def check_lang(p, lang):
    allowed = _ALLOWED[lang]
    seen = set()
    stack = [p]
    while stack:
        c = stack.pop()
        if id(c) in seen:
            continue
        seen.add(id(c))
        if not isinstance(c, allowed):
            raise LanguageError(f"{type(c).__name__} is not allowed in {lang}")
        if isinstance(c, Seq):
            stack.extend((c.second, c.first))
        elif isinstance(c, If):
            stack.extend((c.else_, c.then))
        elif isinstance(c, While):
            stack.append(c.body)
        elif isinstance(c, Call):
            check_lang(c.callee, "impw")
    return p


def children(c):
    if isinstance(c, Seq):
        return (c.first, c.second)
    if isinstance(c, If):
        return (c.then, c.else_)
    if isinstance(c, While):
        return (c.body,)
    return ()


def nodes(p):
    """Distinct command nodes reachable from ``p`` (not entering callees)."""
    seen = set()
    stack = [p]
    while stack:
        c = stack.pop()
        if id(c) in seen:
            continue
        seen.add(id(c))
        yield c
        stack.extend(children(c))


def _deps(c):
    kids = children(c)
    return kids + (c.callee,) if isinstance(c, Call) else kids


def postorder(p):
    """Distinct nodes (callee bodies included), each after all its parts."""
    done = set()
    out = []
    stack = [(p, False)]
    while stack:
        c, ready = stack.pop()
        if id(c) in done:
            continue
        if ready:
            done.add(id(c))
            out.append(c)
            continue
        stack.append((c, True))
        stack.extend((k, False) for k in _deps(c) if id(k) not in done)
    return out


def size(p):
    """Number of command nodes of ``p`` as a tree, callee bodies included."""
    memo = {}
    for c in postorder(p):
        memo[id(c)] = 1 + sum(memo[id(k)] for k in _deps(c))
    return memo[id(p)]


def aexp_regs(a):
    if isinstance(a, Reg):
        return (a.r,)
    if isinstance(a, Bin):
        return aexp_regs(a.lhs) + aexp_regs(a.rhs)
    return ()


def vars_of(p):
    """Registers read or written by ``p`` itself.

    A Call contributes only its return register: the callee runs on a copy
    of the state and its own registers are not visible afterwards."""
    out = set()
    for c in nodes(p):
        if isinstance(c, Assign):
            out.add(c.r)
            out.update(aexp_regs(c.a))
        elif isinstance(c, AssignBit):
            out.add(c.r)
        elif isinstance(c, (If, While)):
            out.add(c.r)
        elif isinstance(c, Call):
            out.add(c.ret)
    return out


def maxconst(x):
    """Largest constant of an expression, program (callees included) or state."""
    if isinstance(x, dict):
        return max(x.values(), default=0)
    if isinstance(x, Const):
        return x.n
    if isinstance(x, Reg):
        return 0
    if isinstance(x, Bin):
        return max(maxconst(x.lhs), maxconst(x.rhs))
    best = 0
    stack = [x]
    seen = set()
    while stack:
        c = stack.pop()
        if id(c) in seen:
            continue
        seen.add(id(c))
        if isinstance(c, Assign):
            best = max(best, maxconst(c.a))
        elif isinstance(c, AssignBit):
            best = max(best, c.bit)
        elif isinstance(c, Call):
            stack.append(c.callee)
        stack.extend(children(c))
    return best


# ---------------------------------------------------------------------------
# semantics


@dataclass(frozen=True)
class CostModel:
    assign: int = 1
    seq: int = 1
    if_: int = 1
    while_false: int = 1
    while_true: int = 1
    call: int = 0
    recurse: int = 1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"cost {f.name} must be a natural, got {v!r}")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "if" in d:
            d["if_"] = d.pop("if")
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown cost constants {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["if"] = d.pop("if_")
        return d


DEFAULT_COST = CostModel()
# Assign 1, Seq +1, If +1, While false 1, While true +2
IMPMINUS_COST = CostModel(assign=1, seq=1, if_=1, while_false=1, while_true=2, call=0, recurse=0)


def aval(a, s):
    if isinstance(a, Const):
        return a.n
    if isinstance(a, Reg):
        return s.get(a.r, 0)
    x, y = aval(a.lhs, s), aval(a.rhs, s)
    if a.op == "+":
        return x + y
    return x - y if x > y else 0


@dataclass(frozen=True)
class ExecOutcome:
    state: dict
    steps: int
    flag: int = 0


class _Machine:
    def __init__(self, cost, fuel, ctx=None, flagged=False):
        self.cost = cost
        self.fuel = fuel
        self.ctx = ctx
        self.flagged = flagged
        self.steps = 0

    def charge(self, k):
        self.steps += k
        if self.fuel is not None and self.steps > self.fuel:
            raise FuelExhausted(f"step budget {self.fuel} exhausted")

    def run(self, c, s):
        """Execute ``c`` on ``s`` in place; returns the flag."""
        cost = self.cost
        while True:
            if isinstance(c, Assign):
                s[c.r] = aval(c.a, s)
                self.charge(cost.assign)
                return 0
            if isinstance(c, Seq):
                self.charge(cost.seq)
                if self.run(c.first, s):
                    return 1
                c = c.second
                continue
            if isinstance(c, If):
                self.charge(cost.if_)
                c = c.then if s.get(c.r, 0) != 0 else c.else_
                continue
            if isinstance(c, While):
                while s.get(c.r, 0) != 0:
                    self.charge(cost.while_true)
                    if self.run(c.body, s):
                        return 1
                self.charge(cost.while_false)
                return 0
            if isinstance(c, Recurse):
                self.charge(cost.recurse)
                if self.flagged:
                    return 1
                if self.ctx is None:
                    raise LanguageError("RECURSE outside a recursive context")
                c = self.ctx
                continue
            if isinstance(c, Call):
                inner = dict(s)
                saved = (self.ctx, self.flagged)
                self.ctx, self.flagged = None, False
                try:
                    self.run(c.callee, inner)
                finally:
                    self.ctx, self.flagged = saved
                s[c.ret] = inner.get(c.ret, 0)
                self.charge(cost.call)
                return 0
            if isinstance(c, AssignBit):
                s[c.r] = c.bit
                self.charge(cost.assign)
                return 0
            raise TypeError(f"not a command: {c!r}")


def _start(s):
    return dict(s) if s else {}


def run_imptc(ctx, p, s, cost=DEFAULT_COST, fuel=10_000_000):
    """Run ``p`` where RECURSE re-enters ``ctx``."""
    m = _Machine(cost, fuel, ctx=ctx)
    st = _start(s)
    m.run(p, st)
    return ExecOutcome(st, m.steps)


def run_flagged(p, s, cost=DEFAULT_COST, fuel=10_000_000):
    """Run ``p`` until it finishes (flag 0) or reaches its first RECURSE (flag 1)."""
    m = _Machine(cost, fuel, flagged=True)
    st = _start(s)
    flag = m.run(p, st)
    return ExecOutcome(st, m.steps, flag)


def run_impwc(p, s, cost=DEFAULT_COST, fuel=10_000_000):
    m = _Machine(cost, fuel)
    st = _start(s)
    m.run(p, st)
    return ExecOutcome(st, m.steps)


def run_impw(p, s, cost=DEFAULT_COST, fuel=10_000_000):
    return run_impwc(p, s, cost, fuel)


def run_impminus(p, s, fuel=10_000_000):
    """Reference tree-walking interpreter for bit programs (fixed costs)."""
    for r, v in (s or {}).items():
        if v not in (0, 1):
            raise ValueError(f"register {r!r} holds non-bit {v!r}")
    m = _Machine(IMPMINUS_COST, fuel)
    st = _start(s)
    m.run(p, st)
    return ExecOutcome(st, m.steps)


def run(lang, p, s, cost=DEFAULT_COST, fuel=10_000_000):
    check_lang(p, lang)
    if lang == "imptc":
        return run_imptc(p, p, s, cost, fuel)
    if lang == "impminus":
        return run_impminus(p, s, fuel)
    return run_impwc(p, s, cost, fuel)


def restrict(s, regs):
    return {r: s.get(r, 0) for r in regs}


def canonical(s):
    """Drop zero entries so states compare as total functions."""
    return {r: v for r, v in s.items() if v != 0}


# ---------------------------------------------------------------------------
# s-expression form


def aexp_to_sexpr(a):
    if isinstance(a, Const):
        return ["const", a.n]
    if isinstance(a, Reg):
        return ["reg", a.r]
    return ["add" if a.op == "+" else "sub", aexp_to_sexpr(a.lhs), aexp_to_sexpr(a.rhs)]


def _cmd_to_sexpr(c):
    if isinstance(c, Assign):
        return ["assign", c.r, aexp_to_sexpr(c.a)]
    if isinstance(c, AssignBit):
        return ["xbit", c.r, c.bit]
    if isinstance(c, If):
        return ["if", c.r, to_sexpr(c.then), to_sexpr(c.else_)]
    if isinstance(c, While):
        return ["while", c.r, to_sexpr(c.body)]
    if isinstance(c, Call):
        return ["call", to_sexpr(c.callee), c.ret]
    if isinstance(c, Recurse):
        return ["recurse"]
    raise TypeError(f"not a command: {c!r}")


def to_sexpr(c):
    items = seq_spine(c)
    out = _cmd_to_sexpr(items[-1])
    for x in reversed(items[:-1]):
        out = ["seq", _cmd_to_sexpr(x) if not isinstance(x, Seq) else to_sexpr(x), out]
    return out


def aexp_from_sexpr(f):
    if not isinstance(f, list) or not f:
        raise SexprError(f"bad expression {f!r}")
    head = f[0]
    if head == "const" and len(f) == 2 and isinstance(f[1], int):
        return Const(f[1])
    if head == "reg" and len(f) == 2:
        return Reg(str(f[1]))
    if head in ("add", "sub") and len(f) == 3:
        return Bin("+" if head == "add" else "-", aexp_from_sexpr(f[1]), aexp_from_sexpr(f[2]))
    raise SexprError(f"bad expression {dumps(f)}")


def from_sexpr(f):
    firsts = []
    while isinstance(f, list) and f and f[0] == "seq":
        if len(f) != 3:
            raise SexprError("seq takes two commands")
        firsts.append(from_sexpr(f[1]))
        f = f[2]
    out = _cmd_from_sexpr(f)
    for x in reversed(firsts):
        out = Seq(x, out)
    return out


def _cmd_from_sexpr(f):
    if not isinstance(f, list) or not f:
        raise SexprError(f"bad command {f!r}")
    head, n = f[0], len(f)
    if head == "assign" and n == 3:
        return Assign(str(f[1]), aexp_from_sexpr(f[2]))
    if head == "xbit" and n == 3 and f[2] in (0, 1):
        return AssignBit(str(f[1]), f[2])
    if head == "if" and n == 4:
        return If(str(f[1]), from_sexpr(f[2]), from_sexpr(f[3]))
    if head == "while" and n == 3:
        return While(str(f[1]), from_sexpr(f[2]))
    if head == "call" and n == 3:
        return Call(from_sexpr(f[1]), str(f[2]))
    if head == "recurse" and n == 1:
        return RECURSE
    raise SexprError(f"bad command {dumps(f)}")


def dump(c):
    return dumps(to_sexpr(c))


def parse(text):
    return from_sexpr(read(text))


def state_to_json(s):
    return json.dumps(canonical(s), sort_keys=True)


def state_from_json(text):
    d = json.loads(text)
    if not isinstance(d, dict):
        raise ValueError("state must be a JSON object")
    for k, v in d.items():
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ValueError(f"register {k!r} must hold a natural, got {v!r}")
    return d



def rewrite(p, leaf, cond=None):
    """Rebuild ``p`` bottom-up, replacing every non-structural command ``c``
    (Assign, AssignBit, Call, Recurse) by ``leaf(c)`` and, if given, every
    If/While register ``r`` by ``cond(r)``. Shared subtrees stay shared."""
    cond = cond or (lambda r: r)
    memo = {}
    stack = [(p, False)]
    while stack:
        c, ready = stack.pop()
        if id(c) in memo:
            continue
        kids = children(c)
        if not kids:
            memo[id(c)] = leaf(c)
            continue
        if not ready:
            stack.append((c, True))
            stack.extend((k, False) for k in kids if id(k) not in memo)
            continue
        if isinstance(c, Seq):
            memo[id(c)] = Seq(memo[id(c.first)], memo[id(c.second)])
        elif isinstance(c, If):
            memo[id(c)] = If(cond(c.r), memo[id(c.then)], memo[id(c.else_)])
        else:
            memo[id(c)] = While(cond(c.r), memo[id(c.body)])
    return memo[id(p)]


def all_regs(p):
    """Registers mentioned anywhere in ``p``, callee bodies included."""
    out = vars_of(p)
    for c in nodes(p):
        if isinstance(c, Call):
            out |= all_regs(c.callee)
    return out
