"""Nat-only functional IR with de Bruijn lets and an evaluator.

Terms: ``If``, ``Let`` (binds de Bruijn index 0 in its body), ``LetBound``,
``Arg`` (0-based parameter index), ``Num``, ``Call`` and ``TailCall``.
The textual form is one ``(def name arity body)`` s-expression per function.
"""

from dataclasses import dataclass

from .frontend import FuelExhausted
from .natenc import pair, unpair
from .sexpr import SexprError, dumps, read_all


@dataclass(frozen=True)
class If:
    cond: object
    then: object
    else_: object


@dataclass(frozen=True)
class Let:
    rhs: object
    body: object


@dataclass(frozen=True)
class LetBound:
    i: int


@dataclass(frozen=True)
class Arg:
    i: int


@dataclass(frozen=True)
class Num:
    n: int


@dataclass(frozen=True)
class Call:
    g: str
    args: tuple


@dataclass(frozen=True)
class TailCall:
    args: tuple


@dataclass(frozen=True)
class NatFunDef:
    name: str
    arity: int
    body: object


PRIMITIVE_ARITY = {"add": 2, "sub": 2, "eq": 2, "suc": 1, "fst": 1, "snd": 1, "pair": 2}


def apply_primitive(g, args):
    if g == "add":
        return args[0] + args[1]
    if g == "sub":
        return max(args[0] - args[1], 0)
    if g == "eq":
        return 1 if args[0] == args[1] else 0
    if g == "suc":
        return args[0] + 1
    if g == "fst":
        return unpair(args[0])[0]
    if g == "snd":
        return unpair(args[0])[1]
    if g == "pair":
        return pair(args[0], args[1])
    raise KeyError(g)


class UnknownFunction(KeyError):
    pass


class NatProgram:
    """Ordered collection of NatFunDefs; later functions may call earlier ones."""

    def __init__(self, defs=()):
        self.defs = {}
        for d in defs:
            self.add(d)

    def add(self, d):
        if d.name in self.defs or d.name in PRIMITIVE_ARITY:
            raise ValueError(f"duplicate function {d.name!r}")
        self.defs[d.name] = d
        return d

    def __getitem__(self, name):
        try:
            return self.defs[name]
        except KeyError:
            raise UnknownFunction(name) from None

    def __contains__(self, name):
        return name in self.defs

    def __iter__(self):
        return iter(self.defs.values())

    def __len__(self):
        return len(self.defs)


# ---------------------------------------------------------------------------
# evaluation


class _TailArgs:
    __slots__ = ("args",)

    def __init__(self, args):
        self.args = args


class _Eval:
    def __init__(self, env, fuel):
        self.env = env
        self.fuel = fuel

    def call(self, name, args):
        f = self.env[name] if not isinstance(name, NatFunDef) else name
        if len(args) != f.arity:
            raise ValueError(f"{f.name!r} expects {f.arity} arguments, got {len(args)}")
        while True:
            self.fuel -= 1
            if self.fuel < 0:
                raise FuelExhausted(f"evaluation of {f.name!r} ran out of fuel")
            r = self.eval(f.body, args, ())
            if isinstance(r, _TailArgs):
                args = r.args
                continue
            return r

    def eval(self, t, args, bound):
        # ``bound`` is a tuple with the innermost Let value first
        while True:
            if isinstance(t, Num):
                return t.n
            if isinstance(t, Arg):
                return args[t.i]
            if isinstance(t, LetBound):
                return bound[t.i]
            if isinstance(t, If):
                t = t.then if self.eval(t.cond, args, bound) != 0 else t.else_
                continue
            if isinstance(t, Let):
                bound = (self.eval(t.rhs, args, bound),) + bound
                t = t.body
                continue
            if isinstance(t, Call):
                vals = [self.eval(a, args, bound) for a in t.args]
                if t.g in PRIMITIVE_ARITY:
                    return apply_primitive(t.g, vals)
                return self.call(t.g, vals)
            if isinstance(t, TailCall):
                return _TailArgs([self.eval(a, args, bound) for a in t.args])
            raise TypeError(f"not a NatTerm: {t!r}")


def eval_nat(env, f, args, fuel=1_000_000):
    """Evaluate ``f`` (a name in ``env`` or a NatFunDef) on natural ``args``.

    Tail calls loop in place; ``fuel`` bounds function entries plus tail
    iterations."""
    if isinstance(env, (list, tuple)):
        env = NatProgram(env)
    return _Eval(env, fuel).call(f, list(args))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class IRViolation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


def validate_tail(t, arity=None, depth=0):
    """``None`` if ``TailCall`` occurs only in tail positions (and, when
    ``arity`` is given, indices and tail-call arities are in range);
    otherwise the first violation."""
    stack = [(t, True, depth, "body")]
    while stack:
        t, tail, d, path = stack.pop()
        if isinstance(t, (Num,)):
            continue
        if isinstance(t, LetBound):
            if t.i >= d:
                return IRViolation(path, f"bound {t.i} outside {d} enclosing lets")
        elif isinstance(t, Arg):
            if arity is not None and t.i >= arity:
                return IRViolation(path, f"arg {t.i} out of range for arity {arity}")
        elif isinstance(t, If):
            stack.append((t.else_, tail, d, path + ".else"))
            stack.append((t.then, tail, d, path + ".then"))
            stack.append((t.cond, False, d, path + ".cond"))
        elif isinstance(t, Let):
            stack.append((t.body, tail, d + 1, path + ".body"))
            stack.append((t.rhs, False, d, path + ".rhs"))
        elif isinstance(t, Call):
            for k in range(len(t.args) - 1, -1, -1):
                stack.append((t.args[k], False, d, f"{path}.args[{k}]"))
        elif isinstance(t, TailCall):
            if not tail:
                return IRViolation(path, "tail call in non-tail position")
            if arity is not None and len(t.args) != arity:
                return IRViolation(path, f"tail call with {len(t.args)} arguments, expected {arity}")
            for k in range(len(t.args) - 1, -1, -1):
                stack.append((t.args[k], False, d, f"{path}.args[{k}]"))
        else:
            return IRViolation(path, f"not a NatTerm: {t!r}")
    return None


def validate_fun(f, env=None):
    v = validate_tail(f.body, f.arity)
    if v is not None:
        return v
    if env is not None:
        for t in walk(f.body):
            if isinstance(t, Call):
                if t.g in PRIMITIVE_ARITY:
                    want = PRIMITIVE_ARITY[t.g]
                elif t.g in env:
                    want = env[t.g].arity
                else:
                    return IRViolation("body", f"unknown callee {t.g!r}")
                if want != len(t.args):
                    return IRViolation("body", f"{t.g!r} called with {len(t.args)} arguments, expected {want}")
    return None


def walk(t):
    stack = [t]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, If):
            stack.extend((t.else_, t.then, t.cond))
        elif isinstance(t, Let):
            stack.extend((t.body, t.rhs))
        elif isinstance(t, (Call, TailCall)):
            stack.extend(reversed(t.args))


def size(t):
    return sum(1 for _ in walk(t))


# ---------------------------------------------------------------------------
# text format


def to_sexpr(t):
    if isinstance(t, NatFunDef):
        return ["def", t.name, t.arity, to_sexpr(t.body)]
    if isinstance(t, If):
        return ["if", to_sexpr(t.cond), to_sexpr(t.then), to_sexpr(t.else_)]
    if isinstance(t, Let):
        return ["let", to_sexpr(t.rhs), to_sexpr(t.body)]
    if isinstance(t, LetBound):
        return ["bound", t.i]
    if isinstance(t, Arg):
        return ["arg", t.i]
    if isinstance(t, Num):
        return ["num", t.n]
    if isinstance(t, Call):
        return ["call", t.g] + [to_sexpr(a) for a in t.args]
    if isinstance(t, TailCall):
        return ["tailcall"] + [to_sexpr(a) for a in t.args]
    raise TypeError(f"not a NatTerm: {t!r}")


def from_sexpr(form):
    if not isinstance(form, list) or not form:
        raise SexprError(f"bad IR form: {form!r}")
    head, rest = form[0], form[1:]
    try:
        if head == "def":
            name, arity, body = rest
            return NatFunDef(str(name), int(arity), from_sexpr(body))
        if head == "if":
            c, a, b = rest
            return If(from_sexpr(c), from_sexpr(a), from_sexpr(b))
        if head == "let":
            r, b = rest
            return Let(from_sexpr(r), from_sexpr(b))
        if head in ("bound", "arg", "num"):
            (n,) = rest
            if not isinstance(n, int):
                raise SexprError(f"({head} ...) needs a natural, got {n!r}")
            return {"bound": LetBound, "arg": Arg, "num": Num}[head](n)
        if head == "call":
            return Call(str(rest[0]), tuple(from_sexpr(a) for a in rest[1:]))
        if head == "tailcall":
            return TailCall(tuple(from_sexpr(a) for a in rest))
    except ValueError as e:
        if isinstance(e, SexprError):
            raise
        raise SexprError(f"malformed ({head} ...): {e}") from None
    raise SexprError(f"unknown IR form {head!r}")


def dump_program(defs):
    return "\n".join(dumps(to_sexpr(d)) for d in defs) + "\n"


def load_program(text):
    return NatProgram(from_sexpr(f) for f in read_all(text))
