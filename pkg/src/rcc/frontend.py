"""Source language: first-order, tail-recursive functions over ADTs.

Concrete syntax::

    data List a = Nil | Cons a (List a)

    fun count (a : Nat) (xs : List Nat) (n : Nat) : Nat =
      case xs of
        Nil -> n
      | Cons x ys -> count a ys (if eq x a then suc n else n)

``--`` starts a line comment. Case arms list every constructor in declaration
order. A ``case`` on a ``Nat`` uses the arms ``0 -> e`` and ``suc m -> e``.
A ``case`` nested inside a non-final arm must be parenthesised, otherwise it
takes the remaining arms.

``fun name = template fn`` declares the first-order instance of a template
(a function with one function-typed parameter) at ``fn``; the template's
self-calls are folded into ``name``.

Built-in primitives on ``Nat`` are ``add``, ``sub`` (truncated), ``eq``
(1 or 0, structural on any type), ``suc``, and the Cantor pairing
functions ``pair``, ``fst``, ``snd``.
"""

from dataclasses import dataclass
import itertools
import re

# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class TCon:
    name: str
    args: tuple = ()

    def __str__(self):
        return show_type(self)


@dataclass(frozen=True)
class TVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class TFun:
    params: tuple
    result: object

    def __str__(self):
        return show_type(self)


@dataclass(frozen=True)
class TMeta:
    id: int


NAT = TCon("Nat")


def show_type(t, nested=False):
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TMeta):
        return f"?{t.id}"
    if isinstance(t, TFun):
        s = " -> ".join([show_type(p, True) for p in t.params] + [show_type(t.result, True)])
        return f"({s})" if nested else s
    if not t.args:
        return t.name
    s = t.name + " " + " ".join(show_type(a, True) for a in t.args)
    return f"({s})" if nested else s


def subst_type(t, mapping):
    if isinstance(t, TVar):
        return mapping.get(t.name, t)
    if isinstance(t, TCon):
        if not t.args:
            return t
        return TCon(t.name, tuple(subst_type(a, mapping) for a in t.args))
    if isinstance(t, TFun):
        return TFun(tuple(subst_type(p, mapping) for p in t.params), subst_type(t.result, mapping))
    return t


def type_vars(t, acc=None):
    acc = [] if acc is None else acc
    if isinstance(t, TVar):
        if t.name not in acc:
            acc.append(t.name)
    elif isinstance(t, TCon):
        for a in t.args:
            type_vars(a, acc)
    elif isinstance(t, TFun):
        for p in t.params:
            type_vars(p, acc)
        type_vars(t.result, acc)
    return acc


# ---------------------------------------------------------------------------
# declarations and terms


@dataclass(frozen=True)
class Ctor:
    name: str
    arg_types: tuple

    @property
    def arity(self):
        return len(self.arg_types)


@dataclass(frozen=True)
class AdtDecl:
    name: str
    type_params: tuple
    constructors: tuple

    def ctor(self, name):
        for c in self.constructors:
            if c.name == name:
                return c
        raise KeyError(name)

    def tag(self, name):
        """1-based position of constructor ``name``."""
        for i, c in enumerate(self.constructors, 1):
            if c.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class Let:
    name: str
    rhs: object
    body: object


@dataclass(frozen=True)
class Arm:
    ctor: str
    binders: tuple
    body: object


@dataclass(frozen=True)
class Case:
    scrutinee: object
    arms: tuple


@dataclass(frozen=True)
class App:
    head: str
    args: tuple


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class NatLit:
    n: int


@dataclass(frozen=True)
class If:
    cond: object
    then: object
    else_: object


@dataclass(frozen=True)
class FunDef:
    name: str
    params: tuple  # of (name, type)
    return_type: object
    body: object

    @property
    def arity(self):
        return len(self.params)

    @property
    def param_names(self):
        return tuple(p for p, _ in self.params)

    @property
    def is_template(self):
        return any(isinstance(t, TFun) for _, t in self.params)


# ---------------------------------------------------------------------------
# values


@dataclass(frozen=True)
class NatV:
    n: int

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class ConV:
    adt: str
    ctor: str
    args: tuple = ()

    def __str__(self):
        return show_value(self)


def show_value(v):
    if isinstance(v, NatV):
        return str(v.n)
    items = _as_list(v)
    if items is not None:
        return "[" + ", ".join(show_value(x) for x in items) + "]"
    if not v.args:
        return v.ctor
    parts = []
    for a in v.args:
        s = show_value(a)
        if isinstance(a, ConV) and a.args and _as_list(a) is None:
            s = f"({s})"
        parts.append(s)
    return v.ctor + " " + " ".join(parts)


def _as_list(v):
    out = []
    while isinstance(v, ConV) and v.adt == "List":
        if v.ctor == "Nil":
            return out
        if v.ctor != "Cons":
            return None
        out.append(v.args[0])
        v = v.args[1]
    return None


def nat_list(xs):
    """Build a ``List Nat`` value from Python ints (or values)."""
    v = ConV("List", "Nil")
    for x in reversed(list(xs)):
        v = ConV("List", "Cons", (x if not isinstance(x, int) else NatV(x), v))
    return v


def list_items(v):
    items = _as_list(v)
    if items is None:
        raise ValueError(f"not a list value: {v}")
    return items


# ---------------------------------------------------------------------------
# errors


class FrontendError(Exception):
    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            msg = f"{line}:{col}: {msg}"
        super().__init__(msg)


class ParseError(FrontendError):
    pass


class NameError_(FrontendError):
    pass


class ArityError(FrontendError):
    pass


class TypeError_(FrontendError):
    pass


class FuelExhausted(Exception):
    pass


class MatchError(Exception):
    pass


# ---------------------------------------------------------------------------
# lexer

KEYWORDS = {"data", "fun", "let", "in", "case", "of", "if", "then", "else"}
PRIMITIVES = {"add": 2, "sub": 2, "eq": 2, "suc": 1, "pair": 2, "fst": 1, "snd": 1}

_LEX = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>--[^\n]*)"
    r"|(?P<arrow>->)|(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>[():=|])"
)


@dataclass(frozen=True)
class Tok:
    kind: str  # 'kw', 'upper', 'lower', 'num', 'sym', 'eof'
    text: str
    line: int
    col: int


def lex(text):
    toks = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _LEX.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        s = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            if s in KEYWORDS:
                toks.append(Tok("kw", s, line, col))
            elif s[0].isupper():
                toks.append(Tok("upper", s, line, col))
            else:
                toks.append(Tok("lower", s, line, col))
        elif kind == "num":
            toks.append(Tok("num", s, line, col))
        elif kind in ("sym", "arrow"):
            toks.append(Tok("sym", s, line, col))
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text):
        self.toks = lex(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, kind, text=None):
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind, text=None):
        if not self.at(kind, text):
            want = text or kind
            got = self.tok.text or self.tok.kind
            raise self.error(f"expected {want!r}, found {got!r}")
        return self.next()

    # declarations

    def program(self):
        decls = []
        while not self.at("eof"):
            if self.at("kw", "data"):
                decls.append(self.data_decl())
            elif self.at("kw", "fun"):
                decls.append(self.fun_decl())
            else:
                raise self.error(f"expected 'data' or 'fun', found {self.tok.text!r}")
        return decls

    def data_decl(self):
        start = self.expect("kw", "data")
        name = self.expect("upper").text
        params = []
        while self.at("lower"):
            params.append(self.next().text)
        self.expect("sym", "=")
        ctors = [self.ctor_decl()]
        while self.at("sym", "|"):
            self.next()
            ctors.append(self.ctor_decl())
        return ("data", AdtDecl(name, tuple(params), tuple(ctors)), start)

    def ctor_decl(self):
        name = self.expect("upper").text
        args = []
        while self.at("upper") or self.at("lower") or self.at("sym", "("):
            args.append(self.atype())
        return Ctor(name, tuple(args))

    def atype(self):
        t = self.tok
        if t.kind == "upper":
            self.next()
            return TCon(t.text)
        if t.kind == "lower":
            self.next()
            return TVar(t.text)
        self.expect("sym", "(")
        ty = self.type_()
        self.expect("sym", ")")
        return ty

    def type_(self):
        parts = [self.app_type()]
        while self.at("sym", "->"):
            self.next()
            parts.append(self.app_type())
        if len(parts) == 1:
            return parts[0]
        return TFun(tuple(parts[:-1]), parts[-1])

    def app_type(self):
        if self.at("upper"):
            name = self.next().text
            args = []
            while self.at("upper") or self.at("lower") or self.at("sym", "("):
                args.append(self.atype())
            return TCon(name, tuple(args))
        return self.atype()

    def fun_decl(self):
        start = self.expect("kw", "fun")
        name = self.expect("lower").text
        if self.at("sym", "="):
            # first-order instance of a template: fun name = template fn
            self.next()
            template = self.expect("lower").text
            fn = self.expect("lower").text
            return ("instance", (name, template, fn), start)
        params = []
        while self.at("sym", "("):
            self.next()
            pname = self.expect("lower").text
            self.expect("sym", ":")
            pty = self.type_()
            self.expect("sym", ")")
            params.append((pname, pty))
        self.expect("sym", ":")
        ret = self.type_()
        self.expect("sym", "=")
        body = self.term()
        return ("fun", FunDef(name, tuple(params), ret, body), start)

    # terms

    def term(self):
        t = self.tok
        if t.kind == "kw" and t.text == "let":
            self.next()
            name = self.expect("lower").text
            self.expect("sym", "=")
            rhs = self.term()
            self.expect("kw", "in")
            body = self.term()
            return Let(name, rhs, body)
        if t.kind == "kw" and t.text == "case":
            self.next()
            scrut = self.term()
            self.expect("kw", "of")
            if self.at("sym", "|"):
                self.next()
            arms = [self.arm()]
            while self.at("sym", "|"):
                self.next()
                arms.append(self.arm())
            return Case(scrut, tuple(arms))
        if t.kind == "kw" and t.text == "if":
            self.next()
            c = self.term()
            self.expect("kw", "then")
            a = self.term()
            self.expect("kw", "else")
            b = self.term()
            return If(c, a, b)
        return self.app()

    def arm(self):
        t = self.tok
        if t.kind == "num":
            if t.text != "0":
                raise self.error("only 0 and suc patterns are allowed on Nat")
            self.next()
            ctor, binders = "0", ()
        elif t.kind == "lower" and t.text == "suc":
            self.next()
            ctor, binders = "suc", (self.expect("lower").text,)
        else:
            ctor = self.expect("upper").text
            binders = []
            while self.at("lower"):
                binders.append(self.next().text)
            binders = tuple(binders)
        self.expect("sym", "->")
        return Arm(ctor, binders, self.term())

    def _starts_atom(self):
        t = self.tok
        return t.kind in ("lower", "upper", "num") or (t.kind == "sym" and t.text == "(")

    def app(self):
        head_tok = self.tok
        head = self.atom()
        args = []
        while self._starts_atom():
            args.append(self.atom())
        if not args:
            return head
        if isinstance(head, Var):
            return App(head.name, tuple(args))
        if isinstance(head, App) and not head.args and head_tok.kind == "upper":
            return App(head.head, tuple(args))
        raise self.error("application head must be a name", head_tok)

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.next()
            return NatLit(int(t.text))
        if t.kind == "lower":
            self.next()
            return Var(t.text)
        if t.kind == "upper":
            self.next()
            return App(t.text, ())
        if t.kind == "sym" and t.text == "(":
            self.next()
            inner = self.term()
            self.expect("sym", ")")
            return inner
        raise self.error(f"unexpected {t.text or t.kind!r}")


# ---------------------------------------------------------------------------
# program


class Program:
    """Checked declarations in source order with lookup tables."""

    def __init__(self):
        self.adts = []
        self.funs = []
        self.adt_by_name = {}
        self.fun_by_name = {}
        self.ctor_owner = {}  # ctor name -> AdtDecl

    def adt(self, name):
        return self.adt_by_name[name]

    def fun(self, name):
        try:
            return self.fun_by_name[name]
        except KeyError:
            raise NameError_(f"unknown function {name!r}") from None

    def ctor(self, name):
        decl = self.ctor_owner[name]
        return decl, decl.ctor(name), decl.tag(name)

    def add_adt(self, decl):
        self.adts.append(decl)
        self.adt_by_name[decl.name] = decl
        for c in decl.constructors:
            self.ctor_owner[c.name] = decl

    def add_fun(self, f):
        self.funs.append(f)
        self.fun_by_name[f.name] = f

    def first_order_funs(self):
        return [f for f in self.funs if not f.is_template]

    def __iter__(self):
        # allows ``adts, funs = parse_program(text)``
        return iter((self.adts, self.funs))


def parse_program(text):
    """Parse, resolve and type-check ``text``; returns a :class:`Program`.

    Unpacks as ``(adts, funs)`` in source order.
    """
    decls = _Parser(text).program()
    prog = Program()
    for kind, decl, tok in decls:
        if kind == "data":
            _check_adt(prog, decl, tok)
            prog.add_adt(decl)
        elif kind == "instance":
            name, template, fn = decl
            where = (tok.line, tok.col)
            if name in prog.fun_by_name or name in PRIMITIVES or name in prog.ctor_owner:
                raise NameError_(f"duplicate or reserved function name {name!r}", *where)
            if template not in prog.fun_by_name:
                raise NameError_(f"unknown template {template!r}", *where)
            try:
                inst = monomorphize_instance(prog.fun_by_name[template], fn, name, prog)
            except TemplateError as e:
                raise TemplateError(str(e), *where) from None
            prog.add_fun(inst)
        else:
            f = _resolve_fun(prog, decl, tok)
            _typecheck_fun(prog, f, tok)
            prog.add_fun(f)
    return prog


def parse_term(text, program=None, scope=()):
    """Parse a standalone term (used for CLI value literals)."""
    p = _Parser(text)
    t = p.term()
    p.expect("eof")
    if program is not None:
        t = _Resolver(program, None, set(scope), (p.toks[0].line, p.toks[0].col)).term(t, set(scope))
    return t


def parse_type(text, program=None):
    """Parse a type such as ``List Nat``; checked against ``program``."""
    p = _Parser(text)
    t = p.type_()
    p.expect("eof")
    if program is not None:
        _check_type(program, t, None, (1, 1))
    return t


_VALUE_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Z][A-Za-z0-9_']*)|([()\[\],]))")


def parse_value(text, program):
    """Parse a value literal: naturals, constructor applications and the
    list shorthand ``[1, 2]`` (for ``List``)."""
    toks, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _VALUE_TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} in value", 1, pos + 1)
        num, name, sym = m.groups()
        toks.append(int(num) if num is not None else name or sym)
        pos = m.end()
    toks.append(None)
    at = [0]

    def peek():
        return toks[at[0]]

    def take(want=None):
        t = toks[at[0]]
        if want is not None and t != want:
            raise ParseError(f"expected {want!r} in value, got {t!r}", 1, at[0] + 1)
        at[0] += 1
        return t

    def ctor_value(name, args):
        if name not in program.ctor_owner:
            raise NameError_(f"unknown constructor {name!r}", 1, 1)
        decl, c, _ = program.ctor(name)
        if len(args) != len(c.arg_types):
            raise ArityError(f"{name} takes {len(c.arg_types)} arguments, got {len(args)}", 1, 1)
        return ConV(decl.name, name, tuple(args))

    def atom():
        t = take()
        if isinstance(t, int):
            return NatV(t)
        if t == "(":
            v = value()
            take(")")
            return v
        if t == "[":
            items = []
            if peek() != "]":
                items.append(value())
                while peek() == ",":
                    take()
                    items.append(value())
            take("]")
            out = ctor_value("Nil", [])
            for x in reversed(items):
                out = ctor_value("Cons", [x, out])
            return out
        if isinstance(t, str) and t[0].isupper():
            return ctor_value(t, [])
        raise ParseError(f"unexpected {t!r} in value", 1, at[0])

    def value():
        t = peek()
        if isinstance(t, str) and t[0].isupper():
            take()
            args = []
            while peek() is not None and (isinstance(peek(), int) or peek() in ("(", "[")
                                          or (isinstance(peek(), str) and peek()[0].isupper())):
                args.append(atom())
            return ctor_value(t, args)
        return atom()

    v = value()
    take(None)
    return v


def _check_adt(prog, decl, tok):
    where = (tok.line, tok.col)
    if decl.name in prog.adt_by_name or decl.name == "Nat":
        raise NameError_(f"duplicate type {decl.name!r}", *where)
    if len(set(decl.type_params)) != len(decl.type_params):
        raise NameError_(f"duplicate type parameter in {decl.name!r}", *where)
    if not decl.constructors:
        raise FrontendError(f"{decl.name!r} has no constructors", *where)
    seen = set()
    for c in decl.constructors:
        if c.name in seen or c.name in prog.ctor_owner:
            raise NameError_(f"duplicate constructor {c.name!r}", *where)
        seen.add(c.name)
        for t in c.arg_types:
            _check_type(prog, t, decl, where)


def _check_type(prog, t, self_decl, where, allow_fun=False, tvars=None):
    if isinstance(t, TVar):
        if self_decl is not None and t.name not in self_decl.type_params:
            raise NameError_(f"unbound type variable {t.name!r}", *where)
        if tvars is not None:
            tvars.add(t.name)
        return
    if isinstance(t, TFun):
        if not allow_fun:
            raise TypeError_("function types are only allowed as parameter types", *where)
        for p in t.params:
            _check_type(prog, p, self_decl, where, False, tvars)
        _check_type(prog, t.result, self_decl, where, False, tvars)
        return
    if t.name == "Nat":
        arity = 0
    elif self_decl is not None and t.name == self_decl.name:
        arity = len(self_decl.type_params)
    elif t.name in prog.adt_by_name:
        arity = len(prog.adt_by_name[t.name].type_params)
    else:
        raise NameError_(f"unknown type {t.name!r}", *where)
    if len(t.args) != arity:
        raise ArityError(f"type {t.name!r} expects {arity} arguments, got {len(t.args)}", *where)
    for a in t.args:
        _check_type(prog, a, self_decl, where, False, tvars)


class _Resolver:
    def __init__(self, prog, fdef, params, where):
        self.prog = prog
        self.f = fdef
        self.where = where
        self.fun_params = {n for n, t in (fdef.params if fdef else ()) if isinstance(t, TFun)}

    def err(self, cls, msg):
        return cls(msg, *self.where)

    def callee_arity(self, name, scope):
        if name in scope:
            if name in self.fun_params:
                return len(dict(self.f.params)[name].params)
            raise self.err(TypeError_, f"{name!r} is not a function")
        if name in PRIMITIVES:
            return PRIMITIVES[name]
        if self.f is not None and name == self.f.name:
            return self.f.arity
        if name in self.prog.fun_by_name:
            return self.prog.fun_by_name[name].arity
        if name in self.prog.ctor_owner:
            return self.prog.ctor(name)[1].arity
        raise self.err(NameError_, f"unknown identifier {name!r}")

    def term(self, t, scope):
        if isinstance(t, NatLit):
            return t
        if isinstance(t, Var):
            if t.name in scope:
                return t
            if self.callee_arity(t.name, scope) == 0:
                return App(t.name, ())
            raise self.err(ArityError, f"{t.name!r} used without its arguments")
        if isinstance(t, App):
            arity = self.callee_arity(t.head, scope)
            if arity != len(t.args):
                raise self.err(ArityError, f"{t.head!r} expects {arity} arguments, got {len(t.args)}")
            return App(t.head, tuple(self.term(a, scope) for a in t.args))
        if isinstance(t, Let):
            return Let(t.name, self.term(t.rhs, scope), self.term(t.body, scope | {t.name}))
        if isinstance(t, If):
            return If(self.term(t.cond, scope), self.term(t.then, scope), self.term(t.else_, scope))
        if isinstance(t, Case):
            arms = []
            for arm in t.arms:
                if len(set(arm.binders)) != len(arm.binders):
                    raise self.err(NameError_, f"duplicate binder in arm {arm.ctor!r}")
                arms.append(Arm(arm.ctor, arm.binders, self.term(arm.body, scope | set(arm.binders))))
            return Case(self.term(t.scrutinee, scope), tuple(arms))
        raise TypeError(f"not a term: {t!r}")


def _resolve_fun(prog, f, tok):
    where = (tok.line, tok.col)
    if f.name in prog.fun_by_name or f.name in PRIMITIVES or f.name in prog.ctor_owner:
        raise NameError_(f"duplicate or reserved function name {f.name!r}", *where)
    names = [p for p, _ in f.params]
    if len(set(names)) != len(names):
        raise NameError_(f"duplicate parameter in {f.name!r}", *where)
    for _, t in f.params:
        _check_type(prog, t, None, where, allow_fun=True)
    _check_type(prog, f.return_type, None, where)
    body = _Resolver(prog, f, set(names), where).term(f.body, set(names))
    return FunDef(f.name, f.params, f.return_type, body)


# ---------------------------------------------------------------------------
# type checking


class _Unifier:
    def __init__(self):
        self.subst = {}
        self.counter = itertools.count()

    def fresh(self):
        return TMeta(next(self.counter))

    def resolve(self, t):
        while isinstance(t, TMeta) and t in self.subst:
            t = self.subst[t]
        if isinstance(t, TCon) and t.args:
            return TCon(t.name, tuple(self.resolve(a) for a in t.args))
        return t

    def occurs(self, m, t):
        t = self.resolve(t)
        if t == m:
            return True
        if isinstance(t, TCon):
            return any(self.occurs(m, a) for a in t.args)
        return False

    def unify(self, a, b):
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return True
        if isinstance(a, TMeta):
            if self.occurs(a, b):
                return False
            self.subst[a] = b
            return True
        if isinstance(b, TMeta):
            return self.unify(b, a)
        if isinstance(a, TCon) and isinstance(b, TCon):
            if a.name != b.name or len(a.args) != len(b.args):
                return False
            return all(self.unify(x, y) for x, y in zip(a.args, b.args))
        if isinstance(a, TFun) and isinstance(b, TFun):
            if len(a.params) != len(b.params):
                return False
            return all(self.unify(x, y) for x, y in zip(a.params, b.params)) and self.unify(a.result, b.result)
        return False


_PRIM_SIGS = {
    "add": ((NAT, NAT), NAT),
    "sub": ((NAT, NAT), NAT),
    "suc": ((NAT,), NAT),
    "pair": ((NAT, NAT), NAT),
    "fst": ((NAT,), NAT),
    "snd": ((NAT,), NAT),
}


class _Checker:
    def __init__(self, prog, f, where):
        self.prog = prog
        self.f = f
        self.u = _Unifier()
        self.where = where

    def err(self, msg):
        return TypeError_(f"in {self.f.name!r}: {msg}", *self.where)

    def expect(self, got, want, what):
        if not self.u.unify(got, want):
            raise self.err(f"{what}: expected {show_type(self.u.resolve(want))}, got {show_type(self.u.resolve(got))}")

    def instantiate(self, params, result, tvars):
        m = {v: self.u.fresh() for v in tvars}
        return tuple(subst_type(p, m) for p in params), subst_type(result, m)

    def signature(self, name, env):
        if name in env:
            t = env[name]
            return t.params, t.result
        if name == "eq":
            a = self.u.fresh()
            return (a, a), NAT
        if name in _PRIM_SIGS:
            return _PRIM_SIGS[name]
        if name == self.f.name:
            return tuple(t for _, t in self.f.params), self.f.return_type
        if name in self.prog.fun_by_name:
            g = self.prog.fun_by_name[name]
            ps = tuple(t for _, t in g.params)
            tv = []
            for t in ps + (g.return_type,):
                type_vars(t, tv)
            return self.instantiate(ps, g.return_type, tv)
        decl, c, _ = self.prog.ctor(name)
        return self.instantiate(c.arg_types, TCon(decl.name, tuple(TVar(v) for v in decl.type_params)), decl.type_params)

    def infer(self, t, env):
        if isinstance(t, NatLit):
            return NAT
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, Let):
            rt = self.infer(t.rhs, env)
            return self.infer(t.body, {**env, t.name: rt})
        if isinstance(t, If):
            self.expect(self.infer(t.cond, env), NAT, "if condition")
            a = self.infer(t.then, env)
            self.expect(self.infer(t.else_, env), a, "else branch")
            return a
        if isinstance(t, App):
            params, result = self.signature(t.head, env)
            for i, (arg, pt) in enumerate(zip(t.args, params)):
                self.expect(self.infer(arg, env), pt, f"argument {i + 1} of {t.head!r}")
            return result
        if isinstance(t, Case):
            return self.infer_case(t, env)
        raise TypeError(f"not a term: {t!r}")

    def infer_case(self, t, env):
        st = self.u.resolve(self.infer(t.scrutinee, env))
        first = t.arms[0].ctor if t.arms else None
        if st == NAT or (isinstance(st, TMeta) and first in ("0", "suc")):
            self.expect(st, NAT, "case scrutinee")
            shape = [("0", ()), ("suc", (NAT,))]
        else:
            if first not in self.prog.ctor_owner:
                raise self.err(f"unknown constructor {first!r} in case")
            decl = self.prog.ctor_owner[first]
            targs = tuple(self.u.fresh() for _ in decl.type_params)
            self.expect(st, TCon(decl.name, targs), "case scrutinee")
            m = dict(zip(decl.type_params, targs))
            shape = [(c.name, tuple(subst_type(a, m) for a in c.arg_types)) for c in decl.constructors]
        got = [a.ctor for a in t.arms]
        want = [n for n, _ in shape]
        if got != want:
            raise self.err(f"case arms must be exactly {want} in order, got {got}")
        result = None
        for arm, (_, arg_types) in zip(t.arms, shape):
            if len(arm.binders) != len(arg_types):
                raise ArityError(f"in {self.f.name!r}: pattern {arm.ctor!r} binds {len(arm.binders)} of {len(arg_types)} fields", *self.where)
            bt = self.infer(arm.body, {**env, **dict(zip(arm.binders, arg_types))})
            if result is None:
                result = bt
            else:
                self.expect(bt, result, f"arm {arm.ctor!r}")
        return result


def _typecheck_fun(prog, f, tok):
    c = _Checker(prog, f, (tok.line, tok.col))
    env = dict(f.params)
    c.expect(c.infer(f.body, env), f.return_type, "function body")


# ---------------------------------------------------------------------------
# pretty printing


def _is_atomic(t):
    return isinstance(t, (Var, NatLit)) or (isinstance(t, App) and not t.args)


def show_term(t):
    if isinstance(t, NatLit):
        return str(t.n)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, App):
        if not t.args:
            return t.head
        return t.head + " " + " ".join(_paren(a) for a in t.args)
    if isinstance(t, Let):
        return f"let {t.name} = {_guard(t.rhs)} in {show_term(t.body)}"
    if isinstance(t, If):
        return f"if {_guard(t.cond)} then {_guard(t.then)} else {show_term(t.else_)}"
    if isinstance(t, Case):
        arms = []
        for k, arm in enumerate(t.arms):
            pat = " ".join((arm.ctor,) + arm.binders)
            last = k == len(t.arms) - 1
            body = show_term(arm.body) if last else _guard(arm.body)
            arms.append(f"{pat} -> {body}")
        return f"case {_guard(t.scrutinee)} of " + " | ".join(arms)
    raise TypeError(f"not a term: {t!r}")


def _paren(t):
    s = show_term(t)
    return s if _is_atomic(t) else f"({s})"


def _guard(t):
    s = show_term(t)
    return s if isinstance(t, (Var, NatLit, App)) else f"({s})"


def show_adt(d):
    head = " ".join((d.name,) + d.type_params)
    ctors = []
    for c in d.constructors:
        ctors.append(" ".join([c.name] + [show_type(t, True) if not (isinstance(t, TCon) and t.args) else f"({show_type(t)})" for t in c.arg_types]))
    return f"data {head} = " + " | ".join(ctors)


def show_fun(f):
    ps = " ".join(f"({n} : {show_type(t)})" for n, t in f.params)
    sep = " " if ps else ""
    return f"fun {f.name}{sep}{ps} : {show_type(f.return_type)} =\n  {show_term(f.body)}"


def show_program(prog):
    parts = []
    # interleave in original order is not tracked; types first keeps it valid
    parts.extend(show_adt(d) for d in prog.adts)
    parts.extend(show_fun(f) for f in prog.funs)
    return "\n\n".join(parts) + ("\n" if parts else "")


# ---------------------------------------------------------------------------
# tail-position check


@dataclass(frozen=True)
class TailViolation:
    path: str
    term: object

    def __str__(self):
        return f"non-tail self-call at {self.path}: {show_term(self.term)}"


def check_tail(f):
    """Return ``None`` if every self-call of ``f`` is in tail position,
    otherwise the first offending occurrence."""
    stack = [(f.body, True, "body")]
    while stack:
        t, tail, path = stack.pop()
        if isinstance(t, App):
            if t.head == f.name and not tail:
                return TailViolation(path, t)
            for i in range(len(t.args) - 1, -1, -1):
                stack.append((t.args[i], False, f"{path}.args[{i}]"))
        elif isinstance(t, Let):
            stack.append((t.body, tail, f"{path}.body"))
            stack.append((t.rhs, False, f"{path}.rhs"))
        elif isinstance(t, If):
            stack.append((t.else_, tail, f"{path}.else"))
            stack.append((t.then, tail, f"{path}.then"))
            stack.append((t.cond, False, f"{path}.cond"))
        elif isinstance(t, Case):
            for i in range(len(t.arms) - 1, -1, -1):
                stack.append((t.arms[i].body, tail, f"{path}.arms[{i}]"))
            stack.append((t.scrutinee, False, f"{path}.scrutinee"))
    return None


# ---------------------------------------------------------------------------
# reference interpreter


class _TailCall:
    __slots__ = ("args",)

    def __init__(self, args):
        self.args = args


def _prim(name, args):
    from .natenc import pair, unpair

    if name == "eq":
        return NatV(1 if args[0] == args[1] else 0)
    ns = [a.n for a in args]
    if name == "add":
        return NatV(ns[0] + ns[1])
    if name == "sub":
        return NatV(max(ns[0] - ns[1], 0))
    if name == "suc":
        return NatV(ns[0] + 1)
    if name == "pair":
        return NatV(pair(ns[0], ns[1]))
    if name == "fst":
        return NatV(unpair(ns[0])[0])
    if name == "snd":
        return NatV(unpair(ns[0])[1])
    raise KeyError(name)


class _RefEval:
    def __init__(self, prog, fuel):
        self.prog = prog
        self.fuel = fuel

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted("reference evaluation ran out of fuel")

    def call(self, fname, args):
        f = self.prog.fun(fname)
        if f.is_template:
            raise TypeError(f"{fname!r} is higher-order; instantiate it first")
        while True:
            self.tick()
            env = dict(zip(f.param_names, args))
            res = self.eval(f.body, env, f, True)
            if isinstance(res, _TailCall):
                args = res.args
                continue
            return res

    def eval(self, t, env, f, tail):
        while True:
            if isinstance(t, NatLit):
                return NatV(t.n)
            if isinstance(t, Var):
                return env[t.name]
            if isinstance(t, Let):
                v = self.eval(t.rhs, env, f, False)
                env = {**env, t.name: v}
                t = t.body
                continue
            if isinstance(t, If):
                c = self.eval(t.cond, env, f, False)
                t = t.then if c.n != 0 else t.else_
                continue
            if isinstance(t, Case):
                v = self.eval(t.scrutinee, env, f, False)
                if isinstance(v, NatV):
                    if v.n == 0:
                        t = t.arms[0].body
                    else:
                        arm = t.arms[1]
                        env = {**env, arm.binders[0]: NatV(v.n - 1)}
                        t = arm.body
                    continue
                for arm in t.arms:
                    if arm.ctor == v.ctor:
                        env = {**env, **dict(zip(arm.binders, v.args))}
                        t = arm.body
                        break
                else:
                    raise MatchError(f"no arm for {v.ctor!r}")
                continue
            if isinstance(t, App):
                args = tuple(self.eval(a, env, f, False) for a in t.args)
                h = t.head
                if h in PRIMITIVES:
                    return _prim(h, args)
                if h in self.prog.ctor_owner:
                    return ConV(self.prog.ctor_owner[h].name, h, args)
                if h == f.name:
                    if tail:
                        return _TailCall(args)
                    return self.call(h, args)
                return self.call(h, args)
            raise TypeError(f"not a term: {t!r}")


def eval_ref(prog, fname, args, fuel=1_000_000):
    """Call-by-value evaluation of ``fname`` on ``args`` (values or ints).

    ``fuel`` bounds the number of function entries and tail iterations.
    """
    args = tuple(NatV(a) if isinstance(a, int) else a for a in args)
    f = prog.fun(fname)
    if len(args) != f.arity:
        raise ArityError(f"{fname!r} expects {f.arity} arguments, got {len(args)}")
    return _RefEval(prog, fuel).call(fname, args)


# ---------------------------------------------------------------------------
# first-order instances of higher-order templates


class TemplateError(FrontendError):
    pass


def monomorphize_instance(template, concrete_fn, new_name, prog=None):
    """Instantiate the single function parameter of ``template`` with the
    first-order function ``concrete_fn`` and fold self-calls into
    ``new_name``. When ``prog`` is given the result is type-checked."""
    fparams = [i for i, (_, t) in enumerate(template.params) if isinstance(t, TFun)]
    if len(fparams) != 1:
        raise TemplateError(f"{template.name!r} must have exactly one function parameter")
    k = fparams[0]
    fname, ftype = template.params[k]
    if prog is not None:
        _check_instance_type(prog, concrete_fn, ftype)

    def go(t):
        if isinstance(t, Var):
            if t.name == fname:
                raise TemplateError(f"function parameter {fname!r} escapes")
            return t
        if isinstance(t, NatLit):
            return t
        if isinstance(t, Let):
            if t.name == fname:
                raise TemplateError(f"{fname!r} is shadowed")
            return Let(t.name, go(t.rhs), go(t.body))
        if isinstance(t, If):
            return If(go(t.cond), go(t.then), go(t.else_))
        if isinstance(t, Case):
            for arm in t.arms:
                if fname in arm.binders:
                    raise TemplateError(f"{fname!r} is shadowed")
            return Case(go(t.scrutinee), tuple(Arm(a.ctor, a.binders, go(a.body)) for a in t.arms))
        if isinstance(t, App):
            if t.head == fname:
                if len(t.args) != len(ftype.params):
                    raise TemplateError(f"{fname!r} is partially applied")
                return App(concrete_fn, tuple(go(a) for a in t.args))
            if t.head == template.name:
                passed = t.args[k]
                if passed != Var(fname):
                    raise TemplateError(f"self-call must pass {fname!r} unchanged")
                rest = t.args[:k] + t.args[k + 1:]
                return App(new_name, tuple(go(a) for a in rest))
            return App(t.head, tuple(go(a) for a in t.args))
        raise TypeError(f"not a term: {t!r}")

    params = template.params[:k] + template.params[k + 1:]
    inst = FunDef(new_name, params, template.return_type, go(template.body))
    if prog is not None:
        inst = _resolve_fun(prog, inst, Tok("lower", new_name, 0, 0))
        _typecheck_fun(prog, inst, Tok("lower", new_name, 0, 0))
    return inst


def _check_instance_type(prog, name, ftype):
    if name in _PRIM_SIGS:
        ps, r = _PRIM_SIGS[name]
    elif name in prog.fun_by_name:
        g = prog.fun_by_name[name]
        if g.is_template:
            raise TemplateError(f"{name!r} is itself higher-order")
        ps, r = tuple(t for _, t in g.params), g.return_type
    else:
        raise NameError_(f"unknown function {name!r}")
    u = _Unifier()
    tv = []
    for t in ps + (r,) + ftype.params + (ftype.result,):
        type_vars(t, tv)
    m = {v: u.fresh() for v in tv}
    want = TFun(tuple(subst_type(p, m) for p in ftype.params), subst_type(ftype.result, m))
    got = TFun(tuple(subst_type(p, m) for p in ps), subst_type(r, m))
    if not u.unify(want, got):
        raise TemplateError(f"{name!r} has type {show_type(TFun(ps, r))}, expected {show_type(ftype)}")


def add_instance(prog, inst):
    """Register a monomorphized instance in ``prog`` (after its callees)."""
    if inst.name in prog.fun_by_name:
        raise NameError_(f"duplicate function {inst.name!r}")
    prog.add_fun(inst)
    return inst
