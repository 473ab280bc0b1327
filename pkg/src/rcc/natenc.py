"""Encoding ADT values as naturals with the Cantor pairing function.

A constructor with 1-based tag ``i`` and arguments ``x1..xa`` is encoded as
``pair(i, 0)`` when it has no arguments, ``pair(i, x1)`` for one argument,
and ``pair(i, pair(x1, pair(x2, ... xa)))`` otherwise. ``Nat`` is encoded
as itself.
"""

from dataclasses import dataclass
from math import isqrt

from .frontend import NAT, ConV, NatV, TCon, subst_type


class EncodingError(ValueError):
    pass


def pair(a, b):
    s = a + b
    return s * (s + 1) // 2 + b


def unpair(n):
    w = (isqrt(8 * n + 1) - 1) // 2
    t = w * (w + 1) // 2
    b = n - t
    return w - b, b


def fst(n):
    return unpair(n)[0]


def snd(n):
    return unpair(n)[1]


@dataclass(frozen=True)
class EncodedAdt:
    decl: object

    @property
    def name(self):
        return self.decl.name

    @property
    def n_ctors(self):
        return len(self.decl.constructors)

    @property
    def ctor_tags(self):
        return {c.name: i for i, c in enumerate(self.decl.constructors, 1)}

    @property
    def ctor_arities(self):
        return {i: c.arity for i, c in enumerate(self.decl.constructors, 1)}

    def arity(self, tag):
        return self.decl.constructors[tag - 1].arity

    def tag_of(self, ctor):
        if isinstance(ctor, int):
            if not 1 <= ctor <= self.n_ctors:
                raise EncodingError(f"{self.name} has no constructor with tag {ctor}")
            return ctor
        return self.decl.tag(ctor)


def encoded(decl):
    return EncodedAdt(decl)


def encode_ctor(e, ctor, args):
    """Encode constructor ``ctor`` (tag or name) of ``e`` applied to naturals."""
    tag = e.tag_of(ctor)
    a = e.arity(tag)
    if len(args) != a:
        raise EncodingError(f"constructor {tag} of {e.name} takes {a} arguments, got {len(args)}")
    if a == 0:
        return pair(tag, 0)
    nest = args[-1]
    for x in reversed(args[:-1]):
        nest = pair(x, nest)
    return pair(tag, nest)


def selector(i, j, x):
    """The ``j``-th field (1-based) of an encoded arity-``i`` constructor."""
    if not 1 <= j <= i:
        raise EncodingError(f"selector index {j} out of range for arity {i}")
    for _ in range(j):
        x = snd(x)
    return fst(x) if j < i else x


def decode_ctor(e, n, lenient=False):
    """Split ``n`` into ``(tag, fields)``; raises on an out-of-range tag
    unless ``lenient``, which maps such tags to the last constructor."""
    tag, _ = unpair(n)
    if not 1 <= tag <= e.n_ctors:
        if not lenient:
            raise EncodingError(f"tag {tag} is not a constructor of {e.name}")
        tag = e.n_ctors
    a = e.arity(tag)
    return tag, [selector(a, j, n) for j in range(1, a + 1)]


def _field_types(program, t, tag):
    decl = program.adt(t.name)
    c = decl.constructors[tag - 1]
    m = dict(zip(decl.type_params, t.args))
    return [subst_type(a, m) for a in c.arg_types]


def natify(program, t, v):
    """Encode value ``v`` of type ``t``."""
    if t == NAT:
        if not isinstance(v, NatV):
            raise EncodingError(f"expected a Nat, got {v}")
        return v.n
    if not isinstance(v, ConV) or v.adt != t.name:
        raise EncodingError(f"expected a value of {t}, got {v}")
    e = encoded(program.adt(t.name))
    tag = e.tag_of(v.ctor)
    fields = _field_types(program, t, tag)
    return encode_ctor(e, tag, [natify(program, ft, x) for ft, x in zip(fields, v.args)])


def denatify(program, t, n, lenient=False):
    """Decode ``n`` as a value of type ``t`` (left inverse of :func:`natify`)."""
    if t == NAT:
        return NatV(n)
    decl = program.adt(t.name)
    tag, fields = decode_ctor(encoded(decl), n, lenient)
    ftypes = _field_types(program, t, tag)
    if lenient and n == 0 and any(ft != NAT for ft in ftypes):
        # every field of 0 is 0 again; stop at a constant constructor
        nullary = [i for i, c in enumerate(decl.constructors, 1) if c.arity == 0]
        if not nullary:
            raise EncodingError(f"0 has no finite lenient decoding as {decl.name}")
        tag, fields, ftypes = nullary[0], [], []
    args = tuple(denatify(program, ft, x, lenient) for ft, x in zip(ftypes, fields))
    return ConV(decl.name, decl.constructors[tag - 1].name, args)


def is_well_encoded(program, t, n):
    try:
        denatify(program, t, n)
    except EncodingError:
        return False
    return True


# ---------------------------------------------------------------------------
# NatTerm templates


def selector_term(i, j, x):
    """NatTerm for :func:`selector` applied to the term ``x``."""
    from . import holnat as H

    if not 1 <= j <= i:
        raise EncodingError(f"selector index {j} out of range for arity {i}")
    for _ in range(j):
        x = H.Call("snd", (x,))
    return H.Call("fst", (x,)) if j < i else x


def ctor_term(e, ctor, args):
    """NatTerm building the encoding of a constructor application.

    Folds to a single ``Num`` when every argument is a literal."""
    from . import holnat as H

    tag = e.tag_of(ctor)
    a = e.arity(tag)
    if len(args) != a:
        raise EncodingError(f"constructor {tag} of {e.name} takes {a} arguments, got {len(args)}")
    if all(isinstance(x, H.Num) for x in args):
        return H.Num(encode_ctor(e, tag, [x.n for x in args]))
    if a == 0:
        return H.Num(pair(tag, 0))
    nest = args[-1]
    for x in reversed(args[:-1]):
        nest = H.Call("pair", (x, nest))
    return H.Call("pair", (H.Num(tag), nest))


def case_term(e, x, arms):
    """Nested tag dispatch on the term ``x``; ``arms[i-1]`` is the branch for
    tag ``i`` and the last arm is taken without a test."""
    from . import holnat as H

    if len(arms) != e.n_ctors:
        raise EncodingError(f"{e.name} needs {e.n_ctors} arms, got {len(arms)}")
    out = arms[-1]
    for tag in range(e.n_ctors - 1, 0, -1):
        test = H.Call("eq", (H.Call("fst", (x,)), H.Num(tag)))
        out = H.If(test, arms[tag - 1], out)
    return out


def lower_case_shape(e):
    """The case combinator of ``e`` as a one-argument function whose arm
    ``i`` is ``Call("f<i>", selectors of x)``."""
    from . import holnat as H

    x = H.Arg(0)
    arms = []
    for tag in range(1, e.n_ctors + 1):
        a = e.arity(tag)
        arms.append(H.Call(f"f{tag}", tuple(selector_term(a, j, x) for j in range(1, a + 1))))
    return H.NatFunDef(f"case_{e.name}", 1, case_term(e, x, arms))


# ---------------------------------------------------------------------------
# random values


def random_value(program, t, rng, max_nat=8, max_size=8, size=None):
    """A random value of type ``t``.

    Recursive constructors are chosen until a budget of ``size`` nodes is
    spent (drawn uniformly from 0..max_size when not given), so a list gets
    exactly that length."""
    if size is None:
        size = rng.randint(0, max_size)
    return _gen(program, t, rng, max_nat, size)


def _gen(program, t, rng, max_nat, size):
    if t == NAT:
        return NatV(rng.randrange(max_nat))
    decl = program.adt(t.name)
    rec, base = [], []
    for tag, c in enumerate(decl.constructors, 1):
        fts = _field_types(program, t, tag)
        (rec if any(_mentions(program, ft, t.name) for ft in fts) else base).append(tag)
    if size <= 0 and base:
        tag = rng.choice(base)
    elif rec:
        tag = rng.choice(rec)
    else:
        tag = rng.choice(base)
    fts = _field_types(program, t, tag)
    rec_slots = [k for k, ft in enumerate(fts) if _mentions(program, ft, t.name)]
    budget = [0] * len(fts)
    for _ in range(max(size - 1, 0)):
        if rec_slots:
            budget[rng.choice(rec_slots)] += 1
    for k, ft in enumerate(fts):
        if k not in rec_slots and isinstance(ft, TCon) and ft != NAT:
            budget[k] = rng.randint(0, max(size - 1, 0))
    args = tuple(_gen(program, ft, rng, max_nat, b) for ft, b in zip(fts, budget))
    return ConV(decl.name, decl.constructors[tag - 1].name, args)


def _mentions(program, t, name, seen=None):
    if not isinstance(t, TCon) or t == NAT:
        return False
    if t.name == name:
        return True
    return any(_mentions(program, a, name) for a in t.args)
