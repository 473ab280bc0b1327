"""Bit-blasting IMP^W programs into IMP^- programs of width ``w``.

Every register ``r`` becomes ``w + 1`` bit registers: ``r#0`` is 1 iff the
value is nonzero and ``r#i`` (1 <= i <= w) holds bit ``i - 1``, least
significant first. Arithmetic goes through scratch operand registers in the
``%bb::`` namespace, which are all back at 0 after every assignment.

The blaster is written once against a small builder interface; one builder
produces :mod:`rcc.imp` commands, the other the flat arrays executed by
:mod:`rcc.impminus_vm`. Both yield the same program.
"""

from .imp import (
    Assign,
    AssignBit,
    Bin,
    Const,
    If,
    Reg,
    Seq,
    While,
    check_lang,
    maxconst,
    postorder,
)

SCRATCH = "%bb::"
CARRY = SCRATCH + "carry"
NONZERO = SCRATCH + "nz"
OPND_A = SCRATCH + "a"
OPND_B = SCRATCH + "b"


def bit_name(r, i):
    return f"{r}#{i}"


def split_bit_name(name):
    r, _, i = name.rpartition("#")
    return r, int(i)


class WidthError(ValueError):
    pass


class FlagError(ValueError):
    pass


def encode_state(s, w):
    """Bit-level image of ``s``; every value must be below ``2**w``."""
    if w < 1:
        raise WidthError("width must be at least 1")
    out = {}
    for r, v in s.items():
        if v >= 1 << w:
            raise WidthError(f"register {r!r} = {v} does not fit in {w} bits")
        out[bit_name(r, 0)] = 1 if v else 0
        for i in range(1, w + 1):
            out[bit_name(r, i)] = (v >> (i - 1)) & 1
    return out


def decode_state(bs, w, strict=True):
    """Inverse of :func:`encode_state`. In strict mode an inconsistent
    nonzero flag or a dirty scratch register raises :class:`FlagError`."""
    vals, flags = {}, {}
    for name, bit in bs.items():
        if name.startswith(SCRATCH):
            if strict and bit:
                raise FlagError(f"scratch register {name!r} left at 1")
            continue
        r, i = split_bit_name(name)
        if i == 0:
            flags[r] = bit
        elif i <= w:
            vals[r] = vals.get(r, 0) | (bit << (i - 1))
        else:
            raise WidthError(f"{name!r} is outside width {w}")
    out = {}
    for r in set(vals) | set(flags):
        v = vals.get(r, 0)
        if strict and flags.get(r, 0) != (1 if v else 0):
            raise FlagError(f"nonzero flag of {r!r} is {flags.get(r, 0)} but value is {v}")
        out[r] = v
    return out


def flag_consistent(bs, w, regs):
    for r in regs:
        v = any(bs.get(bit_name(r, i), 0) for i in range(1, w + 1))
        if bs.get(bit_name(r, 0), 0) != (1 if v else 0):
            return False
    return True


def required_width(p, s, n):
    """Least ``w`` with ``n < w`` and ``max(maxconst s, maxconst p) * 2**n < 2**w``."""
    m = max(maxconst(s), maxconst(p))
    return max(n + 1, n + m.bit_length(), 1)


# ---------------------------------------------------------------------------
# builders
#
# Registers are passed to builders as ``(name, index)``: index None for a
# plain register, an int for a bit of a blasted register, or a marker for
# "the current bit" inside a template given to ``rep``.


class CommandBuilder:
    """Builds :mod:`rcc.imp` commands; repeats are unrolled."""

    def __init__(self):
        self.memo = {}

    def _make(self, key, build):
        node = self.memo.get(key)
        if node is None:
            node = self.memo[key] = build()
        return node

    @staticmethod
    def name(reg):
        r, i = reg
        return r if i is None else bit_name(r, i)

    def bit(self, reg, b):
        r = self.name(reg)
        return self._make(("bit", r, b), lambda: AssignBit(r, b))

    def seq(self, x, y):
        return self._make(("seq", id(x), id(y)), lambda: Seq(x, y))

    def if_(self, reg, x, y):
        r = self.name(reg)
        return self._make(("if", r, id(x), id(y)), lambda: If(r, x, y))

    def while_(self, reg, x):
        r = self.name(reg)
        return self._make(("while", r, id(x)), lambda: While(r, x))

    def rep(self, make, lo, hi):
        items = [make(i) for i in range(lo, hi + 1)]
        out = items[-1]
        for x in reversed(items[:-1]):
            out = self.seq(x, out)
        return out

    def result(self, root):
        return root


_CARRY = (CARRY, None)
_NZ = (NONZERO, None)


class _Blaster:
    def __init__(self, builder, w, mutation=None):
        if w < 1:
            raise WidthError("width must be at least 1")
        self.b = builder
        self.w = w
        self.mutation = mutation
        self.memo = {}

    def cached(self, key, build):
        node = self.memo.get(key)
        if node is None:
            node = self.memo[key] = build()
        return node

    def chain(self, items):
        out = items[-1]
        for x in reversed(items[:-1]):
            out = self.b.seq(x, out)
        return out

    def copy_bit(self, src, dst):
        b = self.b
        return b.if_(src, b.bit(dst, 1), b.bit(dst, 0))

    def const_bits(self, r, n, lo):
        """Bits ``lo..w`` of ``r`` set to those of ``n``."""
        top = min(max(n.bit_length(), lo - 1), self.w)
        items = [self.b.bit((r, i), (n >> (i - 1)) & 1) for i in range(lo, top + 1)]
        if top < self.w:
            items.append(self.b.rep(lambda ix: self.b.bit((r, ix), 0), top + 1, self.w))
        return self.chain(items)

    # operands

    def load(self, atom, slot):
        """Copy bits 1..w of ``atom`` into the scratch operand ``slot``."""
        def build():
            if isinstance(atom, Const):
                return self.const_bits(slot, atom.n, 1)
            return self.b.rep(lambda ix: self.copy_bit((atom.r, ix), (slot, ix)), 1, self.w)
        return self.cached(("load", atom, slot), build)

    def clear_operands(self):
        def build():
            return self.chain([self.b.rep(lambda ix: self.b.bit((s, ix), 0), 1, self.w)
                               for s in (OPND_A, OPND_B)])
        return self.cached(("clear",), build)

    def finish(self):
        def build():
            return self.chain([self.b.bit(_CARRY, 0), self.b.bit(_NZ, 0)])
        return self.cached(("finish",), build)

    # circuits

    def _leaf(self, ri, bit, carry=None):
        items = [self.b.bit(ri, bit)]
        if bit:
            items.append(self.b.bit(_NZ, 1))
        if carry is not None:
            items.append(self.b.bit(_CARRY, carry))
        return self.chain(items)

    def full_add(self, r, i):
        b = self.b
        ai, bi, ri = (OPND_A, i), (OPND_B, i), (r, i)
        leaf = self._leaf
        # the "swap_carry" mutation miswires the carry generated by 1 + 1
        generate = 0 if self.mutation == "swap_carry" else 1
        return b.if_(
            ai,
            b.if_(bi,
                  b.if_(_CARRY, leaf(ri, 1), leaf(ri, 0, generate)),
                  b.if_(_CARRY, leaf(ri, 0), leaf(ri, 1))),
            b.if_(bi,
                  b.if_(_CARRY, leaf(ri, 0), leaf(ri, 1)),
                  b.if_(_CARRY, leaf(ri, 1, 0), leaf(ri, 0))),
        )

    def full_sub(self, r, i):
        # the carry register holds the borrow
        b = self.b
        ai, bi, ri = (OPND_A, i), (OPND_B, i), (r, i)
        leaf = self._leaf
        return b.if_(
            ai,
            b.if_(bi,
                  b.if_(_CARRY, leaf(ri, 1), leaf(ri, 0)),
                  b.if_(_CARRY, leaf(ri, 0, 0), leaf(ri, 1))),
            b.if_(bi,
                  b.if_(_CARRY, leaf(ri, 0), leaf(ri, 1, 1)),
                  b.if_(_CARRY, leaf(ri, 1), leaf(ri, 0))),
        )

    def set_flag(self, r):
        return self.copy_bit(_NZ, (r, 0))

    def adder(self, r):
        def build():
            return self.chain([self.b.rep(lambda ix: self.full_add(r, ix), 1, self.w),
                               self.set_flag(r), self.finish()])
        return self.cached(("add", r), build)

    def subtractor(self, r):
        def build():
            clamp = self.chain([self.b.bit((r, 0), 0),
                                self.b.rep(lambda ix: self.b.bit((r, ix), 0), 1, self.w)])
            return self.chain([self.b.rep(lambda ix: self.full_sub(r, ix), 1, self.w),
                               self.b.if_(_CARRY, clamp, self.set_flag(r)), self.finish()])
        return self.cached(("sub", r), build)

    # expressions and programs

    def aexp(self, a, r):
        def build():
            if isinstance(a, Const):
                n = a.n & ((1 << self.w) - 1)
                return self.b.seq(self.b.bit((r, 0), 1 if n else 0), self.const_bits(r, n, 1))
            if isinstance(a, Reg):
                return self.b.seq(self.copy_bit((a.r, 0), (r, 0)),
                                  self.b.rep(lambda ix: self.copy_bit((a.r, ix), (r, ix)), 1, self.w))
            circuit = self.adder(r) if a.op == "+" else self.subtractor(r)
            return self.chain([self.load(a.lhs, OPND_A), self.load(a.rhs, OPND_B),
                               circuit, self.clear_operands()])
        return self.cached(("aexp", a, r), build)

    def program(self, p):
        check_lang(p, "impw")
        out = {}
        for c in postorder(p):
            if isinstance(c, Assign):
                out[id(c)] = self.aexp(c.a, c.r)
            elif isinstance(c, Seq):
                out[id(c)] = self.b.seq(out[id(c.first)], out[id(c.second)])
            elif isinstance(c, If):
                out[id(c)] = self.b.if_((c.r, 0), out[id(c.then)], out[id(c.else_)])
            elif isinstance(c, While):
                out[id(c)] = self.b.while_((c.r, 0), out[id(c.body)])
        return out[id(p)]


def blast_aexp(a, w, target, mutation=None):
    """IMP^- program storing the value of ``a`` into the bits of ``target``."""
    if not isinstance(a, (Bin, Const, Reg)):
        raise TypeError(f"not an expression: {a!r}")
    return _Blaster(CommandBuilder(), w, mutation).aexp(a, target)


def blast_program(p, w, mutation=None):
    """IMP^- program simulating the IMP^W program ``p`` at width ``w``."""
    return _Blaster(CommandBuilder(), w, mutation).program(p)


def blast_to_vm(p, w, mutation=None):
    """Like :func:`blast_program` but emitted as a compact VM program whose
    per-bit circuits are repeat templates. Runs take the same steps and
    reach the same states as the unrolled program."""
    from .impminus_vm import ArrayBuilder

    b = ArrayBuilder(w)
    return b.result(_Blaster(b, w, mutation).program(p))


def run_blasted(vm, s, fuel=10**12, strict=True):
    """Run a blasted VM program on the encoding of the word state ``s`` and
    decode the result; equivalent to ``decode_state(run_vm(vm,
    encode_state(s, w)))`` without building per-bit dictionaries.
    Returns ``(state, steps)``."""
    import numpy as np

    from .impminus_vm import run_mem

    w = vm.width
    mem = np.zeros(len(vm.regs), dtype=np.uint8)
    out = {}
    nbytes = (w + 7) // 8
    for r, v in s.items():
        if v >= 1 << w:
            raise WidthError(f"register {r!r} = {v} does not fit in {w} bits")
        base = vm.blocks.get(r)
        if base is None:
            out[r] = v  # never touched by the program
            continue
        bits = np.unpackbits(np.frombuffer(v.to_bytes(nbytes, "little"), dtype=np.uint8), bitorder="little")
        mem[base + 1:base + w + 1] = bits[:w]
        mem[base] = 1 if v else 0
    steps = run_mem(vm, mem, fuel)
    for r, base in vm.blocks.items():
        if r.startswith(SCRATCH):
            if strict and mem[base:base + w + 1].any():
                raise FlagError(f"scratch register {r!r} left dirty")
            continue
        bits = mem[base + 1:base + w + 1]
        v = int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")
        if strict and mem[base] != (1 if v else 0):
            raise FlagError(f"nonzero flag of {r!r} is {mem[base]} but value is {v}")
        out[r] = v
    if strict:
        for name in (CARRY, NONZERO):
            i = vm.reg_index.get(name)
            if i is not None and mem[i]:
                raise FlagError(f"scratch register {name!r} left at 1")
    return out, steps


def blast_aexp_to_vm(a, w, target, mutation=None):
    from .impminus_vm import ArrayBuilder

    b = ArrayBuilder(w)
    return b.result(_Blaster(b, w, mutation).aexp(a, target))
