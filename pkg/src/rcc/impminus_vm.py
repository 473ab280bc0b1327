"""Fast executor for IMP^- programs.

A program is flattened into parallel arrays (one entry per distinct node)
and run by an explicit-stack loop, compiled with numba when it is
available. Step counts follow the same rules as the reference interpreter
in :mod:`rcc.imp`: bit assignment 1, Seq and If +1, While 1 when the
condition is 0 and +2 per iteration otherwise.

Bit-blasted programs repeat the same circuit once per bit. Rather than
unrolling, the flat form has a repeat node ``REP(child, lo, hi)`` standing
for the chain ``child@lo ; child@lo+1 ; ... ; child@hi``, where the
template ``child`` addresses registers relative to the current index.
Execution order and step counts are exactly those of the unrolled chain,
so the program stays linear in ``|p|`` instead of ``|p| * w``.
"""

from dataclasses import dataclass

import numpy as np

from .frontend import FuelExhausted
from .imp import AssignBit, If, Seq, While, postorder

BIT, SEQ, IF, WHILE, REP, BIT_REL, IF_REL = range(7)

# index marker for registers addressed relative to the enclosing repeat
REL = "rel"

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None


def _name(r, i):
    return r if i is None else f"{r}#{i}"


class ArrayBuilder:
    """Builder emitting nodes straight into flat arrays (hash-consed).

    Registers are given as ``(name, index)``: ``index`` None for a plain
    register, an int for bit ``index`` of a blasted register, or
    :data:`REL` inside a repeat template. Blasted registers get a
    contiguous block of ``width + 1`` slots."""

    def __init__(self, width=0):
        self.width = width
        self.kind, self.a, self.b, self.c = [], [], [], []
        self.need = []  # stack slots needed to run each node
        self.has_rep = []
        self.regs = []
        self.reg_index = {}
        self.blocks = {}
        self.memo = {}

    def _slot(self, name):
        i = self.reg_index.get(name)
        if i is None:
            i = self.reg_index[name] = len(self.regs)
            self.regs.append(name)
        return i

    def _block(self, r):
        base = self.blocks.get(r)
        if base is None:
            base = self.blocks[r] = len(self.regs)
            for i in range(self.width + 1):
                name = _name(r, i)
                if name in self.reg_index:
                    raise ValueError(f"register {name!r} already allocated")
                self.reg_index[name] = len(self.regs)
                self.regs.append(name)
        return base

    def reg(self, reg):
        """Slot number and relative flag of ``reg``."""
        r, i = reg
        if i is None:
            return self._slot(r), False
        if i == REL:
            return self._block(r), True
        if not 0 <= i <= self.width:
            raise ValueError(f"bit {i} of {r!r} is outside width {self.width}")
        return self._block(r) + i, False

    def _node(self, key, a, b, c, need, rep=False):
        node = self.memo.get(key)
        if node is None:
            node = self.memo[key] = len(self.kind)
            self.kind.append(key[0])
            self.a.append(a)
            self.b.append(b)
            self.c.append(c)
            self.need.append(need)
            self.has_rep.append(rep)
        return node

    def bit(self, reg, v):
        slot, rel = self.reg(reg)
        k = BIT_REL if rel else BIT
        return self._node((k, slot, v), slot, v, 0, 1)

    def seq(self, x, y):
        return self._node((SEQ, x, y), x, y, 0, max(1 + self.need[x], self.need[y]),
                          self.has_rep[x] or self.has_rep[y])

    def if_(self, reg, x, y):
        slot, rel = self.reg(reg)
        k = IF_REL if rel else IF
        return self._node((k, slot, x, y), slot, x, y, max(self.need[x], self.need[y], 1),
                          self.has_rep[x] or self.has_rep[y])

    def while_(self, reg, x):
        slot, rel = self.reg(reg)
        if rel:
            raise ValueError("loop conditions cannot be relative")
        return self._node((WHILE, slot, x), slot, x, 0, 1 + self.need[x], self.has_rep[x])

    def rep(self, make, lo, hi):
        """The chain ``make(lo) ; ... ; make(hi)`` as a single repeat node."""
        if lo > hi:
            raise ValueError("empty repeat")
        child = make(REL)
        if self.has_rep[child]:
            raise ValueError("repeat templates cannot nest")
        return self._node((REP, child, lo, hi), child, lo, hi, 1 + self.need[child], True)

    def result(self, root):
        return VMProgram(
            np.array(self.kind, dtype=np.int8),
            np.array(self.a, dtype=np.int64),
            np.array(self.b, dtype=np.int64),
            np.array(self.c, dtype=np.int64),
            root,
            tuple(self.regs),
            dict(self.reg_index),
            self.need[root] + 1,
            dict(self.blocks),
            self.width,
        )


@dataclass(frozen=True, eq=False)
class VMProgram:
    kind: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    root: int
    regs: tuple
    reg_index: dict
    stack_size: int
    blocks: dict = None  # blasted register -> first slot of its block
    width: int = 0

    @property
    def n_nodes(self):
        return len(self.kind)


def flatten(p):
    """Flatten an IMP^- command into a :class:`VMProgram`."""
    b = ArrayBuilder()
    ids = {}
    for c in postorder(p):
        if isinstance(c, AssignBit):
            ids[id(c)] = b.bit((c.r, None), c.bit)
        elif isinstance(c, Seq):
            ids[id(c)] = b.seq(ids[id(c.first)], ids[id(c.second)])
        elif isinstance(c, If):
            ids[id(c)] = b.if_((c.r, None), ids[id(c.then)], ids[id(c.else_)])
        elif isinstance(c, While):
            ids[id(c)] = b.while_((c.r, None), ids[id(c.body)])
        else:
            raise TypeError(f"{type(c).__name__} is not an IMP^- command")
    return b.result(ids[id(p)])


def _exec_py(kind, a, b, c, root, mem, fuel, snode, sidx):
    # a stack entry is (node, index); a negative node -m-1 resumes repeat m
    steps = 0
    snode[0] = root
    sidx[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = snode[sp]
        i = sidx[sp]
        if node < 0:
            m = -node - 1
            if i < c[m]:
                steps += 1
                snode[sp] = node
                sidx[sp] = i + 1
                snode[sp + 1] = a[m]
                sidx[sp + 1] = i
                sp += 2
            else:
                snode[sp] = a[m]
                sidx[sp] = i
                sp += 1
            if steps > fuel:
                return -1
            continue
        k = kind[node]
        if k == BIT:
            mem[a[node]] = b[node]
            steps += 1
        elif k == BIT_REL:
            mem[a[node] + i] = b[node]
            steps += 1
        elif k == SEQ:
            steps += 1
            snode[sp] = b[node]
            sidx[sp] = i
            snode[sp + 1] = a[node]
            sidx[sp + 1] = i
            sp += 2
        elif k == IF:
            steps += 1
            snode[sp] = b[node] if mem[a[node]] else c[node]
            sidx[sp] = i
            sp += 1
        elif k == IF_REL:
            steps += 1
            snode[sp] = b[node] if mem[a[node] + i] else c[node]
            sidx[sp] = i
            sp += 1
        elif k == REP:
            snode[sp] = -node - 1
            sidx[sp] = b[node]
            sp += 1
        else:
            if mem[a[node]]:
                steps += 2
                snode[sp] = node
                sidx[sp] = i
                snode[sp + 1] = b[node]
                sidx[sp + 1] = i
                sp += 2
            else:
                steps += 1
        if steps > fuel:
            return -1
    return steps


_exec = njit(cache=True, nogil=True)(_exec_py) if njit is not None else _exec_py


def run_mem(vm, mem, fuel=10**12):
    """Run ``vm`` on the slot array ``mem`` in place; returns the steps."""
    snode = np.zeros(vm.stack_size + 1, dtype=np.int64)
    sidx = np.zeros(vm.stack_size + 1, dtype=np.int64)
    steps = _exec(vm.kind, vm.a, vm.b, vm.c, vm.root, mem, fuel, snode, sidx)
    if steps < 0:
        raise FuelExhausted(f"step budget {fuel} exhausted")
    return int(steps)


def run_vm(vm, bs, fuel=10**12):
    """Run ``vm`` from bit state ``bs``; returns ``(final state, steps)``."""
    mem = np.zeros(len(vm.regs), dtype=np.uint8)
    for name, v in bs.items():
        if v not in (0, 1):
            raise ValueError(f"register {name!r} holds non-bit {v!r}")
        i = vm.reg_index.get(name)
        if i is not None:
            mem[i] = v
    steps = run_mem(vm, mem, fuel)
    out = dict(bs)
    for name, v in zip(vm.regs, mem.tolist()):
        out[name] = v
    return out, steps
