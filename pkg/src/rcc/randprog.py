"""Random terminating programs and states for property checks."""

from .imp import RECURSE, Assign, Bin, Call, Const, If, Reg, Seq, While, check_lang


def _regs(n, prefix="r"):
    return [f"{prefix}{i}" for i in range(n)]


def random_state(rng, regs, max_val=16):
    return {r: rng.randrange(max_val) for r in regs}


def random_atom(rng, regs, max_const):
    if rng.random() < 0.3:
        return Const(rng.randrange(max_const + 1))
    return Reg(rng.choice(regs))


def random_aexp(rng, regs, max_const=8):
    k = rng.random()
    if k < 0.2:
        return Const(rng.randrange(max_const + 1))
    if k < 0.4:
        return Reg(rng.choice(regs))
    op = rng.choice("+-")
    return Bin(op, random_atom(rng, regs, max_const), random_atom(rng, regs, max_const))


def random_assign(rng, regs, max_const=8):
    return Assign(rng.choice(regs), random_aexp(rng, regs, max_const))


class _WhileGen:
    """Random IMP^W commands. Every loop counts down a counter of its own
    that the body never writes, so programs always terminate."""

    def __init__(self, rng, regs, max_const, max_iter):
        self.rng = rng
        self.regs = regs
        self.max_const = max_const
        self.max_iter = max_iter
        self.loops = 0

    def cmd(self, depth):
        rng = self.rng
        k = rng.random()
        if depth <= 0 or k < 0.35:
            return random_assign(rng, self.regs, self.max_const)
        if k < 0.65:
            return Seq(self.cmd(depth - 1), self.cmd(depth - 1))
        if k < 0.85:
            return If(rng.choice(self.regs), self.cmd(depth - 1), self.cmd(depth - 1))
        c = f"%loop{self.loops}"
        self.loops += 1
        body = Seq(self.cmd(depth - 1), Assign(c, Bin("-", Reg(c), Const(1))))
        return Seq(Assign(c, Const(rng.randrange(self.max_iter + 1))), While(c, body))


def random_impw(rng, n_regs=4, depth=4, max_const=8, max_iter=4, regs=None):
    p = _WhileGen(rng, regs or _regs(n_regs), max_const, max_iter).cmd(depth)
    return check_lang(p, "impw")


def random_imptc(rng, n_regs=4, depth=3, max_const=8, fuel_reg="%k", callees=()):
    """A random IMP^TC program whose RECURSE commands all sit in tail
    position behind a test of ``fuel_reg``, which is decremented right
    before each RECURSE and written nowhere else. Runs terminate for any
    start state. ``callees`` are IMP^W programs that may be called."""
    regs = _regs(n_regs)

    def straight(d):
        k = rng.random()
        if d <= 0 or k < 0.4:
            return random_assign(rng, regs, max_const)
        if k < 0.6 and callees:
            callee, ret = rng.choice(callees)
            return Call(callee, ret)
        if k < 0.8:
            return Seq(straight(d - 1), straight(d - 1))
        return If(rng.choice(regs), straight(d - 1), straight(d - 1))

    def tail(d):
        k = rng.random()
        if d <= 0 or k < 0.25:
            return straight(0)
        if k < 0.55:
            again = Seq(Assign(fuel_reg, Bin("-", Reg(fuel_reg), Const(1))), RECURSE)
            return If(fuel_reg, Seq(straight(d - 1), again), straight(d - 1))
        if k < 0.8:
            return Seq(straight(d - 1), tail(d - 1))
        return If(rng.choice(regs), tail(d - 1), tail(d - 1))

    return check_lang(tail(depth), "imptc")


def random_callee(rng, name, n_regs=3, depth=3, max_const=8):
    """A small IMP^W callee writing ``name.ret`` from its own registers."""
    regs = [f"{name}.r{i}" for i in range(n_regs)]
    body = random_impw(rng, depth=depth, max_const=max_const, regs=regs)
    ret = f"{name}.ret"
    return Seq(body, Assign(ret, Reg(regs[0]))), ret
