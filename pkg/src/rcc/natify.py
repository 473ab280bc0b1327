"""Synthesis of nat-level functions from source functions, plus a randomized
check that the result computes the encoding of the source result."""

from dataclasses import dataclass, field
import random

from . import frontend as F
from . import holnat as H
from .natenc import (
    case_term,
    ctor_term,
    denatify,
    encoded,
    natify,
    random_value,
    selector_term,
)


class NatifyError(Exception):
    pass


# Scope entries describe how to reach a source variable at the nat level.
# ("arg", i) | ("let", level) | ("sel", arity, j, entry) | ("pred", entry)


class _Synth:
    def __init__(self, program, f):
        self.program = program
        self.f = f

    def ref(self, entry, depth):
        kind = entry[0]
        if kind == "arg":
            return H.Arg(entry[1])
        if kind == "let":
            return H.LetBound(depth - 1 - entry[1])
        if kind == "sel":
            _, a, j, base = entry
            return selector_term(a, j, self.ref(base, depth))
        if kind == "pred":
            return H.Call("sub", (self.ref(entry[1], depth), H.Num(1)))
        raise AssertionError(entry)

    def term(self, t, env, depth, types):
        if isinstance(t, F.NatLit):
            return H.Num(t.n)
        if isinstance(t, F.Var):
            return self.ref(env[t.name], depth)
        if isinstance(t, F.If):
            return H.If(
                self.term(t.cond, env, depth, types),
                self.term(t.then, env, depth, types),
                self.term(t.else_, env, depth, types),
            )
        if isinstance(t, F.Let):
            rhs = self.term(t.rhs, env, depth, types)
            env2 = {**env, t.name: ("let", depth)}
            types2 = {**types, t.name: self.type_of(t.rhs, types)}
            return H.Let(rhs, self.term(t.body, env2, depth + 1, types2))
        if isinstance(t, F.App):
            return self.app(t, env, depth, types)
        if isinstance(t, F.Case):
            return self.case(t, env, depth, types)
        raise NatifyError(f"unsupported term {t!r}")

    def app(self, t, env, depth, types):
        args = tuple(self.term(a, env, depth, types) for a in t.args)
        h = t.head
        if h in env:
            raise NatifyError(f"higher-order application of {h!r}; instantiate the template first")
        if h in F.PRIMITIVES:
            return H.Call(h, args)
        if h in self.program.ctor_owner:
            decl, _, _ = self.program.ctor(h)
            return ctor_term(encoded(decl), h, list(args))
        if h == self.f.name:
            return H.TailCall(args)
        return H.Call(h, args)

    def case(self, t, env, depth, types):
        scrut = t.scrutinee
        st = self.type_of(scrut, types)
        wrap = None
        if isinstance(scrut, F.Var) and env[scrut.name][0] in ("arg", "let"):
            base = env[scrut.name]
        else:
            # bind the scrutinee once so the selectors do not recompute it
            wrap = self.term(scrut, env, depth, types)
            base = ("let", depth)
            depth += 1
        x = self.ref(base, depth)
        if st == F.NAT:
            zero, suc = t.arms
            m = suc.binders[0]
            out = H.If(
                x,
                self.term(suc.body, {**env, m: ("pred", base)}, depth, {**types, m: F.NAT}),
                self.term(zero.body, env, depth, types),
            )
        else:
            decl = self.program.adt(st.name)
            e = encoded(decl)
            m = dict(zip(decl.type_params, st.args))
            arms = []
            for tag, (arm, c) in enumerate(zip(t.arms, decl.constructors), 1):
                a = c.arity
                env2 = dict(env)
                types2 = dict(types)
                for j, (b, bt) in enumerate(zip(arm.binders, c.arg_types), 1):
                    env2[b] = ("sel", a, j, base)
                    types2[b] = F.subst_type(bt, m)
                arms.append(self.term(arm.body, env2, depth, types2))
            out = case_term(e, x, arms)
        if wrap is not None:
            out = H.Let(wrap, out)
        return out

    def type_of(self, t, types):
        c = F._Checker(self.program, self.f, (0, 0))
        c_env = {**dict(self.f.params), **types}
        return c.u.resolve(c.infer(t, c_env))


def natify_fun(program, f):
    """Build the nat-level counterpart of source function ``f``."""
    if isinstance(f, str):
        f = program.fun(f)
    if f.is_template:
        raise NatifyError(f"{f.name!r} is higher-order; instantiate it first")
    v = F.check_tail(f)
    if v is not None:
        raise NatifyError(f"{f.name}: {v}")
    env = {name: ("arg", i) for i, name in enumerate(f.param_names)}
    types = dict(f.params)
    body = _Synth(program, f).term(f.body, env, 0, types)
    out = H.NatFunDef(f.name, f.arity, body)
    bad = H.validate_tail(body, f.arity)
    if bad is not None:
        raise NatifyError(f"{f.name}: {bad}")
    return out


def natify_program(program):
    """Nat-level counterparts of every first-order function, in order."""
    return H.NatProgram(natify_fun(program, f) for f in program.first_order_funs())


# ---------------------------------------------------------------------------
# relatedness oracle


@dataclass
class RelatednessReport:
    function: str
    samples: int
    passed: int = 0
    mismatches: list = field(default_factory=list)
    fuel_exhausted: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.mismatches and not self.fuel_exhausted

    def first_counterexample(self):
        return self.mismatches[0] if self.mismatches else None


def sample_args(program, f, rng, max_nat=8, max_size=8):
    return [random_value(program, t, rng, max_nat, max_size) for _, t in f.params]


def relatedness_check(program, f, f_n, samples=1000, seed=0, nat_env=None,
                      fuel=1_000_000, max_nat=8, max_size=8, sampler=None):
    """Compare ``f_n`` on encoded inputs against the encoded source result.

    ``sampler(program, f, rng)`` draws one argument list; by default each
    argument is drawn independently within ``max_nat`` and ``max_size``."""
    if isinstance(f, str):
        f = program.fun(f)
    if nat_env is None:
        nat_env = natify_program(program)
    env = H.NatProgram([d for d in nat_env if d.name != f_n.name] + [f_n]) if f_n.name in nat_env else nat_env
    rng = random.Random(seed)
    report = RelatednessReport(f.name, samples)
    for k in range(samples):
        if sampler is None:
            args = sample_args(program, f, rng, max_nat, max_size)
        else:
            args = sampler(program, f, rng)
        enc = [natify(program, t, a) for (_, t), a in zip(f.params, args)]
        try:
            want = natify(program, f.return_type, F.eval_ref(program, f.name, args, fuel))
            got = H.eval_nat(env, f_n, enc, fuel)
        except F.FuelExhausted:
            report.fuel_exhausted.append({"sample": k, "args": [F.show_value(a) for a in args]})
            continue
        if got == want:
            report.passed += 1
        else:
            try:
                decoded = F.show_value(denatify(program, f.return_type, got))
            except Exception:
                decoded = None
            report.mismatches.append({
                "sample": k,
                "args": [F.show_value(a) for a in args],
                "expected": want,
                "got": got,
                "expected_value": F.show_value(denatify(program, f.return_type, want)),
                "got_value": decoded,
            })
    return report
