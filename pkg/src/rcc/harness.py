"""Differential testing across every compilation stage, and blow-up fits.

For each sampled input, the source reference interpreter, the nat-level
function and the IMP^TC, IMP^W/C, IMP^W and IMP^- programs are run and
their results compared exactly (after encoding the source result and
decoding the bit-level state).
"""

from dataclasses import asdict, dataclass, field
import json
import random

from . import frontend as F
from . import holnat as H
from .bitblast import FlagError, WidthError, blast_to_vm, required_width, run_blasted
from .compile_imptc import arg_reg, ret_reg
from .imp import DEFAULT_COST, canonical, dump, run_imptc, run_impw, run_impwc, size
from .mutations import hooks_for
from .natenc import denatify, natify, random_value
from .natify import sample_args
from .pipeline import Pipeline
from .symstate import BinS, Lit, Read, SymState, evaluate, normalize_sym, sym_exec

STAGES = ("nat", "imptc", "impwc", "impw", "impminus")


@dataclass
class StageReport:
    stage: str
    function: str
    cases: int = 0
    mismatches: int = 0
    fuel_exhausted: int = 0
    skipped: int = 0
    steps: list = field(default_factory=list)
    width: int = None
    counterexample: dict = None

    @property
    def ok(self):
        return self.mismatches == 0 and self.fuel_exhausted == 0

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Profile:
    """Bounds on sampled inputs: nats below ``max_nat`` and at most
    ``max_size`` recursive constructors per value, or across all the
    arguments together when ``joint`` is set."""

    max_nat: int = 4
    max_size: int = 1
    joint: bool = False

    def sample(self, program, f, rng):
        if not self.joint:
            return sample_args(program, f, rng, self.max_nat, self.max_size)
        sizes = [0] * len(f.params)
        adts = [k for k, (_, t) in enumerate(f.params) if t != F.NAT]
        for _ in range(rng.randint(0, self.max_size) if adts else 0):
            sizes[rng.choice(adts)] += 1
        return [random_value(program, t, rng, self.max_nat, size=n)
                for (_, t), n in zip(f.params, sizes)]


# Bit-level runs need a width above the IMP^W step count, and the step
# count grows with the encoded (Cantor-nested) input sizes, so the
# full-stack profile allows a single list cell across all arguments.
# Encodings square in size with every cell, so even the nat level bounds
# the total number of cells (a 16-cell list is already megabits).
FULL_STACK = Profile(4, 1, joint=True)
NAT_LEVEL = Profile(8, 8, joint=True)


def _case_rng(seed, name):
    return random.Random(f"{seed}:{name}")


def _show(program, t, n):
    try:
        return F.show_value(denatify(program, t, n))
    except Exception:
        return None


class _FunctionRun:
    """Runs the sampled cases of one function through every stage."""

    def __init__(self, pipe, name, cost, fuel, width, blast_mutation):
        self.pipe = pipe
        self.program = pipe.program
        self.art = pipe[name]
        self.name = name
        self.cost = cost
        self.fuel = fuel
        self.width = width
        self.blast_mutation = blast_mutation
        self.reports = {st: StageReport(st, name) for st in STAGES}

    def _programs(self, stage):
        a = self.art
        if stage == "nat":
            return F.show_fun(a.fun), H.dump_program([a.nat]).strip()
        return {"imptc": a.imptc, "impwc": a.impwc, "impw": a.impw, "impminus": a.impw}[stage]

    def _mismatch(self, stage, k, args, want, got, extra=None):
        rep = self.reports[stage]
        rep.mismatches += 1
        if rep.counterexample is None:
            t = self.art.fun.return_type
            prog = self._programs(stage)
            cex = {
                "case": k,
                "args": [F.show_value(a) for a in args],
                "expected": want,
                "got": got,
                "expected_value": _show(self.program, t, want),
                "got_value": _show(self.program, t, got) if isinstance(got, int) else None,
                "program": prog[1] if stage == "nat" else dump(prog),
            }
            if extra:
                cex.update(extra)
            rep.counterexample = cex

    def _fuel(self, stage, k, args):
        rep = self.reports[stage]
        rep.fuel_exhausted += 1
        if rep.counterexample is None:
            rep.counterexample = {"case": k, "args": [F.show_value(a) for a in args],
                                  "error": "fuel exhausted"}

    def run_case(self, k, args):
        """Run the non-bit stages; returns the IMP^W start and final state
        and step count when that stage succeeded."""
        f, art, prog = self.art.fun, self.art, self.program
        enc = [natify(prog, t, a) for (_, t), a in zip(f.params, args)]
        try:
            want = natify(prog, f.return_type, F.eval_ref(prog, f.name, args, self.fuel))
        except F.FuelExhausted:
            for st in STAGES:
                self.reports[st].skipped += 1
            return None
        ret = ret_reg(f.name)
        s0 = {arg_reg(f.name, i): v for i, v in enumerate(enc)}

        rep = self.reports["nat"]
        rep.cases += 1
        try:
            got = H.eval_nat(self.pipe.nat_env, art.nat, enc, self.fuel)
            if got != want:
                self._mismatch("nat", k, args, want, got)
        except F.FuelExhausted:
            self._fuel("nat", k, args)

        runners = (
            ("imptc", lambda s: run_imptc(art.imptc, art.imptc, s, self.cost, self.fuel)),
            ("impwc", lambda s: run_impwc(art.impwc, s, self.cost, self.fuel)),
            ("impw", lambda s: run_impw(art.impw, s, self.cost, self.fuel)),
        )
        impw_out = None
        for st, runner in runners:
            rep = self.reports[st]
            rep.cases += 1
            try:
                out = runner(s0)
            except F.FuelExhausted:
                self._fuel(st, k, args)
                continue
            rep.steps.append(out.steps)
            got = out.state.get(ret, 0)
            if got != want:
                self._mismatch(st, k, args, want, got)
            if st == "impw":
                impw_out = (k, args, s0, out, want)
        return impw_out

    def run_bits(self, done):
        """Blast the IMP^W program and run every finished case at the
        width policy's width."""
        rep = self.reports["impminus"]
        if self.width == "none":
            rep.skipped += len(done)
            return
        p = self.art.impw
        ret = ret_reg(self.art.name)
        vms = {}
        for k, args, s0, out, want in done:
            need = required_width(p, s0, out.steps)
            w = need if self.width == "auto" else int(self.width)
            if w < need:
                rep.skipped += 1
                continue
            rep.width = max(rep.width or 0, w)
            if w not in vms:
                vms[w] = blast_to_vm(p, w, mutation=self.blast_mutation)
            rep.cases += 1
            # the bit-level run takes about 3-5 steps per n * w; allow 10x that
            fuel = 50 * (out.steps + 1) * (w + 1)
            try:
                dec, steps = run_blasted(vms[w], s0, fuel)
            except F.FuelExhausted:
                self._fuel("impminus", k, args)
                continue
            except (FlagError, WidthError) as e:
                self._mismatch("impminus", k, args, want, None, {"error": str(e), "width": w})
                continue
            rep.steps.append(steps)
            got = dec.get(ret, 0)
            if got != want or canonical(dec) != canonical(out.state):
                self._mismatch("impminus", k, args, want, got, {"width": w})


def difftest(program, functions=None, cases=200, seed=0, width="auto", cost=DEFAULT_COST,
             profile=FULL_STACK, mutation=None, fuel=10_000_000, pipeline=None):
    """Differentially test ``functions`` of ``program`` on ``cases`` random
    inputs each. Returns one :class:`StageReport` per (function, stage).

    ``width`` is ``"auto"`` (each case at its own required width),
    ``"none"`` (skip the bit level) or a fixed integer, in which case
    inputs whose run needs more bits are skipped. ``mutation`` names a
    seeded mutant from :mod:`rcc.mutations`."""
    if isinstance(program, str):
        program = F.parse_program(program)
    if cases <= 0:
        return []
    hooks, blast_mutation = hooks_for(mutation)
    if pipeline is None:
        pipeline = Pipeline(program, hooks)
    if functions is None:
        functions = pipeline.names()
    reports = []
    for name in functions:
        fr = _FunctionRun(pipeline, name, cost, fuel, width, blast_mutation)
        rng = _case_rng(seed, name)
        done = []
        for k in range(cases):
            args = profile.sample(program, fr.art.fun, rng)
            res = fr.run_case(k, args)
            if res is not None:
                done.append(res)
        fr.run_bits(done)
        reports.extend(fr.reports[st] for st in STAGES)
    return reports


def mismatch_total(reports):
    return sum(r.mismatches + r.fuel_exhausted for r in reports)


# ---------------------------------------------------------------------------
# blow-up measurement


@dataclass
class Fit:
    stage: str
    function: str
    points: int
    coefficient: float
    max_residual: float  # largest |y - c x| / (c x)
    max_ratio: float  # largest y / x

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def fit_through_origin(xs, ys):
    """Ordinary least-squares ``y = c x``; returns ``(c, max relative
    residual |y - c x| / (c x))``. A single point gives ``c = y / x``."""
    if not xs:
        raise ValueError("no points to fit")
    c = sum(x * y for x, y in zip(xs, ys)) / sum(x * x for x in xs)
    res = max(abs(y - c * x) / (c * x) for x, y in zip(xs, ys)) if c > 0 else float("inf")
    return c, res


def _fit(stage, name, xs, ys):
    c, res = fit_through_origin(xs, ys)
    return Fit(stage, name, len(xs), c, res, max(y / x for x, y in zip(xs, ys)))


def bench_blowup(program, functions=None, cases=20, seed=0, profile=FULL_STACK,
                 fuel=10_000_000, pipeline=None):
    """Fit inlined steps against ``n * |p|`` (``n`` the IMP^W/C steps,
    ``|p|`` the IMP^W/C program size) and bit-level steps against
    ``n * w`` (``n`` the IMP^W steps). One fit per (stage, function)."""
    if isinstance(program, str):
        program = F.parse_program(program)
    if pipeline is None:
        pipeline = Pipeline(program)
    if functions is None:
        functions = pipeline.names()
    fits = []
    for name in functions:
        art = pipeline[name]
        f = art.fun
        rng = _case_rng(seed, name)
        size_wc = size(art.impwc)
        rows = []
        for _ in range(cases):
            args = profile.sample(program, f, rng)
            s0 = {arg_reg(name, i): natify(program, t, a) for i, ((_, t), a) in enumerate(zip(f.params, args))}
            wc = run_impwc(art.impwc, s0, fuel=fuel)
            w_out = run_impw(art.impw, s0, fuel=fuel)
            rows.append((s0, wc.steps, w_out.steps))
        fits.append(_fit("inline", name, [n * size_wc for _, n, _ in rows], [m for _, _, m in rows]))
        xs, ys, vms = [], [], {}
        for s0, _, m in rows:
            w = required_width(art.impw, s0, m)
            if w not in vms:
                vms[w] = blast_to_vm(art.impw, w)
            _, steps = run_blasted(vms[w], s0)
            xs.append(m * w)
            ys.append(steps)
        fits.append(_fit("bitblast", name, xs, ys))
    return fits


def width_sweep(p, s, widths=(8, 16, 32)):
    """Bit-level step counts of ``p`` from ``s`` at each width."""
    out = []
    for w in widths:
        _, steps = run_blasted(blast_to_vm(p, w), s)
        out.append((w, steps))
    return out


__all__ = [
    "BinS", "FULL_STACK", "Fit", "Lit", "NAT_LEVEL", "Profile", "Read", "STAGES", "StageReport",
    "SymState", "bench_blowup", "difftest", "evaluate", "fit_through_origin", "mismatch_total",
    "normalize_sym", "sym_exec", "width_sweep",
]
