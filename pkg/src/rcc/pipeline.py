"""Running a source program through every compilation stage."""

from dataclasses import dataclass

from . import holnat as H
from .compile_imptc import compile_fun, normalize_seq, stdlib_primitives
from .imp import check_lang
from .inliner import inline_calls
from .natify import natify_fun
from .tail_elim import eliminate_recursion


@dataclass(frozen=True)
class Artifacts:
    """Every intermediate form of one function."""

    fun: object  # source FunDef
    nat: object  # NatFunDef
    imptc: object  # compiled IMP^TC
    imptc_norm: object  # after sequence normalisation
    impwc: object  # after tail-call elimination
    impw: object  # after inlining

    @property
    def name(self):
        return self.fun.name


class Pipeline:
    """Compiles the first-order functions of ``program`` in source order.

    Each compiled IMP^W program is registered so later functions can call
    it. ``hooks`` maps a stage name (``nat``, ``impwc``, ``impw``) to a
    function rewriting that stage's output, which is how seeded mutants are
    injected."""

    def __init__(self, program, hooks=None):
        self.program = program
        self.hooks = dict(hooks or {})
        self.registry = stdlib_primitives()
        self.nat_env = H.NatProgram()
        self.artifacts = {}
        for f in program.first_order_funs():
            self._build(f)

    def _hook(self, stage, value):
        h = self.hooks.get(stage)
        return h(value) if h else value

    def _build(self, f):
        nat = self._hook("nat", natify_fun(self.program, f))
        self.nat_env.add(nat)
        tc = compile_fun(nat, self.registry)
        check_lang(tc, "imptc")
        norm = normalize_seq(tc)
        wc = self._hook("impwc", eliminate_recursion(norm))
        check_lang(wc, "impwc")
        w = self._hook("impw", inline_calls(wc))
        check_lang(w, "impw")
        self.registry.register(f.name, f.arity, w)
        self.artifacts[f.name] = Artifacts(f, nat, tc, norm, wc, w)

    def __getitem__(self, name):
        return self.artifacts[name]

    def __contains__(self, name):
        return name in self.artifacts

    def names(self):
        return list(self.artifacts)
