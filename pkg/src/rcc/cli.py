"""Command-line interface: ``rcc <verb> ...``."""

import argparse
import json
import sys

from . import frontend as F
from . import holnat as H
from . import imp
from .bitblast import blast_program, required_width
from .harness import FULL_STACK, Profile, bench_blowup, difftest, mismatch_total
from .mutations import MUTANTS
from .natenc import denatify, natify
from .natify import natify_fun
from .pipeline import Pipeline


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _program(path):
    return F.parse_program(_read(path))


def _cost(path):
    return imp.CostModel.load(path) if path else imp.DEFAULT_COST


def _width(text):
    if text in ("auto", "none"):
        return text
    return int(text)


def _emit(obj):
    print(json.dumps(obj, sort_keys=True))


def cmd_parse(args):
    print(F.show_program(_program(args.file)), end="")
    return 0


def cmd_natify(args):
    prog = _program(args.file)
    print(H.dump_program([natify_fun(prog, prog.fun(args.function))]), end="")
    return 0


def cmd_compile(args):
    prog = _program(args.file)
    pipe = Pipeline(prog)
    art = pipe[args.function]
    if args.to != "impminus":
        p = {"imptc": art.imptc_norm if args.normalized else art.imptc,
             "impwc": art.impwc, "impw": art.impw}[args.to]
        print(imp.dump(p))
        return 0
    if args.width == "auto":
        if not args.state:
            raise SystemExit("--width auto needs --state to measure the step count")
        s = imp.state_from_json(_read(args.state))
        n = imp.run_impw(art.impw, s, _cost(args.cost_model), args.fuel).steps
        w = required_width(art.impw, s, n)
    else:
        w = int(args.width)
    print(imp.dump(blast_program(art.impw, w)))
    return 0


def cmd_run(args):
    p = imp.parse(_read(args.program))
    s = imp.state_from_json(_read(args.state)) if args.state else {}
    out = imp.run(args.lang, p, s, _cost(args.cost_model), args.fuel)
    _emit({"state": imp.canonical(out.state) if args.canonical else out.state, "steps": out.steps})
    return 0


def cmd_difftest(args):
    prog = _program(args.file)
    profile = Profile(args.max_nat, args.max_size, args.joint)
    reports = difftest(prog, args.function or None, args.cases, args.seed, _width(args.width),
                       _cost(args.cost_model), profile, args.mutation, args.fuel)
    for r in reports:
        d = r.to_dict()
        if not args.steps:
            steps = d.pop("steps")
            d["max_steps"] = max(steps) if steps else None
        _emit(d)
    return 0 if mismatch_total(reports) == 0 else 1


def cmd_bench(args):
    prog = _program(args.file)
    profile = Profile(args.max_nat, args.max_size, args.joint)
    fits = bench_blowup(prog, args.function or None, args.cases, args.seed, profile, args.fuel)
    for f in fits:
        print(f.to_json())
    for stage in ("inline", "bitblast"):
        rows = [f for f in fits if f.stage == stage]
        if rows:
            _emit({"stage": stage, "corpus_max_ratio": max(f.max_ratio for f in rows),
                   "max_residual": max(f.max_residual for f in rows)})
    return 0


def cmd_encode(args):
    prog = _program(args.file)
    t = F.parse_type(args.type, prog)
    print(natify(prog, t, F.parse_value(args.value, prog)))
    return 0


def cmd_decode(args):
    prog = _program(args.file)
    t = F.parse_type(args.type, prog)
    print(F.show_value(denatify(prog, t, int(args.number), lenient=args.lenient)))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="rcc", description=__doc__)
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("parse", help="parse, check and pretty-print a program")
    p.add_argument("file")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("natify", help="emit the nat-level function in IR text form")
    p.add_argument("file")
    p.add_argument("-f", "--function", required=True)
    p.set_defaults(run=cmd_natify)

    for verb in ("compile", "lower"):
        p = sub.add_parser(verb, help="emit the program of one stage as an s-expression")
        p.add_argument("file")
        p.add_argument("-f", "--function", required=True)
        p.add_argument("--to", choices=("imptc", "impwc", "impw", "impminus"), required=True)
        p.add_argument("--width", default="auto", help="bit width for impminus, or 'auto'")
        p.add_argument("--state", help="JSON word state used by --width auto")
        p.add_argument("--normalized", action="store_true", help="imptc after sequence normalisation")
        p.add_argument("--cost-model")
        p.add_argument("--fuel", type=int, default=10_000_000)
        p.set_defaults(run=cmd_compile)

    p = sub.add_parser("run", help="run an IMP program")
    p.add_argument("program")
    p.add_argument("--lang", choices=("imptc", "impwc", "impw", "impminus"), required=True)
    p.add_argument("--state")
    p.add_argument("--cost-model")
    p.add_argument("--fuel", type=int, default=10_000_000)
    p.add_argument("--canonical", action="store_true", help="omit zero registers")
    p.set_defaults(run=cmd_run)

    for verb, fn, cases in (("difftest", cmd_difftest, 200), ("bench", cmd_bench, 20)):
        p = sub.add_parser(verb)
        p.add_argument("file")
        p.add_argument("-f", "--function", action="append", help="restrict to this function (repeatable)")
        p.add_argument("--cases", type=int, default=cases)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-nat", type=int, default=FULL_STACK.max_nat)
        p.add_argument("--max-size", type=int, default=FULL_STACK.max_size)
        p.add_argument("--per-arg", dest="joint", action="store_false",
                       help="bound list sizes per argument rather than in total")
        p.add_argument("--fuel", type=int, default=10_000_000)
        if verb == "difftest":
            p.add_argument("--width", default="auto", help="'auto', 'none' or a fixed width")
            p.add_argument("--cost-model")
            p.add_argument("--mutation", choices=sorted(MUTANTS))
            p.add_argument("--steps", action="store_true", help="include per-case step counts")
        p.set_defaults(run=fn)

    p = sub.add_parser("encode", help="encode a value as a natural")
    p.add_argument("file")
    p.add_argument("--type", required=True)
    p.add_argument("value")
    p.set_defaults(run=cmd_encode)

    p = sub.add_parser("decode", help="decode a natural as a value")
    p.add_argument("file")
    p.add_argument("--type", required=True)
    p.add_argument("number")
    p.add_argument("--lenient", action="store_true", help="clamp out-of-range tags")
    p.set_defaults(run=cmd_decode)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (F.FrontendError, imp.LanguageError, ValueError, KeyError) as e:
        print(f"rcc: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
