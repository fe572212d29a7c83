"""Command line front end.

Exit codes: 0 success, 1 negative finding (not stable, no SPE),
2 input error, 3 solver failure.  JSON goes to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import generators
from .client import SolverError, solve_exact, solve_iterative
from .facility import (ApproximationViolation, PlacementBudgetExceeded, SolverConfig,
                       check_stability, compute_approx_spe, find_spe)
from .instance import InstanceError, format_number, read_instance, save_instance
from .uniform import DynamicsLimitExceeded, potential, trace_summary

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


class InputError(Exception):
    pass


def _emit(payload) -> None:
    sys.stdout.write(json.dumps(payload, indent=1, sort_keys=False))
    sys.stdout.write("\n")


def _instance(args):
    try:
        return read_instance(args.instance)
    except OSError as exc:
        raise InputError(f"cannot read instance: {exc}") from None


def _placement(inst, text: str):
    return inst.check_placement([p.strip() for p in text.split(",") if p.strip()])


def _config(args) -> SolverConfig:
    kw = {"jobs": getattr(args, "jobs", 1)}
    if getattr(args, "method", None):
        kw["method"] = args.method
    if getattr(args, "tol", None) is not None:
        kw["tol"] = args.tol
    return SolverConfig(**kw)


def cmd_solve(args) -> int:
    inst = _instance(args)
    placement = _placement(inst, args.placement)
    config = _config(args)
    if args.method == "exact":
        rep = solve_exact(inst, placement)
    else:
        rep = solve_iterative(inst, placement, tol=config.tol)
    _emit(rep.to_dict(inst, decimal=args.decimal))
    return EXIT_OK


def cmd_check_spe(args) -> int:
    inst = _instance(args)
    placement = _placement(inst, args.placement)
    rep = check_stability(inst, placement, args.alpha, _config(args))
    _emit(rep.to_dict(inst, decimal=args.decimal))
    return EXIT_OK if rep.stable else EXIT_NEGATIVE


def cmd_find_spe(args) -> int:
    inst = _instance(args)
    config = _config(args)
    hit = find_spe(inst, args.alpha, config, budget=args.budget)
    if hit is None:
        _emit({"alpha": args.alpha, "spe": None})
        return EXIT_NEGATIVE
    rep = check_stability(inst, hit, args.alpha, config)
    _emit({"alpha": args.alpha, "spe": list(hit), "report": rep.to_dict(inst, decimal=args.decimal)})
    return EXIT_OK


def cmd_approx_spe(args) -> int:
    if args.epsilon <= 0:
        raise InputError("epsilon must be positive")
    inst = _instance(args)
    if args.start == "random":
        rng = random.Random(args.seed)
        start = tuple(rng.choice(inst.ids) for _ in range(inst.k))
    else:
        start = _placement(inst, args.start)
    try:
        placement, rep, trace = compute_approx_spe(inst, args.epsilon, start, _config(args))
    except ApproximationViolation as exc:
        _emit({"error": str(exc), "witness": exc.report.to_dict(inst, decimal=args.decimal)})
        print(f"approximation check failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    trace_path = None
    if args.trace:
        Path(args.trace).write_text(trace.to_jsonl())
        trace_path = str(args.trace)
    _emit({"placement": list(placement), "epsilon": args.epsilon, "alpha": str(rep.alpha),
           "trace": trace_path, "dynamics": trace_summary(trace, args.decimal),
           "report": rep.to_dict(inst, decimal=args.decimal)})
    return EXIT_OK if rep.stable else EXIT_NEGATIVE


def cmd_potential(args) -> int:
    inst = _instance(args)
    placement = _placement(inst, args.placement)
    _emit({"placement": list(placement), "potential": format_number(potential(inst, placement), args.decimal)})
    return EXIT_OK


def _read_graph(path):
    try:
        return generators.load_graph(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read graph: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed graph JSON: {exc}") from None


def cmd_generate(args) -> int:
    mapping = None
    fam = args.family
    if fam == "gstar":
        inst = generators.gen_gstar()
    elif fam in ("fig1-left", "fig1-right"):
        inst = generators.gen_fig1(fam.split("-")[1])
    elif fam == "lowerbound":
        inst = generators.gen_lowerbound(args.t)
    elif fam == "is-reduction":
        if not args.graph:
            raise InputError("is-reduction needs --graph")
        inst, mapping = generators.gen_is_reduction(_read_graph(args.graph), args.k)
    elif fam == "maxcut-reduction":
        if not args.graph:
            raise InputError("maxcut-reduction needs --graph")
        inst, _, mapping = generators.gen_maxcut_reduction(_read_graph(args.graph), wiring=args.wiring)
    else:
        inst = generators.gen_random(args.n, args.edge_prob, (args.weight_min, args.weight_max), args.k,
                                     args.seed)
    out = {"family": fam, "nodes": inst.n, "edges": len(inst.edges), "facilities": inst.k}
    if args.out:
        save_instance(inst, args.out)
        out["instance"] = str(args.out)
        if mapping is not None:
            map_path = args.mapping or str(Path(args.out).with_suffix(".mapping.json"))
            Path(map_path).write_text(json.dumps(mapping, indent=1) + "\n")
            out["mapping"] = map_path
    else:
        out["instance"] = inst.to_dict()
        if mapping is not None:
            out["mapping"] = mapping
    _emit(out)
    return EXIT_OK


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flg", description="Two-sided facility location game engine")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, placement=True):
        p.add_argument("--instance", required=True)
        if placement:
            p.add_argument("--placement", required=True, help="comma separated node ids, one per facility")
        p.add_argument("--decimal", action="store_true", help="render rationals as decimals")

    p = sub.add_parser("solve", help="client equilibrium for a placement")
    common(p)
    p.add_argument("--method", choices=("exact", "iterative"), default="exact")
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check-spe", help="(approximate) SPE check of a placement")
    common(p)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_check_spe)

    p = sub.add_parser("find-spe", help="exhaustive search for an (approximate) SPE")
    common(p, placement=False)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--budget", type=_positive_int, default=10**6, help="maximum number of placements")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_find_spe)

    p = sub.add_parser("approx-spe", help="uniform dynamics plus (3 + 2 eps) verification")
    common(p, placement=False)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--start", default="random", help='comma separated placement or "random"')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", default=None, help="write the dynamics as JSON lines here")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_approx_spe)

    p = sub.add_parser("potential", help="exact potential of the uniform game")
    common(p)
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("generate", help="write an instance family")
    p.add_argument("family", choices=("gstar", "fig1-left", "fig1-right", "lowerbound", "is-reduction",
                                      "maxcut-reduction", "random"))
    p.add_argument("--out", default=None)
    p.add_argument("--mapping", default=None)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--graph", default=None)
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--wiring", choices=("parallel", "crossed"), default="parallel")
    p.add_argument("--n", type=_positive_int, default=6)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--weight-min", type=int, default=0)
    p.add_argument("--weight-max", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, InstanceError, PlacementBudgetExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, DynamicsLimitExceeded) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
