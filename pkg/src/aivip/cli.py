"""Command-line interface.

Exit status: 0 on success, 1 on a domain error (bad graph, weak
instrument, visible edge, unreadable data), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .ancestral_iv import IvRoles, conditioning_set_mag, conditioning_set_pag
from .ci import CiError
from .data import DataError, Dataset
from .estimator import EstimationError, EstimatorSpec, aivip, tsls, tslsciv, two_stage, wald_estimate
from .graph import GraphError, format_graph, format_path, read_graph
from .learner import LearnerConfig, learn_pag
from .projection import dag_to_mag
from .separation import m_separated
from .simulation import GROUPS, METHODS, NOISE_STRUCTURES, VARIANTS, SimSpec, generate, run_benchmark

DOMAIN_ERRORS = (GraphError, DataError, CiError, EstimationError, OSError)


def _names(text: str) -> list[str]:
    return [t for t in text.replace(",", " ").split() if t]


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in _names(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _alpha(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return v


def _num(x, precision: int) -> str:
    if isinstance(x, bool) or isinstance(x, int):
        return str(x)
    return f"{x:.{precision}g}"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _learner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=_alpha, default=0.05, help="CI test level (default 0.05)")
    p.add_argument("--max-cond-size", type=int, default=None, help="cap on conditioning-set size")
    p.add_argument("--possible-dsep", action="store_true", help="run the Possible-D-SEP stage (exponential on wide data unless --max-cond-size is set)")
    p.add_argument("--conservative", action="store_true", help="leave ambiguous colliders unoriented")


def _learner_config(a) -> LearnerConfig:
    return LearnerConfig(a.alpha, a.max_cond_size, a.possible_dsep, a.conservative)


def _roles_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--treatment", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--iv", required=True)


def cmd_simulate(a) -> int:
    spec = SimSpec(a.group, a.n, a.seed, a.variant, a.noise_covariates, a.noise_structure, a.noise_corr)
    generate(spec, keep_latent=a.keep_latent).to_csv(a.out, precision=a.precision)
    return 0


def cmd_learn(a) -> int:
    pag = learn_pag(Dataset.from_csv(a.data), _learner_config(a))
    _emit(format_graph(pag), a.out)
    return 0


def cmd_discover(a) -> int:
    g = read_graph(a.graph)
    roles = IvRoles(a.treatment, a.outcome, a.iv)
    kind = a.kind
    if kind == "auto":
        kind = "pag" if g.has_circles() else "mag"
    z = conditioning_set_pag(g, roles) if kind == "pag" else conditioning_set_mag(g, roles)
    print(" ".join(z))
    return 0


def cmd_estimate(a) -> int:
    data = Dataset.from_csv(a.data)
    roles = IvRoles(a.treatment, a.outcome, a.iv)
    spec = EstimatorSpec(first_stage=a.first_stage, interactions=tuple(_names(a.interactions or "")))
    if a.z is not None:
        res = two_stage(data, roles, _names(a.z), spec)
    elif a.method == "aivip":
        res = aivip(data, roles, _learner_config(a), spec)
    elif a.method == "tsls":
        res = tsls(data, roles, spec)
    elif a.method == "tslsciv":
        res = tslsciv(data, roles, spec)
    else:
        res = wald_estimate(data, roles)
    p = a.precision
    print(f"method={res.method}")
    print(f"beta_hat={_num(res.beta_hat, p)}")
    print(f"z={','.join(res.z_used)}")
    print(f"sigma_sw={_num(res.sigma_sw, p)}")
    if res.sigma_sy is not None:
        print(f"sigma_sy={_num(res.sigma_sy, p)}")
    for k in sorted(res.diagnostics):
        print(f"{k}={_num(res.diagnostics[k], p)}")
    return 0


def cmd_benchmark(a) -> int:
    report = run_benchmark(_names(a.groups), a.sizes, _names(a.methods), a.reps, a.seed, a.variant,
                           _learner_config(a), a.jobs, a.noise_covariates, a.noise_structure)
    _emit(report.to_text(a.precision), a.out)
    for r in report.rows:
        if r.failed:
            print(f"warning: {r.group},{r.n},{r.method}: {r.failed} of {r.failed + r.reps} replications failed "
                  f"(first: {r.errors[0]})", file=sys.stderr)
    return 0


def cmd_project(a) -> int:
    dag = read_graph(a.graph)
    _emit(format_graph(dag_to_mag(dag, _names(a.latent or ""))), a.out)
    return 0


def cmd_msep(a) -> int:
    g = read_graph(a.graph)
    res = m_separated(g, a.x, a.y, _names(a.z or ""))
    print("SEPARATED" if res.separated else f"CONNECTED {format_path(g, res.witness)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aivip", description="Ancestral-IV conditioning-set discovery and effect estimation.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=_positive, default=6, help="significant digits in numeric output (default 6)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("simulate", parents=[common], help="draw a synthetic benchmark dataset")
    p.add_argument("--group", choices=GROUPS, default="I")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=VARIANTS, default="consistent")
    p.add_argument("--noise-covariates", type=int, default=20)
    p.add_argument("--noise-structure", choices=NOISE_STRUCTURES, default="chain")
    p.add_argument("--noise-corr", type=float, default=0.2)
    p.add_argument("--keep-latent", action="store_true", help="also write latent columns")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("learn", parents=[common], help="learn a PAG from a CSV dataset")
    p.add_argument("--data", required=True)
    _learner_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("discover", parents=[common], help="conditioning set from a MAG or PAG file")
    p.add_argument("--graph", required=True)
    _roles_flags(p)
    p.add_argument("--kind", choices=("auto", "mag", "pag"), default="auto")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("estimate", parents=[common], help="estimate the effect of treatment on outcome")
    p.add_argument("--data", required=True)
    _roles_flags(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--z", help="explicit conditioning set, comma separated (empty for none)")
    group.add_argument("--method", choices=("aivip", "tsls", "tslsciv", "wald"), default="aivip")
    p.add_argument("--first-stage", choices=("linear", "logistic"), default="linear")
    p.add_argument("--interactions", help="columns of Z interacting with the fitted treatment")
    _learner_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("benchmark", parents=[common], help="bias matrix over groups, sizes and methods")
    p.add_argument("--groups", default="I,II")
    p.add_argument("--sizes", type=_ints, default=[2000, 5000, 10000])
    p.add_argument("--methods", default="aivip,tsls,tslsciv", help=f"subset of {','.join(METHODS)}")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=VARIANTS, default="consistent")
    p.add_argument("--jobs", type=_positive, default=1, help="worker processes; results do not depend on it")
    p.add_argument("--noise-covariates", type=int, default=20)
    p.add_argument("--noise-structure", choices=NOISE_STRUCTURES, default="chain")
    _learner_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("project", parents=[common], help="project a DAG onto its observed nodes")
    p.add_argument("--graph", required=True)
    p.add_argument("--latent", help="latent nodes, comma separated")
    p.add_argument("--out")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("msep", parents=[common], help="m-separation query on a DAG or MAG")
    p.add_argument("--graph", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--z", help="conditioning nodes, comma separated")
    p.set_defaults(func=cmd_msep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"aivip {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # invalid flag combinations caught by the library (e.g. an unknown method)
        print(f"aivip {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
