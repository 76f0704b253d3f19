"""Command-line entry points.

Subcommands: ``run`` executes a scenario config and writes report CSVs,
``learn`` fits loss coefficients to an observation file, ``oracle finite``
answers the exact finite-set question for the same file, and ``report``
regenerates the summary for an existing report directory.

Exit codes: 0 on success, 1 on scenario/runtime errors, 2 on configuration
or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .harness import emit_report, load_config, rewrite_summary, run_scenario
from .learnloss import default_epsilon, learn_loss
from .losscore import CostParams, Hypercube, read_observations_jsonl
from .oracle import FiniteBilevelInstance, optimal_lambda_finite


def _parse_feasible(raw: str) -> Hypercube:
    """Comma-separated per-coordinate ranges: 'lo:hi' or a pinned 'value'."""
    lo, hi = [], []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(":")
        if len(pieces) == 1:
            v = float(pieces[0])
            lo.append(v)
            hi.append(v)
        elif len(pieces) == 2:
            lo.append(float(pieces[0]))
            hi.append(float(pieces[1]))
        else:
            raise ValueError(f"bad range {part!r}")
    if not lo:
        raise ValueError("empty feasible specification")
    return Hypercube(np.array(lo), np.array(hi))


def _read_observations(path):
    with open(path) as fp:
        observations = read_observations_jsonl(fp)
    if not observations:
        raise ValueError(f"no observations in {path}")
    return observations


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_scenario(config)
        emit_report(report, args.out)
    except Exception as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1
    print(f"report written to {args.out}")
    return 0


def _cmd_learn(args) -> int:
    try:
        feasible = _parse_feasible(args.feasible)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        observations = _read_observations(args.observations)
        if args.epsilon == "auto":
            eps = default_epsilon(observations)
        else:
            eps = float(args.epsilon)
        result = learn_loss(observations, feasible,
                            CostParams(epsilon=eps, alpha_min=args.alpha_min))
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(result.to_json())
    return 0


def _cmd_oracle_finite(args) -> int:
    try:
        feasible = _parse_feasible(args.feasible)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        observations = _read_observations(args.observations)
        lam, ve = optimal_lambda_finite(
            FiniteBilevelInstance(tuple(observations), feasible)
        )
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"lambda": lam.tolist(), "achieved_ve": ve}))
    return 0


def _cmd_report(args) -> int:
    try:
        text = rewrite_summary(args.dir)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lossforge",
        description="learn linear training losses from observations of "
                    "trained models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario config file")
    p_run.add_argument("config", help="path to the scenario config (INI)")
    p_run.add_argument("--out", default="report",
                       help="output directory for report CSVs")
    p_run.set_defaults(fn=_cmd_run)

    p_learn = sub.add_parser("learn", help="fit loss coefficients to a "
                                           "JSON-lines observation file")
    p_learn.add_argument("observations")
    p_learn.add_argument("--feasible", required=True,
                         help="per-coordinate 'lo:hi' ranges, comma separated"
                              " (a single value pins the coordinate)")
    p_learn.add_argument("--epsilon", default="0",
                         help="gradient-term weight, or 'auto'")
    p_learn.add_argument("--alpha-min", type=float, default=1e-6)
    p_learn.set_defaults(fn=_cmd_learn)

    p_oracle = sub.add_parser("oracle", help="exact ground-truth queries")
    oracle_sub = p_oracle.add_subparsers(dest="oracle_command", required=True)
    p_finite = oracle_sub.add_parser(
        "finite", help="optimal coefficients over a finite observation set")
    p_finite.add_argument("observations")
    p_finite.add_argument("--feasible", required=True)
    p_finite.set_defaults(fn=_cmd_oracle_finite)

    p_report = sub.add_parser("report",
                              help="regenerate summary.csv for a report dir")
    p_report.add_argument("dir")
    p_report.set_defaults(fn=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
