"""Command line entry point.

Verbs: ``run <spec>`` executes an experiment config, ``validate <spec>``
checks a config without computing, ``version`` prints the package
version.  Exit codes: 0 success, 1 invalid input, 2 computation
failure, 3 infeasible plan.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_experiment, validate_config
from .experiments import run_experiment
from .multiuav import InfeasiblePlanError

EXIT_OK = 0
EXIT_INVALID_INPUT = 1
EXIT_COMPUTATION_FAILED = 2
EXIT_INFEASIBLE = 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavcover",
        description="Plan aerial base station placement for indoor coverage "
        "of a high-rise building.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("spec", type=Path, help="experiment config file")
    run.add_argument("--output-dir", type=Path, default=None, help="override the output directory")
    run.add_argument("--seed", type=int, default=None, help="override the experiment seed")
    run.add_argument("--threads", type=int, default=1, help="parallel sweep points")
    run.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    val = sub.add_parser("validate", help="validate a config file without computing")
    val.add_argument("spec", type=Path, help="scenario or experiment config file")

    sub.add_parser("version", help="print the package version")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)

    if args.command == "version":
        print(f"uavcover {__version__}")
        return EXIT_OK

    if args.command == "validate":
        report = validate_config(args.spec)
        print(report)
        return EXIT_OK if report.ok else EXIT_INVALID_INPUT

    # run
    try:
        cfg = load_experiment(args.spec)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    try:
        files = run_experiment(
            cfg,
            output_dir=args.output_dir,
            seed=args.seed,
            threads=args.threads,
            render_figures=False if args.no_figures else None,
        )
    except InfeasiblePlanError as exc:
        print(f"infeasible plan: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ArithmeticError, ValueError, OSError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION_FAILED
    for path in files:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
