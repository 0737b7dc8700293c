"""Command-line front end: ``nexus-opt run | compare | front-dump``."""

from __future__ import annotations

import argparse
import sys

from .harness import ExperimentConfig, cmd_compare, cmd_front_dump, cmd_run, load_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nexus-opt",
        description=(
            "Run, compare, and export many-objective optimization experiments "
            "on the food-energy-water allocation problem."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute seeded runs and write artifacts")
    p_run.add_argument("--config", help="TOML config file")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--seed", type=int, help="base seed")
    p_run.add_argument("--runs", type=int, help="runs per variant")
    p_run.add_argument("--budget", type=int, help="evaluations per run")
    p_run.add_argument("--population", type=int, help="population size")
    p_run.add_argument(
        "--variant",
        action="append",
        help="variant to run (repeatable; default: all four)",
    )
    p_run.add_argument("--hv", choices=("exact", "mc"), help="force the HV method")
    p_run.add_argument("--mc-samples", type=int, help="Monte Carlo HV sample count")
    p_run.add_argument("--workers", type=int, help="parallel run workers")
    p_run.add_argument(
        "--save-decisions",
        action="store_true",
        help="persist decision vectors next to the fronts",
    )

    p_cmp = sub.add_parser("compare", help="tabulate results across directories")
    p_cmp.add_argument("directories", nargs="+", help="experiment output directories")
    p_cmp.add_argument("--champion", help="column the markers compare against")
    p_cmp.add_argument("--level", type=float, help="significance level")
    p_cmp.add_argument("--hv", choices=("exact", "mc"), help="force the HV method")
    p_cmp.add_argument("--mc-samples", type=int, help="Monte Carlo HV sample count")

    p_dump = sub.add_parser("front-dump", help="export one run's final front")
    p_dump.add_argument("directory", help="experiment output directory")
    p_dump.add_argument("--variant", help="select the run's variant")
    p_dump.add_argument("--seed", type=int, help="select the run's seed")
    p_dump.add_argument("--format", choices=("csv", "json"), default="csv")
    p_dump.add_argument("--out", help="output file (default: inside the directory)")
    p_dump.add_argument(
        "--decisions", action="store_true", help="append decision columns"
    )
    p_dump.add_argument(
        "--normalized",
        action="store_true",
        help="scale objectives into the recorded reference box",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config) if args.config else ExperimentConfig()
            if args.out is not None:
                config.out_dir = args.out
            if args.seed is not None:
                config.seed = args.seed
            if args.runs is not None:
                config.runs = args.runs
            if args.budget is not None:
                config.budget = args.budget
            if args.population is not None:
                config.population = args.population
            if args.variant:
                config.variants = tuple(args.variant)
            if args.hv is not None:
                config.hv_method = args.hv
            if args.mc_samples is not None:
                config.mc_samples = args.mc_samples
            if args.workers is not None:
                config.workers = args.workers
            if args.save_decisions:
                config.save_decisions = True
            config.validate()
            cmd_run(config)
        elif args.command == "compare":
            cmd_compare(
                args.directories,
                champion=args.champion,
                level=args.level,
                hv_method=args.hv,
                mc_samples=args.mc_samples,
            )
        elif args.command == "front-dump":
            path = cmd_front_dump(
                args.directory,
                variant=args.variant,
                seed=args.seed,
                fmt=args.format,
                out_path=args.out,
                include_decisions=args.decisions,
                normalized=args.normalized,
            )
            print(path)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
