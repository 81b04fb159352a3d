"""Command-line experiment runner.

    masnet run <config.ini> [--seed N] [--out-dir DIR] [--verbose]
    masnet sweep <config.ini> --axis (lambda|size|topology) --values V... [--out-dir DIR]
    masnet oracle <config.ini> [--out-dir DIR]
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import ConfigError, build_scenario, load_config, run_scenario, sweep


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", help="scenario INI file")
    p.add_argument("--out-dir", default=".", help="directory for CSV/JSON artifacts")
    p.add_argument("--verbose", action="store_true",
                   help="also dump alignment-buffer debug CSVs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="masnet",
        description="Distributed multi-agent LQR experiments over noisy networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario")
    _add_common(run_p)
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config's seed list with a single seed")

    sweep_p = sub.add_parser("sweep", help="sweep one axis over values")
    _add_common(sweep_p)
    sweep_p.add_argument("--axis", required=True, choices=("lambda", "size", "topology"))
    sweep_p.add_argument("--values", required=True, nargs="+")

    oracle_p = sub.add_parser("oracle", help="run the analytic Riccati oracle only")
    _add_common(oracle_p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        conf = load_config(args.config)
        if args.command == "run":
            overrides = {}
            if args.seed is not None:
                overrides = {"method": {"seeds": str(args.seed)}}
            scenario = build_scenario(conf, out_dir=args.out_dir, overrides=overrides)
            summary = run_scenario(scenario, verbose=args.verbose)
        elif args.command == "oracle":
            scenario = build_scenario(
                conf, out_dir=args.out_dir, overrides={"method": {"name": "opt"}}
            )
            summary = run_scenario(scenario, verbose=args.verbose)
        else:
            values = [v for v in args.values]
            summary = sweep(conf, args.axis, values, out_dir=args.out_dir,
                            verbose=args.verbose)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
