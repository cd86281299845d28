"""Command-line runner for the figure experiments.

Exit codes: 0 success, 2 aliasing-guard abort, 3 fit or bracketing failure,
4 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .analysis import AnalysisError
from .experiments import EXPERIMENTS, RUNNERS, ConfigError, load_config
from .spectrum import AliasingError

EXIT_OK, EXIT_ALIASING, EXIT_FIT, EXIT_CONFIG = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickedrotor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=RUNNERS[name].__doc__.splitlines()[0])
        p.add_argument("--config", metavar="PATH", help="flat key = value config file")
        p.add_argument("--out", metavar="DIR", help="output directory (default: runs)")
        p.add_argument("--seed", type=int, metavar="INT", help="master seed")
        p.add_argument("--long-runs", action="store_true",
                       help="allow runs on the 2**21 grid (hbar = 0.01)")
        p.add_argument("--workers", type=int, default=1, metavar="INT",
                       help="worker processes for independent ensembles")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.experiment, out=args.out, master_seed=args.seed)
        summary = RUNNERS[args.experiment](cfg, long_runs=args.long_runs, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AliasingError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ALIASING
    except AnalysisError as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return EXIT_FIT if summary.get("failures") else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
