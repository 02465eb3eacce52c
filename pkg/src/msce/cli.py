"""Command-line entry point: ``msce run``, ``msce dps``, ``msce --validate``."""
from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config
from .experiment import run_experiment, write_dps_report

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _parser():
    parser = argparse.ArgumentParser(
        prog="msce",
        description="Inverse problems for time-series valued simulators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--validate", metavar="CONFIG", help="check a config file and exit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run a replication study")
    run.add_argument("config")
    run.add_argument("--jobs", type=int, default=None, help="parallel replications")
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--no-timing", action="store_true",
                     help="leave wall_ms empty so result files are byte-reproducible")

    dps = sub.add_parser("dps", help="build the discretization-point set only")
    dps.add_argument("config")
    dps.add_argument("--out", default=None)
    return parser


def _load(path, out=None):
    try:
        return load_config(path, out)
    except ConfigError as exc:
        for line in exc.problems:
            print(line, file=sys.stderr)
        return None


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")

    if args.validate:
        cfg = _load(args.validate)
        if cfg is None:
            return EXIT_CONFIG
        print(f"{args.validate}: ok")
        return EXIT_OK
    if args.command is None:
        _parser().print_usage(sys.stderr)
        return EXIT_CONFIG

    cfg = _load(args.config, args.out)
    if cfg is None:
        return EXIT_CONFIG
    try:
        if args.command == "dps":
            result = write_dps_report(cfg, Path(cfg.out))
            print(f"DPS {result.dps} (k={result.k}); report in {cfg.out}")
            return EXIT_OK
        summary = run_experiment(cfg, jobs=args.jobs, timing=not args.no_timing)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{summary['rows']} rows, {summary['failures']} failed; results in {summary['out']}")
    if summary["rows"] == 0:
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
