# coding: utf-8
"""Command-line entry point

    python -m pybpmf run <config> [--workers N] [--out DIR]
    python -m pybpmf summarize <results> [--csv PATH]
    python -m pybpmf check

Exit status is 0 on success, 2 for configuration errors and 3 for I/O errors.
"""
import argparse
import logging
import os
import sys

from .config import load_config
from .errors import ConfigInvalid, ConfigParse, MalformedResults
from .harness import run_sweep, summarize, write_summary

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

TESTS_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.realpath(__file__))), "tests")


def build_parser():
    parser = argparse.ArgumentParser(prog="pybpmf", description="Hybrid BP/MF MIMO-OFDM receiver simulations")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug diagnostics")
    verbs = parser.add_subparsers(dest="verb", required=True)

    run = verbs.add_parser("run", help="run a Monte-Carlo sweep")
    run.add_argument("config", help="key-value configuration file")
    run.add_argument("--workers", type=int, default=1, help="worker processes")
    run.add_argument("--out", default=".", help="output directory")

    summary = verbs.add_parser("summarize", help="aggregate a results file")
    summary.add_argument("results", help="results.jsonl written by 'run'")
    summary.add_argument("--csv", help="output CSV path (stdout when omitted)")

    check = verbs.add_parser("check", help="run the test suite (source checkout only)")
    check.add_argument("--slow", action="store_true", help="include the slow acceptance runs")
    return parser


def _check(slow):
    import pytest

    # tests are not installed with the package
    if not os.path.isdir(TESTS_PATH):
        raise FileNotFoundError(f"no test suite at {TESTS_PATH}; run check from a source checkout")
    args = [TESTS_PATH]
    if slow:
        args += ["-m", "slow or not slow"]
    return pytest.main(args)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    try:
        if args.verb == "run":
            cfg = load_config(args.config)
            run_sweep(cfg, workers=args.workers, out_dir=args.out)
        elif args.verb == "summarize":
            table = summarize(args.results)
            if args.csv:
                write_summary(table, args.csv)
            else:
                table.to_csv(sys.stdout, index=False)
        elif args.verb == "check":
            return int(_check(args.slow))
    except (ConfigParse, ConfigInvalid) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (OSError, MalformedResults) as exc:
        logger.error("i/o error: %s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
