"""Command line entry point for covert-ppm experiments."""

import argparse
import logging
import sys
from typing import List, Optional

from .application import run_constants, run_figure2, run_montecarlo, run_plan
from .config import METRICS, SUITES, UNITS, ExperimentConfig, load_config, parse_n_grid
from .csv_writer import write_report
from .errors import CovertError
from .file_path_generator import resolve_output_path
from .verification import run_suites

logger = logging.getLogger("covert_ppm")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130

__all__ = ["build_parser", "main"]


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file merged over the defaults")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", help="output file or directory (stdout when omitted)")
    parser.add_argument("--unit", choices=UNITS, help="information unit of reported values")
    parser.add_argument("--workers", type=int, help="thread pool size")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covert-ppm",
        description="Finite-blocklength covert communication with PPM codes.",
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    figure2 = verbs.add_parser("figure2", help="log M / sqrt(n) curves for the three metrics")
    figure2.add_argument("--n-grid", help='"logspace:lo:hi:count" or a comma list')

    verify = verbs.add_parser("verify", help="run verification suites")
    verify.add_argument(
        "--suite", action="append", choices=SUITES, help="suite to run (repeatable)"
    )

    montecarlo = verbs.add_parser("montecarlo", help="simulate a random PPM code")
    montecarlo.add_argument("--metric", choices=METRICS)
    montecarlo.add_argument("--trials", type=int)
    montecarlo.add_argument("-n", type=int, dest="n")
    montecarlo.add_argument("--ell", type=int)
    montecarlo.add_argument("-M", type=int, dest="M")
    montecarlo.add_argument("-K", type=int, dest="K")
    montecarlo.add_argument("--codebook-out", help="also write the sampled codebook to this file")

    plan = verbs.add_parser("plan", help="planned code parameters next to the converse")
    plan.add_argument("--n-grid", help='"logspace:lo:hi:count" or a comma list')

    verbs.add_parser("constants", help="channel and detector constants, first-order slopes")

    for sub in (figure2, verify, montecarlo, plan, verbs.choices["constants"]):
        _common(sub)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _log_callback(message: str, level: str = "INFO") -> None:
    logger.log(getattr(logging, level, logging.INFO), message)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults) with the command line flags applied on top."""
    config = load_config(args.config)
    overrides = {
        "seed": args.seed,
        "out": args.out,
        "unit": args.unit,
        "workers": args.workers,
    }
    if getattr(args, "n_grid", None):
        overrides["n_grid"] = parse_n_grid(args.n_grid)
    if getattr(args, "suite", None):
        overrides["suites"] = tuple(dict.fromkeys(args.suite))
    for key in ("metric", "trials", "n", "ell", "M", "K", "codebook_out"):
        overrides[key] = getattr(args, key, None)
    return config.with_overrides(**overrides)


def run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    logger.info("running %s with seed %d", args.verb, config.seed)
    if args.verb == "verify":
        report = run_suites(config, _log_callback)
        write_report(report, resolve_output_path(config.out, "verify", config.seed))
        return EXIT_OK if report["passed"] else EXIT_FAILED
    runners = {
        "figure2": run_figure2,
        "plan": run_plan,
        "constants": run_constants,
        "montecarlo": run_montecarlo,
    }
    runners[args.verb](config, _log_callback)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> None:
    """Parse arguments, run the verb and exit with its status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        status = run(args)
    except CovertError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(EXIT_USAGE)
    except KeyboardInterrupt:
        print("\nInterrupted.", file=sys.stderr)
        sys.exit(EXIT_INTERRUPTED)
    except Exception as e:
        print(f"Unexpected error: {e}", file=sys.stderr)
        import traceback

        traceback.print_exc()
        sys.exit(EXIT_FAILED)
    sys.exit(status)


if __name__ == "__main__":
    main()
