"""
Command-line front end.

Subcommands: moments, charfun, verify, sheppard, canonical. Machine output
goes to standard output (CSV or plain lines); diagnostics go to standard
error through logging. Exit codes:

    0  success
    1  a residual above tolerance, a failed check or a bound violation
    2  unparsable spec, bad arguments or a violated precondition
    3  a spec that parses but is not a valid distribution
"""

import argparse
import contextlib
import csv
import logging
import math
import sys
from typing import Iterator, List, Optional, Sequence

import numpy as np

from . import __version__
from .charfun import charfun_rounded, charfun_rounded_oracle
from .config import DEFAULT_SEED, SweepConfig, VerifyConfig, get_active_tolerances
from .errors import InvalidDistributionError, LatticeRoundError, PreconditionError, SpecFormatError
from .lattice import RoundingMode
from .moments import moment_rounded
from .sheppard import SheppardReport, sheppard_report, sweep, write_sweep_csv
from .specfile import dump_spec, load_spec
from .testing.runner import run_all, summarize

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INVALID = 3

MAX_MOMENT_ORDER = 8


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _tolerance_scope(tolerance: Optional[float]):
    if tolerance is None:
        return contextlib.nullcontext()
    return get_active_tolerances().with_overrides(moment=tolerance, charfun=tolerance)


def _parse_weights(text: str) -> List[int]:
    try:
        weights = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise PreconditionError(f"--weights must be a comma-separated list of integers, got '{text}'.") from None
    if not weights:
        raise PreconditionError("--weights must name at least one weight.")
    return weights


# --- Subcommands ---

def cmd_moments(args: argparse.Namespace) -> int:
    if not 1 <= args.max_r <= MAX_MOMENT_ORDER:
        raise PreconditionError(f"--max-r must be between 1 and {MAX_MOMENT_ORDER}, got {args.max_r}.")
    d = load_spec(args.spec)
    mode = RoundingMode.parse(args.mode)
    writer = csv.writer(sys.stdout)
    writer.writerow(("r", "mode", "formula", "oracle", "residual"))
    breaches = 0
    with _tolerance_scope(args.tolerance):
        for r in range(1, args.max_r + 1):
            report = moment_rounded(d, mode, r)
            writer.writerow((r, mode.value, _fmt(report.formula_value), str(report.oracle_value),
                             _fmt(report.residual)))
            if not report.passed():
                breaches += 1
                logger.warning("r=%d: residual %.3e above tolerance", r, report.scaled_residual)
    return EXIT_FAILED if breaches else EXIT_OK


def cmd_charfun(args: argparse.Namespace) -> int:
    if args.grid < 1:
        raise PreconditionError(f"--grid must be at least 1, got {args.grid}.")
    d = load_spec(args.spec)
    t_max = math.pi * d.q if args.t_max is None else args.t_max
    if not t_max > 0:
        raise PreconditionError(f"--t-max must be positive, got {t_max}.")
    mode = RoundingMode.parse(args.mode)
    t = np.linspace(-t_max, t_max, args.grid)
    with _tolerance_scope(args.tolerance):
        tolerance = get_active_tolerances().charfun
        formula = np.atleast_1d(charfun_rounded(d, mode, t))
        oracle = np.atleast_1d(charfun_rounded_oracle(d, mode, t))
    residual = np.abs(formula - oracle)
    writer = csv.writer(sys.stdout)
    writer.writerow(("t", "Re", "Im", "oracle-Re", "oracle-Im", "residual"))
    for ti, f, o, res in zip(t, formula, oracle, residual):
        writer.writerow((_fmt(ti), _fmt(f.real), _fmt(f.imag), _fmt(o.real), _fmt(o.imag), _fmt(res)))
    worst = float(residual.max())
    if worst > tolerance:
        logger.warning("Largest charfun residual %.3e exceeds %.3e", worst, tolerance)
        return EXIT_FAILED
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    defaults = VerifyConfig()
    config = VerifyConfig(
        q_max=defaults.q_max if args.q_max is None else args.q_max,
        seed=args.seed,
        samples=defaults.samples if args.samples is None else args.samples,
        inject_fault=args.inject_fault,
    )
    with _tolerance_scope(args.tolerance):
        results = run_all(config)
    out = sys.stdout
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        out.write(f"{status} {result.label} residual={_fmt(result.residual)}\n")
    summary = summarize(results)
    out.write(summary.message() + "\n")
    out.write(summary.line + "\n")
    return EXIT_OK if summary.all_passed else EXIT_FAILED


def _count_violations(reports: Iterator[SheppardReport], counter: List[int]) -> Iterator[SheppardReport]:
    for report in reports:
        if report.bound_holds is False:
            counter[0] += 1
        yield report


def cmd_sheppard(args: argparse.Namespace) -> int:
    if args.q is not None:
        if args.q < 1 or args.q % 2 == 0:
            raise PreconditionError(
                f"--q must be an odd positive integer (the rounding analysis needs odd q), got {args.q}."
            )
    if not args.sweep:
        if args.q is None or args.weights is None:
            raise PreconditionError("Give --q with --weights for a single report, or --sweep.")
        report = sheppard_report(args.q, _parse_weights(args.weights))
        sys.stdout.write("\n".join(report.summary_lines()) + "\n")
        return EXIT_FAILED if report.bound_holds is False else EXIT_OK

    q_values = (args.q,) if args.q is not None else tuple(range(3, args.q_max + 1, 2))
    config = SweepConfig(
        q_values=q_values,
        n_values=tuple(range(2, args.n_max + 1)),
        s_max=args.s_max,
        samples=args.samples,
        seed=args.seed,
        workers=args.workers,
    )
    violations = [0]
    reports = _count_violations(sweep(config), violations)
    if args.csv is None:
        rows = write_sweep_csv(reports, sys.stdout)
    else:
        with open(args.csv, "w", newline="", encoding="utf-8") as handle:
            rows = write_sweep_csv(reports, handle)
    logger.info("Wrote %d sweep rows", rows)
    if violations[0]:
        logger.warning("%d bound violations in the sweep", violations[0])
        return EXIT_FAILED
    return EXIT_OK


def cmd_canonical(args: argparse.Namespace) -> int:
    sys.stdout.write(dump_spec(load_spec(args.spec)) + "\n")
    return EXIT_OK


# --- Parser ---

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="Log debug progress to standard error.")

    tolerant = argparse.ArgumentParser(add_help=False)
    tolerant.add_argument("--tolerance", type=float, default=None,
                          help="Override the moment/charfun tolerance for this command.")

    modes = [m.value for m in RoundingMode]
    parser = argparse.ArgumentParser(prog="lattice-round", description="Rounding analysis for lattice random variables.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", parents=[common, tolerant], help="Moments of the rounded variable vs the oracle.")
    p.add_argument("spec", help="Distribution spec file (JSON).")
    p.add_argument("--mode", choices=modes, default=RoundingMode.FLOOR.value)
    p.add_argument("--max-r", type=int, default=2)
    p.set_defaults(handler=cmd_moments)

    p = sub.add_parser("charfun", parents=[common, tolerant], help="Characteristic function of the rounded variable.")
    p.add_argument("spec", help="Distribution spec file (JSON).")
    p.add_argument("--mode", choices=modes, default=RoundingMode.FLOOR.value)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--t-max", type=float, default=None, help="Half-width of the t grid (default pi*q).")
    p.set_defaults(handler=cmd_charfun)

    p = sub.add_parser("verify", parents=[common, tolerant], help="Run the self-verification suite.")
    p.add_argument("--q-max", type=int, default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("sheppard", parents=[common], help="Sheppard-correction error and bounds.")
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--weights", default=None, help="Comma-separated positive integer weights, e.g. 1,2,3.")
    p.add_argument("--sweep", action="store_true", help="Evaluate the whole grid and write CSV.")
    p.add_argument("--csv", default=None, help="Write the sweep to this file instead of standard output.")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--samples", type=int, default=None, help="Seeded subsample size (default: full grid).")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--q-max", type=int, default=31)
    p.add_argument("--s-max", type=int, default=6)
    p.add_argument("--n-max", type=int, default=3)
    p.set_defaults(handler=cmd_sheppard)

    p = sub.add_parser("canonical", parents=[common], help="Print the canonical form of a spec file.")
    p.add_argument("spec", help="Distribution spec file (JSON).")
    p.set_defaults(handler=cmd_canonical)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        return args.handler(args)
    except SpecFormatError as exc:
        sys.stderr.write(f"error: {getattr(args, 'spec', 'spec')}: {exc}\n")
        return EXIT_USAGE
    except InvalidDistributionError as exc:
        sys.stderr.write(f"error: invalid distribution: {exc}\n")
        return EXIT_INVALID
    except (PreconditionError, LatticeRoundError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
