"""
Sheppard's correction for sums of scaled centered discrete uniforms.

X = s_1 ξ_1 + ... + s_n ξ_n with ξ_k i.i.d. Ũ_q, q odd. The classical
approximation E[round(X)^2] ≈ E[X^2] + 1/12 is compared with the exact
value, and the error is checked against

    |error| <= (1 + Σ s_k d_k² + d²) / (6q²)           (intermediate)
            <= (1 + Σ s_k³ + (min s_k)²) / (6q²)        (after Hölder)
            <= Σ s_k³ / (3q²)                            (final bound, n >= 2)

with d = gcd(s_1..s_n, q) and d_k = gcd({s_i : i != k} ∪ {q}). The left side
comes from the exact oracle and the right sides are Fractions, so the bound
check never depends on floating point.
"""

import csv
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Sequence, TextIO, Tuple

import numpy as np

from .config import SweepConfig
from .errors import PreconditionError
from .lattice import (
    LatticeDistribution,
    RoundingMode,
    convolve_all,
    exact_moment,
    round_distribution,
    scale_by_integer,
    uniform_Utilde,
    variance,
)
from .moments import second_moment_rounded
from .trigpoly import from_distribution

logger = logging.getLogger(__name__)

CSV_HEADER = ("q", "s", "var_X", "exact_error", "bound_ss7", "ratio")

BOUND_PROVENANCE = (
    "Error = -1/(12q^2) - A + B with A the phi' sum and B the phi sum of the odd-q second-moment "
    "formula. |B| < d^2/(6q^2) because phi_X(2πj) = 1{J | j}. A = Σ_k s_k S_k/(2q^2), where S_k "
    "sums over l < d_k; Cauchy-Schwarz and the reciprocal-sine-square identity give |S_k| <= d_k^2/3. "
    "For n >= 2, d_k <= s_(k+1) and Hölder (exponents 3, 3/2) give Σ s_k d_k^2 <= Σ s_k^3."
)


def _check_inputs(q: int, s: Sequence[int]) -> Tuple[int, ...]:
    if isinstance(q, bool) or not isinstance(q, int) or q < 1 or q % 2 == 0:
        raise PreconditionError(
            f"q must be an odd positive integer (rounding of Ũ_q sums has no ties only for odd q), got {q!r}."
        )
    weights = tuple(s)
    if not weights:
        raise PreconditionError("The weight list s must not be empty.")
    for w in weights:
        if isinstance(w, bool) or not isinstance(w, int) or w < 1:
            raise PreconditionError(f"Weights must be positive integers, got {w!r}.")
    return weights


class GcdDiagnostics(NamedTuple):
    """d = gcd(s, q), J = q/d, and the leave-one-out d_k, J_k."""
    d: int
    J: int
    d_k: Tuple[int, ...]
    J_k: Tuple[int, ...]


def gcd_diagnostics(q: int, s: Sequence[int]) -> GcdDiagnostics:
    weights = _check_inputs(q, s)
    d = math.gcd(q, *weights)
    d_k = tuple(math.gcd(q, *(w for i, w in enumerate(weights) if i != k)) for k in range(len(weights)))
    if any(dk % d for dk in d_k):
        raise RuntimeError(f"gcd invariant broken: d={d} does not divide every d_k={d_k}.")
    return GcdDiagnostics(d=d, J=q // d, d_k=d_k, J_k=tuple(q // dk for dk in d_k))


def build_weighted_sum(q: int, s: Sequence[int]) -> LatticeDistribution:
    """Exact distribution of Σ s_k ξ_k with ξ_k i.i.d. Ũ_q."""
    weights = _check_inputs(q, s)
    base = uniform_Utilde(q)
    return convolve_all(scale_by_integer(base, w) for w in weights)


def expected_variance(q: int, s: Sequence[int]) -> Fraction:
    """Var X = (q² - 1)/(12 q²) Σ s_k²."""
    weights = _check_inputs(q, s)
    return Fraction(q * q - 1, 12 * q * q) * sum(w * w for w in weights)


def charfun_vanishing_set(q: int, s: Sequence[int], verify: bool = True, tolerance: float = 1e-10) -> FrozenSet[int]:
    """
    The j in 1..q-1 where φ_X(2πj) does not vanish (it then equals 1): exactly the multiples of J.

    With ``verify`` the set is checked against the trig-polynomial values of
    φ_X at every 2πj.
    """
    diag = gcd_diagnostics(q, s)
    nonvanishing = frozenset(j for j in range(1, q) if j % diag.J == 0)
    if verify:
        phi = from_distribution(build_weighted_sum(q, s))
        for j in range(1, q):
            value = phi.evaluate_at_2pi_multiple(j)
            target = 1.0 if j in nonvanishing else 0.0
            if abs(value - target) >= tolerance:
                raise RuntimeError(
                    f"φ_X(2π·{j}) = {value} disagrees with the gcd prediction {target} (q={q}, s={list(s)})."
                )
    return nonvanishing


@dataclass(frozen=True)
class SheppardReport:
    """Exact Sheppard-correction error for one (q, s) and the bounds it is checked against."""
    q: int
    s: Tuple[int, ...]
    var_X: Fraction
    mean_rounded: Fraction
    oracle_second_moment: Fraction
    second_moment_rounded: float
    formula_second_moment: float
    formula_residual: float
    sheppard_approx: float
    exact_error: Fraction
    formula_error: float
    d: int
    J: int
    d_k: Tuple[int, ...]
    J_k: Tuple[int, ...]
    bound_applicable: bool
    bound_ss7: Optional[Fraction]
    holder_bound: Optional[Fraction]
    intermediate_bound: Optional[Fraction]

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def ratio(self) -> Optional[float]:
        """exact_error / bound_ss7, or None when the bound does not apply."""
        if self.bound_ss7 is None:
            return None
        return float(self.exact_error / self.bound_ss7)

    @property
    def bound_holds(self) -> Optional[bool]:
        """Exact check of the error against the intermediate and the final bound; None for n = 1."""
        if not self.bound_applicable:
            return None
        return self.exact_error <= self.intermediate_bound and self.exact_error <= self.bound_ss7

    @property
    def provenance(self) -> str:
        return BOUND_PROVENANCE

    def summary_lines(self) -> List[str]:
        na = "n/a (needs n >= 2)"
        return [
            f"q                     : {self.q}",
            f"s                     : {','.join(map(str, self.s))}",
            f"d, J                  : {self.d}, {self.J}",
            f"d_k                   : {','.join(map(str, self.d_k))}",
            f"J_k                   : {','.join(map(str, self.J_k))}",
            f"var_X                 : {self.var_X}",
            f"E[round X]            : {self.mean_rounded}",
            f"E[round(X)^2] oracle  : {self.oracle_second_moment}",
            f"E[round(X)^2] formula : {self.formula_second_moment:.17g}",
            f"sheppard_approx       : {self.sheppard_approx:.17g}",
            f"exact_error           : {self.exact_error}",
            f"intermediate_bound    : {self.intermediate_bound if self.bound_applicable else na}",
            f"holder_bound          : {self.holder_bound if self.bound_applicable else na}",
            f"bound_ss7             : {self.bound_ss7 if self.bound_applicable else na}",
            f"ratio                 : {'' if self.ratio is None else format(self.ratio, '.17g')}",
            f"bound_holds           : {self.bound_holds}",
        ]


def sheppard_report(q: int, s: Sequence[int]) -> SheppardReport:
    """Builds X, rounds it exactly and assembles the error, bounds and gcd diagnostics."""
    weights = _check_inputs(q, s)
    diag = gcd_diagnostics(q, weights)
    X = build_weighted_sum(q, weights)

    var_X = variance(X)
    if var_X != expected_variance(q, weights):
        raise RuntimeError(f"Variance of the weighted sum is {var_X}, expected {expected_variance(q, weights)}.")
    second_X = exact_moment(X, 2)

    rounded = round_distribution(X, RoundingMode.NEAREST_UP)
    mean_r = exact_moment(rounded, 1)
    second_r = exact_moment(rounded, 2)
    approx = second_X + Fraction(1, 12)
    exact_error = abs(second_r - approx)

    formula = second_moment_rounded(X, RoundingMode.NEAREST_UP)

    applicable = len(weights) >= 2
    denominator = 6 * q * q
    if applicable:
        cubes = sum(w ** 3 for w in weights)
        bound = Fraction(cubes, 3 * q * q)
        holder = Fraction(1 + cubes + min(weights) ** 2, denominator)
        intermediate = Fraction(
            1 + sum(w * dk * dk for w, dk in zip(weights, diag.d_k)) + diag.d ** 2, denominator
        )
    else:
        bound = holder = intermediate = None

    report = SheppardReport(
        q=q,
        s=weights,
        var_X=var_X,
        mean_rounded=mean_r,
        oracle_second_moment=second_r,
        second_moment_rounded=float(second_r),
        formula_second_moment=formula.formula_value,
        formula_residual=formula.residual,
        sheppard_approx=float(approx),
        exact_error=exact_error,
        formula_error=abs(formula.formula_value - float(approx)),
        d=diag.d,
        J=diag.J,
        d_k=diag.d_k,
        J_k=diag.J_k,
        bound_applicable=applicable,
        bound_ss7=bound,
        holder_bound=holder,
        intermediate_bound=intermediate,
    )
    if report.bound_holds is False:
        logger.warning("Bound violated for q=%d s=%s: error=%s bound=%s", q, weights, exact_error, bound)
    return report


GridPoint = Tuple[int, Tuple[int, ...]]


def sweep_grid(config: SweepConfig) -> List[GridPoint]:
    """All (q, s) points of the grid in deterministic order, or a seeded subsample of them (order kept)."""
    grid = [
        (q, s)
        for q in config.q_values
        for n in config.n_values
        for s in itertools.product(range(1, config.s_max + 1), repeat=n)
    ]
    if config.samples is None or config.samples >= len(grid):
        return grid
    rng = np.random.default_rng(config.seed)
    picked = np.sort(rng.choice(len(grid), size=config.samples, replace=False))
    return [grid[i] for i in picked]


def _report_for_point(point: GridPoint) -> SheppardReport:
    q, s = point
    return sheppard_report(q, s)


def sweep(config: SweepConfig, evaluate: Callable[[GridPoint], Any] = _report_for_point) -> Iterator[Any]:
    """
    Evaluates the grid chunk by chunk and yields one result per point, in grid order.

    ``evaluate`` defaults to building a SheppardReport. Any replacement must be
    a module-level function so it pickles into worker processes. With
    ``workers > 1`` each chunk is mapped over a process pool; map keeps
    submission order, so the output is identical to the serial run.
    """
    points = sweep_grid(config)
    if not points:
        return
    chunk = config.chunk_size or len(points)
    logger.debug("Sheppard sweep: %d grid points, chunk=%d, workers=%d", len(points), chunk, config.workers)

    executor = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for start in range(0, len(points), chunk):
            batch = points[start:start + chunk]
            if executor is None:
                results: Iterable[Any] = map(evaluate, batch)
            else:
                results = executor.map(evaluate, batch)
            for result in results:
                yield result
            logger.debug("Sheppard sweep: finished points %d..%d", start, start + len(batch) - 1)
    finally:
        if executor is not None:
            executor.shutdown()


def csv_row(report: SheppardReport) -> Tuple[str, ...]:
    ratio = report.ratio
    return (
        str(report.q),
        ";".join(map(str, report.s)),
        str(report.var_X),
        str(report.exact_error),
        "" if report.bound_ss7 is None else str(report.bound_ss7),
        "" if ratio is None else format(ratio, ".17g"),
    )


def write_sweep_csv(reports: Iterable[SheppardReport], stream: TextIO) -> int:
    """Writes the header and one row per report; returns the number of rows written."""
    writer = csv.writer(stream)
    writer.writerow(CSV_HEADER)
    count = 0
    for report in reports:
        writer.writerow(csv_row(report))
        count += 1
    return count
