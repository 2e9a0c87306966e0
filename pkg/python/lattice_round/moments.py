"""
Moments of a rounded lattice variable.

Three independent paths produce E[M(X)^r] for a rounding mode M:

1. Closed form (r = 1, 2): the explicit mean and second-moment formulas,
   which only need E X, E X², φ_X(2πj) and φ_X'(2πj) for j = 1..q-1.
2. Trig polynomial (any r >= 1): build kernel·φ_X as a TrigPolynomial,
   differentiate r times exactly in the frequency domain, evaluate at
   t = 2πj for one full residue system j and multiply by i^{-r}.
3. Oracle: exact_moment(round_distribution(d, mode), r), a Fraction.

Every report carries the formula value, the exact oracle value and the
residual between them. Ceil and NearestDown go through the mirror
relations M(X) = -M'(-X) in the closed-form path and through the reflected
kernels in the trig-polynomial path, so the two paths stay independent.
"""

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Optional

from .charfun import kernel_polynomial
from .config import get_active_tolerances
from .errors import PrecisionWarning, PreconditionError
from .lattice import LatticeDistribution, RoundingMode, exact_moment, negate, round_distribution, variance
from .trigpoly import TrigPolynomial, from_distribution, i_power

CLOSED_FORM = "closed-form"
TRIG_POLY = "trig-poly"


@dataclass(frozen=True)
class MomentReport:
    """Formula-path and oracle-path values of E[M(X)^r]."""
    mode: RoundingMode
    r: int
    formula_value: float
    oracle_value: Fraction
    residual: float
    imaginary_residue: float
    path: str
    warning: Optional[str] = None

    @property
    def scaled_residual(self) -> float:
        """residual / max(1, |oracle|)."""
        return self.residual / max(1.0, abs(float(self.oracle_value)))

    def passed(self, tolerance: Optional[float] = None) -> bool:
        tol = get_active_tolerances().moment if tolerance is None else tolerance
        return self.scaled_residual <= tol


@dataclass(frozen=True)
class VarianceReport:
    """Var M(X) from the closed-form moments (m2 - m1^2) against the exact oracle variance."""
    mode: RoundingMode
    formula_value: float
    oracle_value: Fraction
    residual: float

    def passed(self, tolerance: Optional[float] = None) -> bool:
        tol = get_active_tolerances().moment if tolerance is None else tolerance
        return self.residual <= tol * max(1.0, abs(float(self.oracle_value)))


def _finalize(
    mode: RoundingMode, r: int, value: complex, oracle: Fraction, path: str
) -> MomentReport:
    """Takes the real part after the full sum and records how much imaginary residue was dropped."""
    real = value.real
    imaginary = abs(value.imag)
    warning = None
    limit = get_active_tolerances().imaginary * max(1.0, abs(real))
    if imaginary > limit:
        warning = (
            f"Imaginary residue {imaginary:.3e} exceeds {limit:.3e} for r={r}, mode={mode.value} "
            f"({path}); precision loss is likely."
        )
        warnings.warn(warning, PrecisionWarning, stacklevel=3)
    residual = abs(real - float(oracle))
    return MomentReport(
        mode=mode,
        r=r,
        formula_value=real,
        oracle_value=oracle,
        residual=residual,
        imaginary_residue=imaginary,
        path=path,
        warning=warning,
    )


def oracle_moment(d: LatticeDistribution, mode: RoundingMode, r: int) -> Fraction:
    """E[M(X)^r] computed exactly by rounding every support point."""
    return exact_moment(round_distribution(d, mode), r)


# --- Closed-form kernel intermediates (test targets) ---

def _unit_root(q: int, j: int) -> complex:
    """e^{-2πij/q}."""
    return cmath.exp(-2j * math.pi * j / q)


def h_derivative_closed_form(q: int, r: int, j: int) -> complex:
    """r-th derivative (r = 0, 1, 2) of h_q at t = 2πj from the explicit expressions."""
    j %= q
    if j == 0:
        return {
            0: 1 + 0j,
            1: -1j * (q - 1) / (2 * q),
            2: complex(-(2 * q * q - 3 * q + 1) / (6 * q * q)),
        }[r]
    w = _unit_root(q, j)
    return {
        0: 0j,
        1: 1j / (q * (1 - w)),
        2: 1 / (q * (1 - w)) + 2 * w / (q * q * (1 - w) ** 2),
    }[r]


def hh_derivative_closed_form(q: int, r: int, j: int) -> complex:
    """r-th derivative (r = 0, 1, 2) of ĥ_q at t = 2πj, split by the parity of q."""
    sign = -1 if j % 2 else 1
    j_mod = j % q
    if j_mod == 0:
        # ĥ_q has period 2πq.
        if q % 2 == 0:
            return {0: 1 + 0j, 1: 1j / (2 * q), 2: complex(-(q * q + 2) / (12 * q * q))}[r]
        return {0: 1 + 0j, 1: 0j, 2: complex(-(q * q - 1) / (12 * q * q))}[r]
    angle = math.pi * j / q
    if r == 0:
        return 0j
    if q % 2 == 0:
        if r == 1:
            return 1j * sign / (q * (1 - _unit_root(q, j)))
        return complex(-sign / (2 * q * q * math.sin(angle) ** 2))
    if r == 1:
        return complex(sign / (2 * q * math.sin(angle)))
    return complex(-sign * math.cos(angle) / (2 * q * q * math.sin(angle) ** 2))


def kernel_derivative(q: int, centered: bool, r: int, j: int) -> complex:
    """r-th derivative of h_q (or ĥ_q when centered) at 2πj via exact trig-poly differentiation."""
    mode = RoundingMode.NEAREST_UP if centered else RoundingMode.FLOOR
    return kernel_polynomial(q, mode).differentiate(r).evaluate_at_2pi_multiple(j)


# --- Closed-form moments ---

class _CharfunSamples:
    """φ_X and φ_X' at t = 2πj, j = 0..q-1, computed once per distribution."""

    def __init__(self, d: LatticeDistribution):
        phi = from_distribution(d)
        dphi = phi.differentiate(1)
        self.q = d.q
        self.mean = float(exact_moment(d, 1))
        self.second = float(exact_moment(d, 2))
        self.phi = [phi.evaluate_at_2pi_multiple(j) for j in range(d.q)]
        self.dphi = [dphi.evaluate_at_2pi_multiple(j) for j in range(d.q)]


def _mean_floor(s: _CharfunSamples) -> complex:
    q = s.q
    total = complex(s.mean - 0.5 + 1 / (2 * q))
    for j in range(1, q):
        total += s.phi[j] / (q * (1 - _unit_root(q, j)))
    return total


def _mean_nearest_up(s: _CharfunSamples) -> complex:
    q = s.q
    if q % 2 == 0:
        total = complex(s.mean + 1 / (2 * q))
        for j in range(1, q):
            total += (-1) ** j * s.phi[j] / (q * (1 - _unit_root(q, j)))
        return total
    total = complex(s.mean)
    for j in range(1, q):
        angle = math.pi * j / q
        total += (-1) ** j * s.phi[j] / (q * (cmath.exp(1j * angle) - cmath.exp(-1j * angle)))
    return total


def _second_floor(s: _CharfunSamples) -> complex:
    q = s.q
    total = complex(s.second + (2 * q * q - 3 * q + 1) / (6 * q * q) - (q - 1) / q * s.mean)
    for j in range(1, q):
        w = _unit_root(q, j)
        total -= 2 * 1j / (q * (1 - w)) * s.dphi[j]
        total -= (1 / (q * (1 - w)) + 2 * w / (q * q * (1 - w) ** 2)) * s.phi[j]
    return total


def _second_nearest_up(s: _CharfunSamples) -> complex:
    q = s.q
    if q % 2 == 0:
        total = complex(s.second + 1 / 12 + 1 / (6 * q * q) + s.mean / q)
        for j in range(1, q):
            sign = (-1) ** j
            total -= 2 * 1j * sign / (q * (1 - _unit_root(q, j))) * s.dphi[j]
            total += sign / (2 * q * q * math.sin(math.pi * j / q) ** 2) * s.phi[j]
        return total
    total = complex(s.second + 1 / 12 - 1 / (12 * q * q))
    for j in range(1, q):
        sign = (-1) ** j
        angle = math.pi * j / q
        total -= sign / (q * math.sin(angle)) * s.dphi[j]
        total += sign * math.cos(angle) / (2 * q * q * math.sin(angle) ** 2) * s.phi[j]
    return total


_BASE_FORMULAS: Dict[int, Dict[RoundingMode, Callable[[_CharfunSamples], complex]]] = {
    1: {RoundingMode.FLOOR: _mean_floor, RoundingMode.NEAREST_UP: _mean_nearest_up},
    2: {RoundingMode.FLOOR: _second_floor, RoundingMode.NEAREST_UP: _second_nearest_up},
}


def _closed_form(d: LatticeDistribution, mode: RoundingMode, r: int) -> complex:
    if mode.is_mirrored:
        # M(X) = -M'(-X): odd moments flip sign, even moments do not.
        value = _BASE_FORMULAS[r][mode.mirror](_CharfunSamples(negate(d)))
        return -value if r % 2 else value
    return _BASE_FORMULAS[r][mode](_CharfunSamples(d))


def mean_rounded(d: LatticeDistribution, mode: RoundingMode) -> MomentReport:
    """E[M(X)] from the closed-form mean formulas (Ceil / NearestDown by reflection)."""
    return _finalize(mode, 1, _closed_form(d, mode, 1), oracle_moment(d, mode, 1), CLOSED_FORM)


def second_moment_rounded(d: LatticeDistribution, mode: RoundingMode) -> MomentReport:
    """E[M(X)^2] from the closed-form second-moment formulas."""
    return _finalize(mode, 2, _closed_form(d, mode, 2), oracle_moment(d, mode, 2), CLOSED_FORM)


# --- General r via trig-polynomial differentiation ---

def _check_order(r: int) -> None:
    if isinstance(r, bool) or not isinstance(r, int) or r < 1:
        raise PreconditionError(f"Moment order r must be a positive int, got {r!r}.")


def rounded_charfun_derivative_sum(d: LatticeDistribution, mode: RoundingMode, r: int, m: int = 0) -> complex:
    """Σ_{j=m}^{m+q-1} (d/dt)^r (kernel·φ_X) at t = 2πj."""
    product: TrigPolynomial = kernel_polynomial(d.q, mode).multiply(from_distribution(d))
    derivative = product.differentiate(r)
    return sum((derivative.evaluate_at_2pi_multiple(j) for j in range(m, m + d.q)), 0j)


def moment_rounded_shifted(d: LatticeDistribution, mode: RoundingMode, r: int, m: int) -> MomentReport:
    """E[M(X)^r] with the j-sum taken over m..m+q-1."""
    _check_order(r)
    value = i_power(-r) * rounded_charfun_derivative_sum(d, mode, r, m)
    return _finalize(mode, r, value, oracle_moment(d, mode, r), TRIG_POLY)


def moment_rounded(d: LatticeDistribution, mode: RoundingMode, r: int) -> MomentReport:
    """E[M(X)^r] for any r >= 1 via exact differentiation of kernel·φ_X."""
    return moment_rounded_shifted(d, mode, r, 0)


def variance_rounded(d: LatticeDistribution, mode: RoundingMode) -> VarianceReport:
    m1 = mean_rounded(d, mode)
    m2 = second_moment_rounded(d, mode)
    formula = m2.formula_value - m1.formula_value ** 2
    oracle = variance(round_distribution(d, mode))
    return VarianceReport(mode=mode, formula_value=formula, oracle_value=oracle, residual=abs(formula - float(oracle)))
