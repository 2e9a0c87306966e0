"""
Rounding kernels h_q, ĥ_q and the characteristic function of a rounded
lattice variable.

h_q(t) = (1/q) Σ_{k=0}^{q-1} e^{-itk/q} is the characteristic function of
-U_q and ĥ_q the one of -Ũ_q. For X on (1/q)Z,

    φ_{floor X}(t) = Σ_{j=0}^{q-1} h_q(t + 2πj) φ_X(t + 2πj)

and the same with ĥ_q for round-half-up. The mirrored modes use the
reflected kernels h_q(-t), ĥ_q(-t).

Kernels are always evaluated by their defining finite sums, so the
sine-quotient closed forms and their removable singularities never enter
the main path. The closed forms are kept only for cross-checks.
"""

import math
from typing import NamedTuple, Union

import numpy as np

from .lattice import (
    LatticeDistribution,
    RoundingMode,
    centered_range,
    negate,
    round_distribution,
    uniform_U,
    uniform_Utilde,
)
from .trigpoly import ArrayLike, TrigPolynomial, from_distribution

TWO_PI = 2.0 * math.pi


class KernelEval(NamedTuple):
    """A kernel value h_q(t) or ĥ_q(t); |value| <= 1 since it averages unit-modulus terms."""
    q: int
    t: float
    value: complex
    centered: bool = False


def _kernel_sum(indices: np.ndarray, q: int, t: ArrayLike) -> Union[complex, np.ndarray]:
    t_arr = np.asarray(t, dtype=np.float64)
    terms = np.exp(-1j * np.multiply.outer(t_arr, indices / q))
    values = terms.mean(axis=-1)
    if t_arr.ndim == 0:
        return complex(values)
    return values


def _check_kernel_q(q: int) -> None:
    if isinstance(q, bool) or not isinstance(q, int) or q < 1:
        raise ValueError(f"Kernel order q must be a positive int, got {q!r}.")


def h_q(q: int, t: ArrayLike) -> Union[complex, np.ndarray]:
    """h_q(t) = (1/q) Σ_{k=0}^{q-1} e^{-itk/q}."""
    _check_kernel_q(q)
    return _kernel_sum(np.arange(q, dtype=np.float64), q, t)


def hh_q(q: int, t: ArrayLike) -> Union[complex, np.ndarray]:
    """ĥ_q(t): the same average over the centered index range (k/q in [-1/2, 1/2))."""
    _check_kernel_q(q)
    return _kernel_sum(np.array(centered_range(q), dtype=np.float64), q, t)


def evaluate_kernel(q: int, t: float, centered: bool = False) -> KernelEval:
    value = hh_q(q, t) if centered else h_q(q, t)
    return KernelEval(q=q, t=float(t), value=value, centered=centered)


def h_q_closed_form(q: int, t: float) -> complex:
    """sin(t/2) / (q sin(t/2q)) · e^{-i(q-1)t/(2q)}, with value 1 on t ∈ 2πqZ."""
    return _sine_quotient(q, t) * complex(math.cos((q - 1) * t / (2 * q)), -math.sin((q - 1) * t / (2 * q)))


def hh_q_closed_form(q: int, t: float) -> complex:
    """sin(t/2) / (q sin(t/2q)), times e^{it/(2q)} when q is even."""
    quotient = _sine_quotient(q, t)
    if q % 2 == 1:
        return complex(quotient)
    return quotient * complex(math.cos(t / (2 * q)), math.sin(t / (2 * q)))


def _sine_quotient(q: int, t: float) -> float:
    denominator = q * math.sin(t / (2 * q))
    if abs(denominator) < 1e-12:
        # t ∈ 2πqZ: the continuous extension of the quotient.
        return (-1.0) ** ((q - 1) * round(t / (TWO_PI * q)))
    return math.sin(t / 2) / denominator


def kernel_polynomial(q: int, mode: RoundingMode) -> TrigPolynomial:
    """
    The kernel of ``mode`` as a trig polynomial over base q.

    Floor -> h_q(t), Ceil -> h_q(-t), NearestUp -> ĥ_q(t), NearestDown -> ĥ_q(-t).
    """
    if mode is RoundingMode.FLOOR:
        return from_distribution(negate(uniform_U(q)))
    if mode is RoundingMode.CEIL:
        return from_distribution(uniform_U(q))
    if mode is RoundingMode.NEAREST_UP:
        return from_distribution(negate(uniform_Utilde(q)))
    return from_distribution(uniform_Utilde(q))


def kernel_function(q: int, mode: RoundingMode, t: ArrayLike) -> Union[complex, np.ndarray]:
    """Kernel value of ``mode`` at t, via the defining finite sums."""
    if mode is RoundingMode.FLOOR:
        return h_q(q, t)
    if mode is RoundingMode.CEIL:
        return h_q(q, -np.asarray(t, dtype=np.float64))
    if mode is RoundingMode.NEAREST_UP:
        return hh_q(q, t)
    return hh_q(q, -np.asarray(t, dtype=np.float64))


def charfun_rounded_shifted(
    d: LatticeDistribution, mode: RoundingMode, t: ArrayLike, m: int
) -> Union[complex, np.ndarray]:
    """Kernel-weighted sum of φ_X(t + 2πj) with j running over m..m+q-1 (any full residue system mod q)."""
    phi = from_distribution(d)
    t_arr = np.asarray(t, dtype=np.float64)
    total = np.zeros(t_arr.shape, dtype=np.complex128)
    for j in range(m, m + d.q):
        shifted = t_arr + TWO_PI * j
        total = total + kernel_function(d.q, mode, shifted) * phi.evaluate(shifted)
    if t_arr.ndim == 0:
        return complex(total)
    return total


def charfun_rounded(d: LatticeDistribution, mode: RoundingMode, t: ArrayLike) -> Union[complex, np.ndarray]:
    """φ of the rounded variable at t, summed over j = 0..q-1."""
    return charfun_rounded_shifted(d, mode, t, 0)


def charfun_rounded_oracle(d: LatticeDistribution, mode: RoundingMode, t: ArrayLike) -> Union[complex, np.ndarray]:
    """Reference path: round the distribution exactly, then evaluate its characteristic function."""
    return from_distribution(round_distribution(d, mode)).evaluate(t)
