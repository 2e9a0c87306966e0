"""
Finite exponential sums Σ c_n e^{i(n/q)t} with integer frequency numerators.

Characteristic functions of lattice variables and the rounding kernels are
all of this shape. Keeping frequencies as integers over a shared base_q
makes multiplication and differentiation closed and exact in the frequency
domain; only the coefficients are floating point.
"""

from numbers import Integral, Real
from typing import Dict, Mapping, Union

import numpy as np

from .errors import LatticeMismatchError
from .lattice import LatticeDistribution

ArrayLike = Union[float, np.ndarray]

# i**r for r mod 4, exact.
_I_POWERS = (1 + 0j, 1j, -1 + 0j, -1j)


def i_power(r: int) -> complex:
    """Exact value of i**r for any integer r."""
    return _I_POWERS[r % 4]


class TrigPolynomial:
    """
    An immutable trig polynomial over the frequency lattice (1/base_q)Z.

    ``frequencies`` are the sorted, unique integer numerators n;
    ``coefficients`` the matching complex c_n. Zero coefficients that arise
    structurally (e.g. the constant term after differentiation) are kept.
    """

    __slots__ = ("_base_q", "_frequencies", "_coefficients")

    def __init__(self, base_q: int, coeffs: Mapping[int, complex]):
        if isinstance(base_q, bool) or not isinstance(base_q, Integral) or base_q < 1:
            raise ValueError(f"base_q must be a positive int, got {base_q!r}.")
        keys = sorted(coeffs)
        self._base_q = int(base_q)
        self._frequencies = np.array(keys, dtype=np.int64)
        self._coefficients = np.array([coeffs[k] for k in keys], dtype=np.complex128)
        self._freeze()

    @classmethod
    def _from_arrays(cls, base_q: int, frequencies: np.ndarray, coefficients: np.ndarray) -> "TrigPolynomial":
        """Internal: wraps sorted unique frequency / coefficient arrays."""
        instance = cls.__new__(cls)
        instance._base_q = base_q
        instance._frequencies = frequencies
        instance._coefficients = coefficients
        instance._freeze()
        return instance

    def _freeze(self) -> None:
        self._frequencies.setflags(write=False)
        self._coefficients.setflags(write=False)

    @classmethod
    def constant(cls, value: complex = 1.0, base_q: int = 1) -> "TrigPolynomial":
        return cls(base_q, {0: value})

    @property
    def base_q(self) -> int:
        return self._base_q

    @property
    def frequencies(self) -> np.ndarray:
        return self._frequencies

    @property
    def coefficients(self) -> np.ndarray:
        return self._coefficients

    def coefficient(self, n: int) -> complex:
        """Coefficient of e^{i(n/base_q)t}; 0 when n is not a stored frequency."""
        idx = np.searchsorted(self._frequencies, n)
        if idx < len(self._frequencies) and self._frequencies[idx] == n:
            return complex(self._coefficients[idx])
        return 0j

    def as_dict(self) -> Dict[int, complex]:
        return {int(n): complex(c) for n, c in zip(self._frequencies, self._coefficients)}

    def __len__(self) -> int:
        return len(self._frequencies)

    def __repr__(self) -> str:
        return f"TrigPolynomial(base_q={self._base_q}, terms={len(self)})"

    # --- Algebra ---

    def evaluate(self, t: ArrayLike) -> Union[complex, np.ndarray]:
        """Σ c_n e^{i(n/base_q)t}, summed directly. Accepts a scalar or an array of t."""
        t_arr = np.asarray(t, dtype=np.float64)
        phases = np.multiply.outer(t_arr, self._frequencies / self._base_q)
        values = np.exp(1j * phases) @ self._coefficients
        if t_arr.ndim == 0:
            return complex(values)
        return values

    def __call__(self, t: ArrayLike) -> Union[complex, np.ndarray]:
        return self.evaluate(t)

    def evaluate_at_2pi_multiple(self, j: int) -> complex:
        """
        Value at t = 2πj.

        e^{i(n/q)2πj} depends only on n·j mod q, so the phase is reduced in
        integer arithmetic before the exponential is taken.
        """
        residues = np.mod(self._frequencies * int(j), self._base_q)
        phases = (2.0 * np.pi / self._base_q) * residues
        return complex(np.exp(1j * phases) @ self._coefficients)

    def multiply(self, other: "TrigPolynomial") -> "TrigPolynomial":
        """Product of two trig polynomials: convolution of the coefficient maps."""
        if self._base_q != other._base_q:
            raise LatticeMismatchError(self._base_q, other._base_q, "trig polynomial factors")
        sums = np.add.outer(self._frequencies, other._frequencies).ravel()
        products = np.multiply.outer(self._coefficients, other._coefficients).ravel()
        frequencies, inverse = np.unique(sums, return_inverse=True)
        coefficients = np.zeros(len(frequencies), dtype=np.complex128)
        np.add.at(coefficients, inverse.ravel(), products)
        return TrigPolynomial._from_arrays(self._base_q, frequencies, coefficients)

    def __mul__(self, other):
        if isinstance(other, TrigPolynomial):
            return self.multiply(other)
        if isinstance(other, (Real, complex)):
            return TrigPolynomial._from_arrays(self._base_q, self._frequencies, self._coefficients * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (Real, complex)):
            return self * other
        return NotImplemented

    def differentiate(self, r: int = 1) -> "TrigPolynomial":
        """r-th derivative in t: c_n ↦ c_n (i n / base_q)^r."""
        if isinstance(r, bool) or not isinstance(r, Integral) or r < 0:
            raise ValueError(f"Derivative order must be a non-negative int, got {r!r}.")
        if r == 0:
            return self
        scale = (self._frequencies / self._base_q) ** int(r)
        coefficients = self._coefficients * scale * i_power(int(r))
        return TrigPolynomial._from_arrays(self._base_q, self._frequencies, coefficients)

    def rescale(self, m: int) -> "TrigPolynomial":
        """Same function written over base m·base_q (frequencies n ↦ m·n)."""
        if isinstance(m, bool) or not isinstance(m, Integral) or m < 1:
            raise ValueError(f"Rescale factor must be a positive int, got {m!r}.")
        if m == 1:
            return self
        return TrigPolynomial._from_arrays(self._base_q * int(m), self._frequencies * int(m), self._coefficients.copy())

    def reflect(self) -> "TrigPolynomial":
        """p(-t): frequencies negated."""
        order = np.argsort(-self._frequencies)
        return TrigPolynomial._from_arrays(self._base_q, -self._frequencies[order], self._coefficients[order])


def from_distribution(d: LatticeDistribution) -> TrigPolynomial:
    """The characteristic function φ_X(t) = E e^{itX}: coefficient p_k at frequency k/q."""
    return TrigPolynomial(d.q, {k: float(p) for k, p in d.items()})


def multiply(a: TrigPolynomial, b: TrigPolynomial) -> TrigPolynomial:
    return a.multiply(b)


def differentiate(p: TrigPolynomial, r: int) -> TrigPolynomial:
    return p.differentiate(r)


def evaluate(p: TrigPolynomial, t: ArrayLike) -> Union[complex, np.ndarray]:
    return p.evaluate(t)
