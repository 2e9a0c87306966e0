"""
Exact lattice-valued random variables and the brute-force rounding oracle.

A LatticeDistribution is a finite PMF on (1/q)Z with Fraction probabilities:
``pmf[k] = P(X = k/q)``. Everything here is exact rational arithmetic, so
the oracle side of every formula comparison carries no rounding error.

Architecture Overview:
1. RoundingMode: the four integer roundings, evaluated on lattice points
   k/q with integer floor division only (ties never touch a float).
2. LatticeDistribution: immutable value object. Built through
   ``make_distribution`` (validating) or internally through
   ``_from_normalized`` (trusted, already-normalized data).
3. Transformations: negate, scale, refine, translate, convolve. Each returns
   a new distribution; nothing is mutated after construction.
4. Oracle: ``round_distribution`` and ``exact_moment``.
"""

import enum
import math
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

from .errors import InvalidDistributionError, LatticeMismatchError

Rational = Fraction
ProbabilityLike = Union[Fraction, int, str]


class RoundingMode(enum.Enum):
    """Rounding of a real x to an integer."""
    FLOOR = "floor"
    CEIL = "ceil"
    NEAREST_UP = "nearest-up"      # floor(x + 1/2): ties go to the larger integer
    NEAREST_DOWN = "nearest-down"  # -round_up(-x): ties go to the smaller integer

    @property
    def mirror(self) -> "RoundingMode":
        """The mode M' with M(x) = -M'(-x)."""
        return _MIRRORS[self]

    @property
    def is_nearest(self) -> bool:
        return self in (RoundingMode.NEAREST_UP, RoundingMode.NEAREST_DOWN)

    @property
    def is_mirrored(self) -> bool:
        """True for the modes that are derived from Floor / NearestUp by reflection."""
        return self in (RoundingMode.CEIL, RoundingMode.NEAREST_DOWN)

    def round_lattice_point(self, k: int, q: int) -> int:
        """Rounds x = k/q exactly."""
        if self is RoundingMode.FLOOR:
            return k // q
        if self is RoundingMode.CEIL:
            return -((-k) // q)
        if self is RoundingMode.NEAREST_UP:
            # floor(k/q + 1/2) = floor((2k + q) / 2q)
            return (2 * k + q) // (2 * q)
        return -((q - 2 * k) // (2 * q))

    def __call__(self, x: ProbabilityLike) -> int:
        """Rounds an exact rational (or int) value."""
        x = Fraction(x)
        return self.round_lattice_point(x.numerator, x.denominator)

    @classmethod
    def parse(cls, text: str) -> "RoundingMode":
        """Parses the CLI spelling (case-insensitive, '_' accepted for '-')."""
        key = text.strip().lower().replace("_", "-")
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"Unknown rounding mode '{text}'. Expected one of: {valid}.") from None


_MIRRORS = {
    RoundingMode.FLOOR: RoundingMode.CEIL,
    RoundingMode.CEIL: RoundingMode.FLOOR,
    RoundingMode.NEAREST_UP: RoundingMode.NEAREST_DOWN,
    RoundingMode.NEAREST_DOWN: RoundingMode.NEAREST_UP,
}


class LatticeDistribution:
    """
    Distribution of a random variable X with qX integer-valued and finite support.

    Only entries with positive probability are stored. Instances are
    immutable and hashable; equality is exact.
    """

    __slots__ = ("_q", "_pmf", "_hash")

    def __init__(self, *args, **kwargs):
        raise TypeError("Use make_distribution(q, entries) to build a LatticeDistribution.")

    @classmethod
    def _from_normalized(cls, q: int, pmf: Mapping[int, Fraction]) -> "LatticeDistribution":
        """Internal: wraps data that already satisfies every invariant."""
        instance = object.__new__(cls)
        ordered = {k: pmf[k] for k in sorted(pmf) if pmf[k] != 0}
        object.__setattr__(instance, "_q", q)
        object.__setattr__(instance, "_pmf", MappingProxyType(ordered))
        object.__setattr__(instance, "_hash", None)
        return instance

    def __setattr__(self, name, value):
        raise AttributeError("LatticeDistribution is immutable.")

    @property
    def q(self) -> int:
        return self._q

    @property
    def pmf(self) -> Mapping[int, Fraction]:
        """Read-only map k -> P(X = k/q), sorted by k."""
        return self._pmf

    def items(self) -> Iterator[Tuple[int, Fraction]]:
        return iter(self._pmf.items())

    @property
    def support(self) -> Tuple[Fraction, ...]:
        """Support points as exact rationals k/q."""
        return tuple(Fraction(k, self._q) for k in self._pmf)

    def __len__(self) -> int:
        return len(self._pmf)

    def probability(self, x: ProbabilityLike) -> Fraction:
        """P(X = x) for an exact value x (0 off the lattice)."""
        x = Fraction(x)
        scaled = x * self._q
        if scaled.denominator != 1:
            return Fraction(0)
        return self._pmf.get(scaled.numerator, Fraction(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticeDistribution):
            return NotImplemented
        return self._q == other._q and dict(self._pmf) == dict(other._pmf)

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self._q, tuple(self._pmf.items()))))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{k}/{self._q}: {p}" for k, p in self._pmf.items())
        return f"LatticeDistribution(q={self._q}, {{{body}}})"

    # DSL sugar, in the spirit of Var's operator overloading.
    def __neg__(self) -> "LatticeDistribution":
        return negate(self)

    def __add__(self, other: "LatticeDistribution") -> "LatticeDistribution":
        if not isinstance(other, LatticeDistribution):
            return NotImplemented
        a, b = common_lattice(self, other)
        return convolve(a, b)

    def __rmul__(self, s: int) -> "LatticeDistribution":
        if not isinstance(s, int):
            return NotImplemented
        return scale_by_integer(self, s)

    def __reduce__(self):
        return (_restore, (self._q, tuple(self._pmf.items())))


def _restore(q: int, items: Tuple[Tuple[int, Fraction], ...]) -> LatticeDistribution:
    return LatticeDistribution._from_normalized(q, dict(items))


def _check_q(q: int, what: str = "q") -> None:
    if isinstance(q, bool) or not isinstance(q, int):
        raise InvalidDistributionError(f"Lattice denominator {what} must be an int, got {q!r}.")
    if q < 1:
        raise InvalidDistributionError(f"Lattice denominator {what} must be >= 1, got {q}.")


def make_distribution(q: int, entries: Iterable[Tuple[int, ProbabilityLike]]) -> LatticeDistribution:
    """
    Builds and validates P(X = k/q) = p for each (k, p) entry.

    Duplicate k are merged by summation. Probabilities may be Fractions,
    ints or "a/b" strings; floats are refused because they are not exact.

    Raises:
        InvalidDistributionError: q <= 0, empty entries, a negative p, or
            total mass different from 1.
    """
    _check_q(q)
    merged: Dict[int, Fraction] = {}
    count = 0
    for k, p in entries:
        count += 1
        if isinstance(k, bool) or not isinstance(k, int):
            raise InvalidDistributionError(f"Lattice index k must be an int, got {k!r}.")
        if isinstance(p, float):
            raise InvalidDistributionError(
                f"Probability {p!r} at k={k} is a float; pass a Fraction or an 'a/b' string."
            )
        try:
            prob = Fraction(p)
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise InvalidDistributionError(f"Probability {p!r} at k={k} is not a rational: {exc}") from None
        if prob < 0:
            raise InvalidDistributionError(f"Negative probability {prob} at k={k}.")
        merged[k] = merged.get(k, Fraction(0)) + prob
    if count == 0:
        raise InvalidDistributionError("A distribution needs at least one (k, p) entry.")
    total = sum(merged.values(), Fraction(0))
    if total != 1:
        raise InvalidDistributionError(f"Probabilities must sum to exactly 1, got {total}.")
    return LatticeDistribution._from_normalized(q, merged)


def point_mass(x: ProbabilityLike, q: Optional[int] = None) -> LatticeDistribution:
    """Degenerate distribution at the exact value x (on lattice 1/q, default its own denominator)."""
    x = Fraction(x)
    q = x.denominator if q is None else q
    _check_q(q)
    scaled = x * q
    if scaled.denominator != 1:
        raise InvalidDistributionError(f"{x} does not lie on the lattice (1/{q})Z.")
    return LatticeDistribution._from_normalized(q, {scaled.numerator: Fraction(1)})


def uniform_U(q: int) -> LatticeDistribution:
    """U_q: uniform on {k/q : k = 0..q-1}, the lattice points of [0, 1)."""
    _check_q(q)
    p = Fraction(1, q)
    return LatticeDistribution._from_normalized(q, {k: p for k in range(q)})


def centered_range(q: int) -> range:
    """Lattice indices of the q points of [-1/2, 1/2)."""
    if q % 2 == 0:
        return range(-q // 2, q // 2)
    return range(-(q - 1) // 2, (q - 1) // 2 + 1)


def uniform_Utilde(q: int) -> LatticeDistribution:
    """Ũ_q: uniform on the q lattice points of [-1/2, 1/2)."""
    _check_q(q)
    p = Fraction(1, q)
    return LatticeDistribution._from_normalized(q, {k: p for k in centered_range(q)})


def negate(d: LatticeDistribution) -> LatticeDistribution:
    """Distribution of -X."""
    return LatticeDistribution._from_normalized(d.q, {-k: p for k, p in d.items()})


def scale_by_integer(d: LatticeDistribution, s: int) -> LatticeDistribution:
    """Distribution of sX for a positive integer s, on the same lattice."""
    if isinstance(s, bool) or not isinstance(s, int) or s < 1:
        raise InvalidDistributionError(f"Scale factor must be a positive int, got {s!r}.")
    return LatticeDistribution._from_normalized(d.q, {s * k: p for k, p in d.items()})


def refine(d: LatticeDistribution, m: int) -> LatticeDistribution:
    """Re-expresses X on the finer lattice 1/(mq); the random variable is unchanged."""
    _check_q(m, "refinement factor m")
    if m == 1:
        return d
    return LatticeDistribution._from_normalized(d.q * m, {m * k: p for k, p in d.items()})


def common_lattice(a: LatticeDistribution, b: LatticeDistribution) -> Tuple[LatticeDistribution, LatticeDistribution]:
    """Refines both distributions to the lattice 1/lcm(a.q, b.q)."""
    q = math.lcm(a.q, b.q)
    return refine(a, q // a.q), refine(b, q // b.q)


def translate(d: LatticeDistribution, k: int) -> LatticeDistribution:
    """Distribution of X + k/q."""
    if isinstance(k, bool) or not isinstance(k, int):
        raise InvalidDistributionError(f"Translation must be an int number of lattice steps, got {k!r}.")
    return LatticeDistribution._from_normalized(d.q, {j + k: p for j, p in d.items()})


def _integer_weights(d: LatticeDistribution) -> Tuple[Dict[int, int], int]:
    """Writes the pmf over a common denominator: p_k = w_k / D."""
    denominator = 1
    for p in d.pmf.values():
        denominator = math.lcm(denominator, p.denominator)
    weights = {k: p.numerator * (denominator // p.denominator) for k, p in d.items()}
    return weights, denominator


def convolve(a: LatticeDistribution, b: LatticeDistribution) -> LatticeDistribution:
    """
    Distribution of X + Y for independent X ~ a, Y ~ b on the same lattice.

    The sum runs over integer weights with a shared denominator, so the
    result is exact without per-term Fraction normalization.

    Raises:
        LatticeMismatchError: a.q != b.q.
    """
    if a.q != b.q:
        raise LatticeMismatchError(a.q, b.q, "convolution operands")
    wa, da = _integer_weights(a)
    wb, db = _integer_weights(b)
    acc: Dict[int, int] = {}
    for ka, pa in wa.items():
        for kb, pb in wb.items():
            key = ka + kb
            acc[key] = acc.get(key, 0) + pa * pb
    denominator = da * db
    return LatticeDistribution._from_normalized(a.q, {k: Fraction(w, denominator) for k, w in acc.items()})


def convolve_all(distributions: Iterable[LatticeDistribution]) -> LatticeDistribution:
    """Independent sum of one or more distributions on a shared lattice."""
    result = None
    for d in distributions:
        result = d if result is None else convolve(result, d)
    if result is None:
        raise InvalidDistributionError("convolve_all needs at least one distribution.")
    return result


def round_distribution(d: LatticeDistribution, mode: RoundingMode) -> LatticeDistribution:
    """
    Oracle: the exact distribution of the rounded variable, on lattice q = 1.

    The mass at integer m is the sum of p_k over all k whose point k/q
    rounds to m.
    """
    acc: Dict[int, Fraction] = {}
    for k, p in d.items():
        m = mode.round_lattice_point(k, d.q)
        acc[m] = acc.get(m, Fraction(0)) + p
    return LatticeDistribution._from_normalized(1, acc)


def exact_moment(d: LatticeDistribution, r: int) -> Fraction:
    """E[X^r] as an exact rational (r >= 0)."""
    if isinstance(r, bool) or not isinstance(r, int) or r < 0:
        raise ValueError(f"Moment order must be a non-negative int, got {r!r}.")
    numerator = sum((p * k ** r for k, p in d.items()), Fraction(0))
    return numerator / d.q ** r


def variance(d: LatticeDistribution) -> Fraction:
    """Exact Var X."""
    mean = exact_moment(d, 1)
    return exact_moment(d, 2) - mean * mean
