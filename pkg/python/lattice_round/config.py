"""
Tolerances and run configuration.

A ``Tolerances`` instance is a context manager that becomes the active set for the current thread/task via
a ``ContextVar``. Library code reads ``get_active_tolerances()`` and never
takes tolerance arguments it would have to thread through every call.
"""

from contextvars import ContextVar, Token
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class Tolerances:
    """
    Numerical acceptance thresholds.

    Attributes:
        moment: Formula vs oracle moment residual, scaled by max(1, |oracle|).
        imaginary: Largest acceptable imaginary residue before real-part
            extraction, scaled by max(1, |real part|).
        charfun: Formula vs oracle characteristic function residual.
        identity: Residual for the reciprocal-sine-square identity, scaled by q**2.
        exact: Tolerance for exact (rational) checks. Anything but 0 is a bug.
    """
    moment: float = 1e-8
    imaginary: float = 1e-9
    charfun: float = 1e-10
    identity: float = 1e-9
    exact: float = 0.0

    def __post_init__(self):
        for name in ("moment", "imaginary", "charfun", "identity", "exact"):
            if getattr(self, name) < 0:
                raise ValueError(f"Tolerance '{name}' must be non-negative.")
        # Token storage on a frozen dataclass: bypass __setattr__.
        object.__setattr__(self, "_tokens", [])

    def with_overrides(self, **overrides) -> "Tolerances":
        return replace(self, **overrides)

    def __enter__(self) -> "Tolerances":
        if self._tokens:
            raise RuntimeError("Tolerances context is not re-entrant.")
        self._tokens.append(_active_tolerances.set(self))
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        token: Token = self._tokens.pop()
        _active_tolerances.reset(token)


DEFAULT_TOLERANCES = Tolerances()

_active_tolerances: ContextVar[Tolerances] = ContextVar("active_tolerances")


def get_active_tolerances() -> Tolerances:
    """Returns the innermost active Tolerances, or the defaults outside any context."""
    try:
        return _active_tolerances.get()
    except LookupError:
        return DEFAULT_TOLERANCES


@dataclass(frozen=True)
class SweepConfig:
    """
    Grid for the Sheppard-correction sweep.

    Attributes:
        q_values: Odd lattice denominators to visit.
        n_values: Numbers of summands.
        s_max: Largest integer weight; weights range over 1..s_max.
        samples: None for the full grid, otherwise a seeded subsample size.
        seed: Seed for the subsample.
        workers: 1 evaluates in-process, >1 uses a process pool per chunk.
        chunk_size: Grid points per chunk; None means one chunk.
    """
    q_values: Tuple[int, ...] = tuple(range(3, 32, 2))
    n_values: Tuple[int, ...] = (2, 3)
    s_max: int = 6
    samples: Optional[int] = None
    seed: int = DEFAULT_SEED
    workers: int = 1
    chunk_size: Optional[int] = None

    def __post_init__(self):
        if any(q < 1 or q % 2 == 0 for q in self.q_values):
            raise ValueError(f"Sweep q_values must be odd positive integers, got {self.q_values}.")
        if any(n < 1 for n in self.n_values):
            raise ValueError(f"Sweep n_values must be positive, got {self.n_values}.")
        if self.s_max < 1:
            raise ValueError("Sweep s_max must be at least 1.")
        if self.samples is not None and self.samples < 0:
            raise ValueError("Sweep samples must be non-negative.")
        if self.workers < 1:
            raise ValueError("Sweep workers must be at least 1.")
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ValueError("Sweep chunk_size must be positive.")


@dataclass(frozen=True)
class VerifyConfig:
    """Grids and seeds for the verification suite (see testing.runner.run_all)."""
    q_max: int = 12
    seed: int = DEFAULT_SEED
    samples: int = 200
    identity_q_max: int = 500
    e0_q_max: int = 50
    kernel_q_max: int = 20
    max_abs_k: int = 50
    max_denominator: int = 1000
    sheppard: SweepConfig = field(default_factory=lambda: SweepConfig(samples=500))
    inject_fault: bool = False

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("Seed must be an unsigned 64-bit integer.")
        if self.samples < 0:
            raise ValueError("samples must be non-negative.")
        if self.max_abs_k < 0 or self.max_denominator < 1:
            raise ValueError("max_abs_k must be >= 0 and max_denominator >= 1.")
