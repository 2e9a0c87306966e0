"""
Exception types raised by lattice_round.

Structural problems (bad distributions, mismatched lattices, unparsable
spec files, violated preconditions) are ``ValueError`` subclasses so that
callers catching the builtin keep working. The CLI maps them to exit codes.
"""

from typing import Optional


class LatticeRoundError(Exception):
    """Common base for every error raised by this package."""


class InvalidDistributionError(LatticeRoundError, ValueError):
    """A probability mass function violates its invariants (sign, total mass, lattice)."""


class LatticeMismatchError(LatticeRoundError, ValueError):
    """Two objects living on different lattices (1/q)Z were combined."""

    def __init__(self, left_q: int, right_q: int, what: str = "operands"):
        super().__init__(
            f"Lattice mismatch between {what}: q={left_q} vs q={right_q}. "
            "Refine both to a common lattice first (see common_lattice)."
        )
        self.left_q = left_q
        self.right_q = right_q


class PreconditionError(LatticeRoundError, ValueError):
    """An operation was called outside its documented domain."""


class SpecFormatError(LatticeRoundError, ValueError):
    """A distribution spec document could not be parsed."""

    def __init__(self, message: str, *, field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
        self.field = field
        self.line = line


class PrecisionWarning(UserWarning):
    """Floating-point residue in a formula path exceeded the active tolerance."""
