"""
Lattice Round: exact rounding analysis for lattice random variables.
"""
# Expose the primary user-facing objects.
from .charfun import charfun_rounded, h_q, hh_q
from .config import SweepConfig, Tolerances, VerifyConfig
from .errors import (
    InvalidDistributionError,
    LatticeMismatchError,
    LatticeRoundError,
    PrecisionWarning,
    PreconditionError,
    SpecFormatError,
)
from .lattice import (
    LatticeDistribution,
    RoundingMode,
    convolve,
    make_distribution,
    negate,
    point_mass,
    round_distribution,
    scale_by_integer,
    uniform_U,
    uniform_Utilde,
)
from .moments import MomentReport, mean_rounded, moment_rounded, second_moment_rounded
from .sheppard import SheppardReport, sheppard_report
from .trigpoly import TrigPolynomial, from_distribution

# Define package metadata
__version__ = "0.1.0"

__all__ = [
    "InvalidDistributionError",
    "LatticeDistribution",
    "LatticeMismatchError",
    "LatticeRoundError",
    "MomentReport",
    "PrecisionWarning",
    "PreconditionError",
    "RoundingMode",
    "SheppardReport",
    "SpecFormatError",
    "SweepConfig",
    "Tolerances",
    "TrigPolynomial",
    "VerifyConfig",
    "charfun_rounded",
    "convolve",
    "from_distribution",
    "h_q",
    "hh_q",
    "make_distribution",
    "mean_rounded",
    "moment_rounded",
    "negate",
    "point_mass",
    "round_distribution",
    "scale_by_integer",
    "second_moment_rounded",
    "sheppard_report",
    "uniform_U",
    "uniform_Utilde",
]
