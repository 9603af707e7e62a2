"""Numerical toolkit for multiplicative Diophantine approximation on the 2-torus:
approximation functions, exponents of convergence, star domains and their
dyadic coverings, Fourier coefficient bounds, a divergent thin-set
construction and sampling estimators."""

__version__ = "0.1.0"

from .approx import (  # noqa: E402
    ApproxFunction,
    IndexSet,
    TorusPoint2,
    hit_count,
    is_hit,
    nearest_integer_distance,
)
from .errors import (  # noqa: E402
    BudgetExceeded,
    DegenerateFit,
    DomainError,
    InconclusiveError,
    MultApproxError,
    RangeViolation,
)
from .exponents import dimension_formulas, exponent_of_convergence  # noqa: E402
from .geometry import covering_family, dyadic_index_range, star_measure  # noqa: E402

__all__ = [
    "ApproxFunction",
    "IndexSet",
    "TorusPoint2",
    "hit_count",
    "is_hit",
    "nearest_integer_distance",
    "BudgetExceeded",
    "DegenerateFit",
    "DomainError",
    "InconclusiveError",
    "MultApproxError",
    "RangeViolation",
    "dimension_formulas",
    "exponent_of_convergence",
    "covering_family",
    "dyadic_index_range",
    "star_measure",
]
