"""Exception types shared across the package."""


class MultApproxError(Exception):
    """Base class for all package errors."""


class DomainError(MultApproxError, ValueError):
    """An argument lies outside the domain of an operation."""


class RangeViolation(DomainError):
    """An approximation function takes a value at or above its range cap."""


class InconclusiveError(MultApproxError):
    """The series-convergence heuristic could not classify a probe."""


class BudgetExceeded(MultApproxError):
    """A computation would exceed its configured work budget."""


class DegenerateFit(MultApproxError):
    """A regression was asked to fit data carrying no information."""
