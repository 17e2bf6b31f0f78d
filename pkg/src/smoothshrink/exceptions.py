"""Exception types shared across the package."""


class SmoothShrinkError(Exception):
    """Base class for all package errors."""


class DomainError(SmoothShrinkError, ValueError):
    """An argument is outside the mathematically valid domain."""


class NotPositiveDefinite(SmoothShrinkError):
    """A matrix required to be positive definite is not."""


class OutOfDomain(SmoothShrinkError, ValueError):
    """Covariate values fall outside the spline domain (no extrapolation)."""


class RankDeficient(SmoothShrinkError, ValueError):
    """A matrix expected to have full column rank is numerically rank deficient."""


class NoConvergence(SmoothShrinkError):
    """An iterative procedure did not converge within its iteration budget."""


class SliceFailure(SmoothShrinkError):
    """A slice update exhausted its shrinkage budget (pathological target)."""


class QuadratureFailure(SmoothShrinkError):
    """Adaptive quadrature did not reach the requested tolerance."""


class GridMismatch(SmoothShrinkError, ValueError):
    """Two grid functions do not share a common grid."""


class ConfigError(SmoothShrinkError, ValueError):
    """A run configuration is invalid or inconsistent."""


class MalformedRow(SmoothShrinkError, ValueError):
    """A data file row could not be parsed."""

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class IncompleteDay(SmoothShrinkError, ValueError):
    """A day in an energy file does not have exactly 96 readings."""

    def __init__(self, day: str, count: int):
        self.day = day
        self.count = count
        super().__init__(f"day {day}: expected 96 readings, found {count}")
