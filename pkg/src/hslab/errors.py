"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An argument lies outside the admissible parameter region."""


class ExtrapolationError(DomainError):
    """A sampled function was asked for values outside its sampled range."""


class AccuracyError(ArithmeticError):
    """A numerical procedure could not meet its accuracy target.

    ``estimate`` carries whatever error indicator triggered the failure
    (tail size, grid-to-grid change, ...), ``details`` any extra context.
    """

    def __init__(self, message, estimate=None, details=None):
        super().__init__(message)
        self.estimate = estimate
        self.details = details or {}


class ResolutionError(AccuracyError):
    """The discretization is too coarse for the requested operation."""


class FitError(AccuracyError):
    """A least-squares fit had too few usable points."""
