"""Exception types shared across the package."""


class ExtremeFitError(Exception):
    """Base class for all errors raised by extremefit."""


class DomainError(ExtremeFitError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class EvaluationError(ExtremeFitError):
    """A numerical evaluation produced a non-finite value where one is required."""


class DegenerateSampleError(ExtremeFitError):
    """The data carry no usable variation (e.g. all observations equal)."""


class InitializationError(ExtremeFitError):
    """An iterative routine cannot start from the supplied initial point."""


class FitError(ExtremeFitError):
    """Model fitting failed to produce a usable result."""
