"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of the operation."""


class CapacityError(ValueError):
    """A size parameter exceeds a combinatorial-explosion cap."""


class ConfigurationError(ValueError):
    """A model or driver lacks the data needed for the requested computation."""


class InsufficientDataError(ValueError):
    """Too few samples to form the requested estimate."""


class ValidationError(ValueError):
    """An experiment configuration violates its invariants.

    Carries the full list of violations so callers can report them all at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NumericalError(RuntimeError):
    """An iterative numerical routine failed to converge."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)
