"""Exception types raised across the package."""


class DomainError(ValueError):
    """A price or rate lies outside the admissible range of a demand curve."""


class RejectedInstanceError(ValueError):
    """The instance is outside the admissible family (non-concave profit rate)."""


class ConvergenceError(RuntimeError):
    """Value iteration did not reach the requested span tolerance."""

    def __init__(self, message, iterations=None, span=None):
        super().__init__(message)
        self.iterations = iterations
        self.span = span


class StructuralViolation(RuntimeError):
    """A converged solution breaks the monotone-rate / concave-bias structure."""


class GuaranteeViolation(ArithmeticError):
    """A numerical cross-check between two independent computations failed."""
