"""Exception types raised by certqp."""


class CertQPError(Exception):
    """Base class for all certqp errors."""


class NotPositiveDefinite(CertQPError, ValueError):
    """A Cholesky pivot was not strictly positive."""

    def __init__(self, message="matrix is not positive definite", pivot=None):
        super().__init__(message)
        self.pivot = pivot


class DimensionMismatch(CertQPError, ValueError):
    """Operand shapes are inconsistent."""


class NonFiniteData(CertQPError, ValueError):
    """Input contains NaN or infinite entries."""


class InvalidTolerance(CertQPError, ValueError):
    """Stopping tolerance outside the admissible range (0, 2n)."""


class SolverError(CertQPError, RuntimeError):
    """A solver failure tagged with the closed-loop step at which it occurred."""

    def __init__(self, step, cause):
        super().__init__(f"solver failed at step {step}: {cause}")
        self.step = step
        self.cause = cause
