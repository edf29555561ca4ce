"""Exception types raised across the package."""


class HJCError(Exception):
    """Base class for all package errors."""


class ParameterError(HJCError, ValueError):
    """A physical or numerical parameter is outside its admissible range."""


class DomainError(HJCError, ValueError):
    """A basis state or index lies outside the truncated Hilbert space."""


class BasisSizeError(HJCError, OverflowError):
    """The truncated basis is too large to index."""

    def __init__(self, dim):
        self.dim = dim
        super().__init__(f"basis dimension {dim} overflows the 64-bit index type")


class ConvergenceError(HJCError, RuntimeError):
    """The iterative eigensolver did not reach the requested tolerance."""

    def __init__(self, message, best_residual=float("nan"), iterations=0):
        self.best_residual = best_residual
        self.iterations = iterations
        super().__init__(f"{message} (best residual {best_residual:.3e} after {iterations} iterations)")
