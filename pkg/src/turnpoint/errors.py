"""Exception types raised across the package."""


class TurnpointError(Exception):
    """Base class for all package errors."""


class ConfigError(TurnpointError, ValueError):
    """Invalid mesh, problem, solver or plan configuration."""


class DomainError(TurnpointError, ValueError):
    """A function was evaluated outside its mathematical domain."""


class DimensionError(TurnpointError, ValueError):
    """Vector or matrix size does not match the mesh."""


class SingularMatrix(TurnpointError, ArithmeticError):
    """A pivot vanished during tridiagonal elimination."""


class NonConvergence(TurnpointError, RuntimeError):
    """Newton iteration hit its iteration cap.

    The best iterate seen and its residual are kept on the exception so that
    callers can still inspect them.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class MissingExactSolution(TurnpointError, LookupError):
    """An error report was requested for a problem without exact solution."""
