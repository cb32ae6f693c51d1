"""Exception hierarchy shared by the solver modules and the CLI."""


class MixfracError(Exception):
    """Base class for all package errors."""


class ConfigError(MixfracError, ValueError):
    """Malformed or out-of-range run configuration."""


class GridMismatchError(MixfracError, ValueError):
    """Two fields defined on different grids were combined."""


class AssumptionError(MixfracError, ValueError):
    """A hypothesis of the existence theory is violated.

    ``clause`` names the violated condition in words, e.g. ``"g'(0) = 0"``.
    """

    def __init__(self, message, clause=None, value=None):
        super().__init__(message)
        self.clause = clause
        self.value = value


class NonContractiveError(MixfracError, ArithmeticError):
    """eps * sigma >= 1, so the continuity estimate is undefined."""


class NonConvergenceError(MixfracError, RuntimeError):
    """Picard iteration hit ``max_iters`` with the residual above ``tol``."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class BallExitError(MixfracError, RuntimeError):
    """An iterate left the closed H^2 ball of radius rho."""


class IntervalExitError(MixfracError, RuntimeError):
    """u0 + v left the interval on which the C^2 budget of g is certified."""
