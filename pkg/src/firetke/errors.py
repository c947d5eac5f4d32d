"""Exception hierarchy shared by all firetke modules."""


class FireTkeError(Exception):
    """Base class for every error raised by firetke."""


class ParseError(FireTkeError, ValueError):
    """A sensor CSV could not be read (bad header, too many bad rows)."""


class AlignmentError(FireTkeError, ValueError):
    pass


class BaselineError(FireTkeError, ValueError):
    pass


class StatsError(FireTkeError, ValueError):
    """Statistic is undefined for the given input (e.g. zero variance)."""


class ConfigError(FireTkeError, ValueError):
    pass


class FactorizationError(FireTkeError, ArithmeticError):
    """Kernel matrix stayed non positive-definite after jitter escalation."""


class ConvergenceError(FireTkeError, ArithmeticError):
    def __init__(self, message, weights=None, residual=None, sweeps=None):
        super().__init__(message)
        self.weights = weights
        self.residual = residual
        self.sweeps = sweeps


class DivergenceError(FireTkeError, ArithmeticError):
    """Training loss became non-finite."""
