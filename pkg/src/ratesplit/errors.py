"""Exception types raised across the package."""


class RateSplitError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(RateSplitError, ValueError):
    pass


class InvalidConfigurationError(RateSplitError, ValueError):
    """A dimensional or structural constraint of a configuration is violated."""


class NotPSDError(RateSplitError, ValueError):
    pass


class DegenerateInputError(RateSplitError, ValueError):
    """Input that makes a precoder or weight undefined (zero vector, tau = 1, ...)."""


class IllConditionedError(RateSplitError, ArithmeticError):
    pass


class ConvergenceError(RateSplitError, RuntimeError):
    """Fixed-point iteration did not converge.

    Attributes
    ----------
    residuals : list of float
        Relative change recorded at each iteration.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals or [])
