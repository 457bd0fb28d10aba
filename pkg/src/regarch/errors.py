"""Exception hierarchy shared by all modules."""


class RegarchError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RegarchError, ValueError):
    """Input data violates a type invariant."""


class AlignmentError(RegarchError, ValueError):
    """Dated series cannot be matched up."""


class InsufficientDataError(RegarchError, ValueError):
    """Too few observations for the requested computation."""


class DegenerateVarianceError(RegarchError, ValueError):
    """A statistic is undefined because the sample variance is zero."""


class BandwidthError(RegarchError, ValueError):
    """Realized kernel bandwidth is too large for the number of bars."""


class ParameterError(RegarchError, ValueError):
    """Model parameters violate their constraints."""


class NumericalError(RegarchError, ArithmeticError):
    """A recursion produced a non-finite state."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConvergenceError(RegarchError, RuntimeError):
    """Optimization failed after all starts; ``best`` holds the incumbent."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConditioningError(RegarchError, ArithmeticError):
    """Hessian is singular or too badly conditioned to invert."""

    def __init__(self, message, condition_number=float("nan")):
        super().__init__(message)
        self.condition_number = condition_number
