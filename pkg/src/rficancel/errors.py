"""Package exception types."""


class RficancelError(Exception):
    """Base class for package errors."""


class InvalidArgument(RficancelError, ValueError):
    """Precondition violated by a caller-supplied value."""


class ShapeError(RficancelError, ValueError):
    """Mismatched lengths, rates, or matrix dimensions."""


class IllConditioned(RficancelError, ArithmeticError):
    """A linear solve would be numerically meaningless."""


class NumericError(RficancelError, ArithmeticError):
    """An iterative numeric routine failed to converge."""


class UndefinedMetric(RficancelError, ZeroDivisionError):
    """A metric's reference has zero power."""


class ConfigError(RficancelError, ValueError):
    """Scenario configuration failed validation."""
