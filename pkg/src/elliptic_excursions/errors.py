"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: parameter and positivity problems are
user errors (exit 2), the rest are numerical failures (exit 3).
"""


class ExcursionError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(ExcursionError, ValueError):
    """An input lies outside the supported parameter domain."""


class PositivityError(ExcursionError):
    """An operation that needs a genuine probability measure got uncertified parameters."""


class NumericalError(ExcursionError, ArithmeticError):
    """Base class for failures of the numerics themselves."""


class AccuracyError(NumericalError):
    """A series did not reach the requested tolerance within its term cap."""


class DomainError(NumericalError, ValueError):
    """A point lies outside the domain where a formula is defined."""


class PoleError(NumericalError, ZeroDivisionError):
    """A denominator factor vanished exactly.

    ``index`` names the offending factor (1..5 for elementary weights, or a
    block label for transition weights).
    """

    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index
