"""Exception hierarchy.

Each class carries the CLI exit status it maps to, so command handlers can
translate library failures without a lookup table.
"""


class KFLocalError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class InputError(KFLocalError, ValueError):
    """Malformed or out-of-domain input (non-finite frequency, bad parameter)."""

    exit_code = 1


class SingularityError(KFLocalError, ZeroDivisionError):
    """A rational symbol was evaluated at (or numerically on top of) a pole."""

    exit_code = 3

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class AssumptionViolation(KFLocalError):
    """The plant breaks one of the structural assumptions of the theory."""

    exit_code = 2


class PreconditionError(AssumptionViolation):
    """An operation needs a stronger hypothesis than the plant satisfies (e.g. C = 1)."""


class NumericalError(KFLocalError, ArithmeticError):
    """Tolerance, symmetry or convergence failure."""

    exit_code = 3


class GridError(NumericalError):
    """The frequency or spatial grid is too coarse or too short for the request."""


class DivergenceError(NumericalError):
    """An asymptotic limit is infinite (non-integrable tail, unbounded gain)."""
