"""Exception hierarchy; each class maps to one CLI exit code."""


class RoughVolError(Exception):
    exit_code = 3


class ValidationError(RoughVolError, ValueError):
    """Bad parameters or configuration."""

    exit_code = 1


class DataError(RoughVolError, ValueError):
    """Unreadable, malformed or insufficient input data."""

    exit_code = 2


class NumericError(RoughVolError, ArithmeticError):
    """A computation hit an undefined value (zero variance, log of zero, ...)."""

    exit_code = 3
