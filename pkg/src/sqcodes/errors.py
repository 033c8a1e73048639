"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class SqcodesError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class InputError(SqcodesError, ValueError):
    """Invalid arguments or malformed input (CLI exit code 1)."""


class NotPrimePower(InputError):
    pass


class OutOfRange(InputError):
    pass


class DivisionByZero(SqcodesError, ZeroDivisionError):
    pass


class DimensionMismatch(InputError):
    pass


class FieldMismatch(InputError):
    pass


class LengthMismatch(InputError):
    pass


class EmptyCode(InputError):
    pass


class InvalidPosition(InputError):
    pass


class DuplicatePoint(InputError):
    pass


class TooLong(InputError):
    pass


class NotFullRank(InputError):
    pass


class DomainError(InputError):
    pass


class ParseError(InputError):
    pass


class RankDeficient(InputError):
    pass


class FieldError(InputError):
    """An entry is not a valid element of the declared field."""


class BudgetExceeded(SqcodesError):
    """An exhaustive enumeration would exceed its configured cap (CLI exit code 2)."""
