"""Exception hierarchy.

``ValidationError`` subclasses map to CLI exit code 1, ``NumericalError``
to exit code 2.
"""

from __future__ import annotations


class ZtsegError(Exception):
    """Base class for all engine errors."""


class ValidationError(ZtsegError, ValueError):
    """Bad input data or configuration."""


class ParseError(ValidationError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class OrderingError(ValidationError):
    def __init__(self, event_id: str, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}event {event_id!r}: {message}")
        self.event_id = event_id
        self.line = line


class ConfigError(ValidationError):
    pass


class CoverageError(ValidationError):
    """Evaluation truth references an identity the audit never saw."""


class UnknownEventError(ValidationError, KeyError):
    """A verdict references an event id with no recorded decision."""

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class StateError(ZtsegError, RuntimeError):
    pass


class NumericalError(ZtsegError, ArithmeticError):
    """Cholesky factorisation failed even after regularisation."""
