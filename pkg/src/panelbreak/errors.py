"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PanelBreakError(Exception):
    """Base class for all errors raised by panelbreak."""


class InvalidInput(PanelBreakError, ValueError):
    """Input violates a documented precondition."""


class NumericalFailure(PanelBreakError, ArithmeticError):
    """An iterative numerical routine failed to converge."""


class ParseError(PanelBreakError, ValueError):
    """Malformed input file.

    ``line`` is the 1-based physical line number of the offending row, or
    ``None`` when the problem is not tied to a single line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
