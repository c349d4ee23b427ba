"""Exception hierarchy. Public functions raise these, never bare ValueError."""

from __future__ import annotations


class HeatflowError(Exception):
    """Base error for this package."""


class InvalidArgumentError(HeatflowError, ValueError):
    """An argument violates a documented precondition."""


class NumericFailureError(HeatflowError, ArithmeticError):
    """An integrand produced a non-finite value inside the integration domain."""

    def __init__(self, message: str, node: float | None = None):
        super().__init__(message)
        self.node = node


class ConvergenceFailureError(HeatflowError):
    """A refinement loop stopped shrinking its error estimate before reaching tolerance."""


class SingularDensityError(HeatflowError):
    """Density evaluation requested on a mixture with a zero-variance component."""


class UnsupportedModelError(HeatflowError):
    """The requested computation is not available for this model shape or dimension."""


class BracketError(HeatflowError):
    """A bisection bracket does not straddle the sought transition."""


class CheckFailedError(HeatflowError):
    """A numerical identity or inequality asserted by an operation was violated."""


class ParseError(HeatflowError):
    """Text input (model or config file) failed to parse."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ModelParseError(ParseError):
    """Model file failed to parse."""


class ConfigParseError(ParseError):
    """Config file failed to parse."""
