"""Exception types shared across the toolkit."""

from __future__ import annotations


class ParseError(ValueError):
    """A line of an input file violated its grammar.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ValueError):
    """Input parsed but is semantically unacceptable (duplicates, bad coverage, ...)."""


class UndefinedMetricError(ValueError):
    """The requested metric has no value on this input (empty class, no scored speech)."""


class ConfigurationError(ValueError):
    """A configuration value or selection expression is not understood."""
