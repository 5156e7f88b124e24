"""Failure kinds shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class HypothesisError(ValueError):
    """Inputs are valid but the theoretical result does not apply to them.

    Kept separate from DomainError so callers can tell a bad argument from a
    configuration the theory does not cover.
    """


class DatasetParseError(ValueError):
    """Malformed dataset file; carries 1-based line and column."""

    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
