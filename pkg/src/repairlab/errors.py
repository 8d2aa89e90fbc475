"""Exception types shared across the toolkit."""

from __future__ import annotations


class RepairLabError(Exception):
    """Base class for all toolkit errors."""


class IllDefinedTransformationError(RepairLabError):
    """A transformation with overlapping (non-commuting) members was applied."""


class PoolTooLargeError(RepairLabError):
    """The brute-force oracle refused a pool beyond its enumeration guard."""


class ParseError(RepairLabError):
    """Syntax error in a formula, selector, or spec text."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class SchemaError(RepairLabError):
    """An input file violated its documented schema."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class EvalError(RepairLabError):
    """A formula could not be evaluated against the given structure."""


class UnboundVariableError(EvalError):
    """A variable was used outside any binder."""


class SortMismatchError(EvalError):
    """A term or comparison mixed values from incompatible sorts."""


class UnknownCellError(RepairLabError):
    """An endomorphism addressed a cell the structure does not have."""
