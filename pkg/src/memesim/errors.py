"""Exception types raised across the package."""


class MemesimError(Exception):
    """Base class for all package errors."""


class ParseError(MemesimError, ValueError):
    """Malformed input text (edge lists, sidecar tables, trace files)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreconditionError(MemesimError, ValueError):
    """An operation was called with arguments outside its contract."""


class DegenerateFitError(MemesimError, ValueError):
    """The series carries no information to fit (e.g. it is constant)."""
