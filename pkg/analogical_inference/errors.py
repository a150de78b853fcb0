"""Error kinds raised across the package.

Every error derives from :class:`AnalogyError` and from the builtin that a
caller would naturally catch, so ``except ValueError`` keeps working.
"""
from typing import Optional, Tuple


class AnalogyError(Exception):
    """Base class for every error raised by this package."""


class UsageError(AnalogyError, ValueError):
    """Bad arguments: wrong dimensions, out-of-range parameters, unknown commands."""


class DomainError(AnalogyError, ValueError):
    """A value lies outside the domain an operation is defined on."""


class InputError(AnalogyError, ValueError):
    """An input file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[str] = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ConvergenceError(AnalogyError, RuntimeError):
    """An iterative search did not find what it was looking for."""

    def __init__(self, message: str, interval: Tuple[float, float]):
        self.interval = interval
        super().__init__(f"{message} (searched interval [{interval[0]}, {interval[1]}])")


class ResourceError(AnalogyError, RuntimeError):
    """The requested exhaustive enumeration is too large."""


class FitError(AnalogyError, RuntimeError):
    """A model could not be fitted to the given data."""


class CoverageError(AnalogyError, ValueError):
    """A domain point lacks the analogical root an operation needs."""


class UnsolvableError(AnalogyError, ValueError):
    """No solvable analogical triple exists for the requested target."""


class PreconditionError(AnalogyError, ValueError):
    """A verification precondition does not hold for the given inputs."""


class ConstructionError(AnalogyError, ValueError):
    """A requested test construction cannot be built."""


class OutputError(AnalogyError, OSError):
    """A report could not be written."""


class BoundViolation(AnalogyError, AssertionError):
    """An error bound that must hold was exceeded."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)
