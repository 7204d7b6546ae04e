"""
Exception hierarchy for the BUGS regression package.

Every error also derives from the builtin a caller would naturally catch
(``ValueError`` for bad inputs, ``RuntimeError`` for sampler failures), so code
written against the builtins keeps working. Errors raised inside worker
processes are re-raised in the parent with their original type, so each class
pickles its constructor arguments.
"""

from typing import Any, Optional, Tuple


class BugsError(Exception):
    """Base class for all package errors"""


class NotPositiveDefiniteError(BugsError, ValueError):
    """Cholesky factorization hit a non-positive pivot"""

    def __init__(self, pivot: int, message: Optional[str] = None) -> None:
        self.pivot = pivot
        self.message = message
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")

    def __reduce__(self) -> Tuple[Any, ...]:
        return (type(self), (self.pivot, self.message))


class SamplerAbort(BugsError, RuntimeError):
    """A chain produced a non-finite or out-of-support state"""

    def __init__(self, iteration: int, parameter: str, detail: str = "") -> None:
        self.iteration = iteration
        self.parameter = parameter
        self.detail = detail
        message = f"sampler aborted at iteration {iteration}: invalid {parameter}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)

    def __reduce__(self) -> Tuple[Any, ...]:
        return (type(self), (self.iteration, self.parameter, self.detail))


class DataFormatError(BugsError, ValueError):
    """Malformed delimited input, located by file row and column when known"""

    def __init__(
        self, message: str, row: Optional[int] = None, column: Optional[str] = None
    ) -> None:
        self.reason = message
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} at {', '.join(location)}"
        super().__init__(message)

    def __reduce__(self) -> Tuple[Any, ...]:
        return (type(self), (self.reason, self.row, self.column))


class ConfigError(BugsError, ValueError):
    """Invalid configuration file, key or value"""
