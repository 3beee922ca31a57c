"""
Exception hierarchy for the survival engine.

Each class carries the process exit code the CLI maps it to, so the
router in app.py can translate any failure in one place.
"""

from typing import Optional


class SurvivalError(Exception):
    """Base class for every error raised by this package."""
    exit_code = 1


class ArgumentError(SurvivalError, ValueError):
    """Invalid arguments to a pure function (length mismatch, empty batch)."""
    exit_code = 2


class ConfigError(SurvivalError, ValueError):
    """Invalid configuration or a shape that contradicts a declared model."""
    exit_code = 2


class UsageError(SurvivalError, RuntimeError):
    """API used out of order, e.g. backward before forward."""
    exit_code = 2


class DataFormatError(SurvivalError):
    """A binary or text input does not match its documented layout."""
    exit_code = 3

    def __init__(self, message: str, offset: Optional[int] = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class StorageError(SurvivalError, OSError):
    """A path could not be read or written."""
    exit_code = 3


class NumericAbort(SurvivalError, FloatingPointError):
    """A loss, activation or gradient became NaN or infinite during training."""
    exit_code = 4

    def __init__(self, message: str, batch_index: Optional[int] = None):
        if batch_index is not None:
            message = f"{message} (batch {batch_index})"
        super().__init__(message)
        self.batch_index = batch_index


class CheckFailure(SurvivalError):
    """Finite-difference audit exceeded its tolerance."""
    exit_code = 5

    def __init__(self, op: str, max_rel_err: float, tolerance: float):
        super().__init__(
            f"gradient check failed for {op}: max rel err {max_rel_err:.3e} > {tolerance:.0e}"
        )
        self.op = op
        self.max_rel_err = max_rel_err
        self.tolerance = tolerance
