"""
codedcomp Errors

Exception hierarchy shared by the library and the command-line front end.
Each class carries the process exit code the CLI reports for it.
"""

from typing import Any, List, Optional


class CodedCompError(Exception):
    """Base class for all codedcomp failures."""

    exit_code: int = 4


class InputError(CodedCompError, ValueError):
    """Parameter, shape or precondition violation."""

    exit_code = 2


class ConfigError(InputError):
    """Invalid configuration."""


class CapacityError(InputError):
    """Requested construction exceeds the configured size limit."""


class SamplingError(CodedCompError):
    """Rejection sampling ran out of attempts."""

    exit_code = 3


class NumericError(CodedCompError):
    """Non-finite values, failed quadrature or failed root finding."""

    exit_code = 3

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BudgetExhausted(NumericError):
    """A sweep or experiment hit its evaluation budget; `partial` holds finished rows."""

    def __init__(self, message: str, partial: Optional[List[Any]] = None):
        super().__init__(message)
        self.partial = partial or []


class ConstructionError(CodedCompError):
    """Internal construction invariant failed (e.g. projected rank)."""


class MonotonicityError(CodedCompError):
    """Decodability was not monotone along a worker arrival order."""
