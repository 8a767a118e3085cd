"""Exception hierarchy shared by every module.

The CLI maps each family to its own exit code, so callers can tell a bad
configuration from a numerical refusal.
"""


class ZetaMomentError(Exception):
    """Base class for all package errors."""


class DomainError(ZetaMomentError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class OutOfRangeError(DomainError):
    """Argument exceeds the range covered by a precomputed table."""


class PrecisionError(ZetaMomentError):
    """Requested accuracy cannot be met at the configured precision."""

    def __init__(self, message, required_digits=None, available_digits=None):
        super().__init__(message)
        self.required_digits = required_digits
        self.available_digits = available_digits


class ResourceError(ZetaMomentError):
    """Work or memory requirement beyond the configured cap."""


class UncertifiedError(ZetaMomentError):
    """Operation needs certified data and received something else."""
