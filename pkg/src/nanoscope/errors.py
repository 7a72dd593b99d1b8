"""Exception hierarchy shared across the package.

Every error raised by library code derives from NanoscopeError so that the
CLI and the HTTP layer can map failures onto exit codes / status codes
without string matching.
"""

from __future__ import annotations


class NanoscopeError(Exception):
    """Base class for all errors raised by this package."""


class DataFormatError(NanoscopeError):
    """Malformed or inconsistent input data (files, configs, records)."""


class UnknownEntityError(DataFormatError):
    """A referenced user or interest does not exist."""


class StaleVersionError(NanoscopeError):
    """An optimistic-concurrency update carried an outdated version."""


class NumericalError(NanoscopeError):
    """An estimation step could not produce a usable result."""


class FitError(NumericalError):
    """Too few points, degenerate geometry, or a non-decreasing curve."""


class BootstrapError(NumericalError):
    """Too many resamples failed to produce a valid fit."""
