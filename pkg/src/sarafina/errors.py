"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SarafinaError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SarafinaError, ValueError):
    """An input violates a data invariant."""


class DomainError(ValidationError):
    """A numeric argument lies outside the domain of an operation."""


class MissingYearError(ValidationError):
    """A requested year is not present in a series."""


class AlignmentError(ValidationError):
    """Two year-indexed inputs do not cover the same years."""


class ConfigError(SarafinaError):
    """A run configuration is incomplete or contradictory."""
