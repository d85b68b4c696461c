"""Exception types shared across the package."""


class SpdPrivacyError(Exception):
    """Base class for all package errors."""


class DomainError(SpdPrivacyError, ValueError):
    """An input value lies outside the mathematical domain of an operation."""


class DimensionError(SpdPrivacyError, ValueError):
    """Matrix or vector shapes are inconsistent with each other."""


class NumericalError(SpdPrivacyError, RuntimeError):
    """A numerical routine failed to converge or produced unusable output."""
