"""Exception types shared across the library.

The split mirrors how callers recover: bad inputs (SpecError, ConfigError),
evaluation at a resolvent pole (PoleError), quadrature that cannot reach the
requested tolerance (ToleranceError), and integrands or modes that fail the
decay requirements of the series machinery (DecayError).
"""

from __future__ import annotations


class AbelsumError(Exception):
    """Base class for all library errors."""


class SpecError(AbelsumError, ValueError):
    """Invalid specification or argument outside the documented domain."""


class ConfigError(SpecError):
    """Malformed run configuration; carries a dotted field path when known."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


class PoleError(AbelsumError):
    """Resolvent evaluated at or too close to a characteristic number."""

    def __init__(self, message: str, pole: complex | None = None):
        self.pole = pole
        super().__init__(message)


class ToleranceError(AbelsumError):
    """Adaptive quadrature exhausted its budget; carries the best estimate."""

    def __init__(self, message: str, estimate=None, error: float | None = None):
        self.estimate = estimate
        self.error = error
        super().__init__(message)


class DecayError(AbelsumError):
    """Integrand or solution mode does not decay; lists the offenders."""

    def __init__(self, message: str, offenders=()):
        self.offenders = tuple(offenders)
        super().__init__(message)


class ExtrapolationWarning(UserWarning):
    """Evaluation relied on the counting-function tail model beyond its data."""


class ConstructionWarning(UserWarning):
    """An operator builder detected a violated side condition at samples."""
