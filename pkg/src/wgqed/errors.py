"""Exception and warning types raised by the library."""

from __future__ import annotations


class InvalidParameterError(ValueError):
    """A physical or numerical input is outside its admissible range."""


class StabilityError(ArithmeticError):
    """A Laplace-space pole sits on or above the integration contour.

    The offending pole is kept on the instance so callers (and the CLI) can
    report it.
    """

    def __init__(self, message: str, pole: complex | None = None):
        super().__init__(message)
        self.pole = pole


class ConsistencyError(ArithmeticError):
    """An internal self-consistency check failed beyond its tolerance."""


class TruncationWarning(UserWarning):
    """A probability table misses more than the allowed mass."""
