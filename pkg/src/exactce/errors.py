"""Exception types shared across the package."""

from __future__ import annotations


class GameFormatError(ValueError):
    """A game document is malformed or violates a structural invariant."""


class CertificateError(ValueError):
    """A certificate document is malformed or is not a probability distribution."""


class CertificateMismatchError(ValueError):
    """A certificate does not fit the game it is checked against."""


class SolverError(RuntimeError):
    """A solve failed. Carries the cut transcript when one exists."""

    def __init__(self, message: str, transcript=None):
        super().__init__(message)
        self.transcript = transcript


class PrecisionError(SolverError):
    """Ellipsoid arithmetic broke down at the configured precision."""
