"""Exception types raised by the mixent package.

Every domain error derives from :class:`MixentError` so callers can catch
the whole family at once.  The CLI maps each class to a distinct exit code
(see :mod:`mixent.cli`).
"""

from __future__ import annotations


class MixentError(Exception):
    """Base class for all domain errors raised by this package."""


class RankDeficient(MixentError):
    """A matrix required to have full row rank does not."""


class ZeroColumn(MixentError):
    """A matrix contains a zero column where a nonzero one is required."""


class NotOrthonormal(MixentError):
    """Rows of a matrix are not orthonormal within tolerance."""


class NonPositiveLambda(MixentError):
    """A scale vector contains entries that are not strictly positive."""


class NotSpd(MixentError):
    """A matrix expected to be symmetric positive definite is not."""


class BadBlockStructure(MixentError):
    """A real matrix does not carry the expected 2x2 block pattern."""


class AlreadySquare(MixentError):
    """An orthonormal-row matrix is square, so no complement rows exist."""


class UnsupportedFamily(MixentError):
    """A distribution family name is unknown or not valid in context."""


class NotCircular(MixentError):
    """A radial construction was requested for a non-circular target."""


class TooFewSamples(MixentError):
    """A sample array is too small for the requested estimator."""


class DegenerateData(MixentError):
    """Sample values are degenerate (for example, all equal)."""


class DuplicatePoints(MixentError):
    """Duplicate sample points with tie-breaking disabled."""


class SingularCovariance(MixentError):
    """A sample covariance matrix is numerically singular."""


class UsageError(MixentError):
    """Invalid command-line arguments."""
