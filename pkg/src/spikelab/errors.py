"""Exception types shared across the package.

Domain errors (bad parameter regions) are distinguished from plain input
validation so the service layer can map them to a single HTTP status and
the CLI to a single exit code.
"""

from __future__ import annotations


class SpikeLabError(Exception):
    """Base class for all package errors."""


class DomainError(SpikeLabError):
    """A request is outside the mathematical domain of a formula."""


class InvalidMatrix(SpikeLabError):
    """Matrix input contains non-finite entries or has an unusable shape."""


class GammaNearZero(DomainError):
    """The rank-one update denominator gamma (or xi) is numerically zero."""


class OutOfDomain(DomainError):
    """Stieltjes transform evaluated at a point on or right of the support."""


class MuZeroDivergent(DomainError):
    """A spectral moment is infinite at mu = 0 in the requested regime."""


class RegimeBoundary(DomainError):
    """Aspect ratio too close to c = 1 for the closed-form branches."""


class NonZeroMu(DomainError):
    """An unregularized-only formula was called with mu != 0."""


class InvalidConfig(SpikeLabError):
    """A model configuration violates a hard invariant."""
