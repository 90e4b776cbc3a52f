"""Semantic exception hierarchy.

Every public operation raises one of these instead of bare ValueError,
so callers (and the CLI's exit-code mapping) can dispatch on type.
"""
from __future__ import annotations


class FisherGeoError(Exception):
    """Base error for this package."""


class SizeMismatch(FisherGeoError, ValueError):
    """Operands live on different sample spaces or have wrong lengths."""


class NonPositiveWeight(FisherGeoError, ValueError):
    """A probability weight is at or below the positivity floor."""


class NotNormalized(FisherGeoError, ValueError):
    """Weights do not sum to one within tolerance."""


class BadFloor(FisherGeoError, ValueError):
    """Interior-sampling floor outside (0, 1/n)."""


class BadSize(FisherGeoError, ValueError):
    """A requested size or index is out of range."""


class NotSumZero(FisherGeoError, ValueError):
    """An m-representation does not sum to zero within tolerance."""


class NotCentered(FisherGeoError, ValueError):
    """A random variable is not centered at the base distribution."""


class BasePointMismatch(FisherGeoError, ValueError):
    """Tangent/cotangent operands are attached to different base points.

    Base points are compared for exact value equality: mixing base points
    is a logic error, not a numeric one.
    """


class RankDeficient(FisherGeoError, ValueError):
    """Model Jacobian is rank deficient at the queried parameter."""


class InvalidParameter(FisherGeoError, ValueError):
    """Parameter outside the model's admissible region."""


class SingularMatrix(FisherGeoError, ValueError):
    """A matrix that must be inverted is numerically singular."""


class NotLocallyUnbiased(FisherGeoError, ValueError):
    """Estimator tuple fails the local-unbiasedness precondition."""


class NotSurjective(FisherGeoError, ValueError):
    """A map or channel misses part of its declared codomain."""


class InvalidChannel(FisherGeoError, ValueError):
    """Channel kernel has negative entries."""


class NotRational(FisherGeoError, ValueError):
    """Distribution has no rational representation within the denominator bound."""
