# coding: utf-8
"""Gaussian and discrete message algebra
Messages and beliefs exchanged by the receivers are either circularly-symmetric
complex Gaussians CN(x; mean, variance) or weight vectors over a finite
constellation. Every container holds a scalar or a numpy array of independent
messages, and every operation works elementwise over the leading axes.
"""
import functools
import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateDivision, EmptyBelief

logger = logging.getLogger(__name__)

# Division results whose precision falls to or below this are clamped
PRECISION_FLOOR = 1e-12
VARIANCE_CLAMP = 1e12


@dataclass(frozen=True)
class GaussMsg:
    """Complex Gaussian message CN(x; mean, variance).

    A variance of +inf is a vacuous message (the identity of `product`); a
    variance of 0 is a point mass.
    """

    mean: np.ndarray
    variance: np.ndarray

    def __post_init__(self):
        mean, variance = np.broadcast_arrays(
            np.asarray(self.mean, dtype=complex), np.asarray(self.variance, dtype=float)
        )
        if np.any(np.isnan(variance)) or np.any(variance < 0):
            raise ValueError("variance must be non-negative or +inf")
        if np.any(~np.isfinite(mean) & np.isfinite(variance)):
            raise ValueError("mean must be finite where variance is finite")
        object.__setattr__(self, "mean", np.array(mean))
        object.__setattr__(self, "variance", np.array(variance))

    @classmethod
    def vacuous(cls, shape=()):
        return cls(np.zeros(shape, dtype=complex), np.full(shape, np.inf))

    @classmethod
    def point(cls, value):
        value = np.asarray(value, dtype=complex)
        return cls(value, np.zeros(value.shape))

    @property
    def shape(self):
        return self.mean.shape

    @property
    def precision(self):
        with np.errstate(divide="ignore"):
            return 1.0 / self.variance

    @property
    def is_vacuous(self):
        return np.isinf(self.variance)

    def __getitem__(self, index):
        return GaussMsg(self.mean[index], self.variance[index])

    def replace(self, index, other):
        """Return a copy with the entries at `index` taken from `other`."""
        mean = self.mean.copy()
        variance = self.variance.copy()
        mean[index] = other.mean
        variance[index] = other.variance
        return GaussMsg(mean, variance)

    def pdf(self, x):
        """Evaluate CN(x; mean, variance) for finite, positive variances."""
        return np.exp(-np.abs(x - self.mean) ** 2 / self.variance) / (np.pi * self.variance)


@dataclass(frozen=True)
class DiscreteMsg:
    """Weights over the Q points of a constellation, stored on the last axis."""

    weights: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        if np.any(np.isnan(weights)) or np.any(weights < 0):
            raise ValueError("weights must be non-negative")
        if np.any(weights.sum(axis=-1) <= 0):
            raise EmptyBelief("discrete message has no positive weight")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, q, shape=()):
        return cls(np.full(tuple(shape) + (q,), 1.0 / q))

    @classmethod
    def from_log_weights(cls, log_weights):
        """Build a normalized message from unnormalized log-weights.

        Raises:
            EmptyBelief: when every weight of some message is zero or undefined.
        """
        log_weights = np.asarray(log_weights, dtype=float)
        with np.errstate(invalid="ignore"):
            norm = logsumexp(log_weights, axis=-1, keepdims=True)
        if not np.all(np.isfinite(norm)):
            raise EmptyBelief("all posterior weights underflowed")
        return cls(np.exp(log_weights - norm))

    def normalize(self):
        return DiscreteMsg(self.weights / self.weights.sum(axis=-1, keepdims=True))


@dataclass(frozen=True)
class Constellation:
    """Unit-energy Gray-labelled symbol alphabet.

    Point `q` carries the label given by the binary expansion of `q`, most
    significant bit first, so `labels[q]` is its bit tuple.
    """

    name: str
    points: np.ndarray

    @property
    def size(self):
        return len(self.points)

    @property
    def bits_per_symbol(self):
        return int(np.log2(self.size))

    @property
    def labels(self):
        return index_to_bits(np.arange(self.size), self.bits_per_symbol)


def index_to_bits(indices, width):
    shifts = np.arange(width - 1, -1, -1)
    return (np.asarray(indices)[..., None] >> shifts) & 1


def _qpsk_points():
    labels = index_to_bits(np.arange(4), 2)
    axis = 1 - 2 * labels
    return (axis[:, 0] + 1j * axis[:, 1]) / np.sqrt(2)


def _qam16_points():
    # per axis: first bit is the sign, second bit selects the outer level
    labels = index_to_bits(np.arange(16), 4)
    real = (1 - 2 * labels[:, 0]) * (1 + 2 * labels[:, 1])
    imag = (1 - 2 * labels[:, 2]) * (1 + 2 * labels[:, 3])
    return (real + 1j * imag) / np.sqrt(10)


CONSTELLATIONS = {
    "qpsk": _qpsk_points,
    "qam16": _qam16_points,
}


@functools.lru_cache(maxsize=None)
def make_constellation(name):
    """Return the named constellation ('qpsk' or 'qam16')."""
    try:
        points = CONSTELLATIONS[name]()
    except KeyError:
        raise ValueError(f"unknown modulation {name!r}") from None
    points.setflags(write=False)
    return Constellation(name, points)


def product(a, b):
    """Normalized pointwise product of two Gaussian messages.

    Precisions add and the mean is the precision-weighted average. Vacuous
    inputs contribute zero precision; a point mass absorbs the other factor.

    Args:
        a (GaussMsg): First factor.
        b (GaussMsg): Second factor.

    Returns:
        GaussMsg: The product, vacuous where both inputs are vacuous.

    Examples:
    >>> product(GaussMsg(1, 2), GaussMsg(3, 2))
    GaussMsg(mean=array(2.+0.j), variance=array(1.))
    """
    pa, pb = a.precision, b.precision
    precision = pa + pb
    with np.errstate(divide="ignore", invalid="ignore"):
        variance = 1.0 / precision
        mean = (a.mean * pa + b.mean * pb) * variance
    mean = np.where(np.isinf(pb), b.mean, mean)
    mean = np.where(np.isinf(pa), a.mean, mean)
    mean = np.where(precision == 0, 0, mean)
    return GaussMsg(mean, variance)


def product_over(msg, axis=0):
    """Fold `product` over one axis of a batch of messages."""
    mean = np.moveaxis(msg.mean, axis, 0)
    variance = np.moveaxis(msg.variance, axis, 0)
    factors = [GaussMsg(m, v) for m, v in zip(mean, variance)]
    return functools.reduce(product, factors)


def divide_masked(num, den):
    """Gaussian division returning the result and the mask of clamped entries.

    Where the resulting precision is at or below `PRECISION_FLOOR` the entry is
    replaced by (num.mean, VARIANCE_CLAMP).
    """
    p_num, p_den = num.precision, den.precision
    with np.errstate(invalid="ignore"):
        precision = np.where(np.isinf(p_num), np.inf, p_num - p_den)
    clamped = precision <= PRECISION_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        variance = np.where(clamped, VARIANCE_CLAMP, 1.0 / precision)
        mean = (num.mean * p_num - den.mean * p_den) * variance
    mean = np.where(np.isinf(p_num) | clamped, num.mean, mean)
    return GaussMsg(mean, variance), clamped


def divide(num, den):
    """Divide one Gaussian message by another.

    Args:
        num (GaussMsg): Numerator, usually a projected belief.
        den (GaussMsg): Denominator with positive variance.

    Returns:
        GaussMsg: Precision `1/v_num - 1/v_den`, mean matched accordingly. When
                  the precision is not positive the clamp policy applies and a
                  `DegenerateDivision` warning is issued.
    """
    result, clamped = divide_masked(num, den)
    if np.any(clamped):
        count = int(np.count_nonzero(clamped))
        logger.debug("division clamped count=%d", count)
        warnings.warn(f"{count} division(s) clamped to variance {VARIANCE_CLAMP:g}", DegenerateDivision)
    return result


def discrete_moments(msg, constellation):
    """Mean and variance of a normalized discrete message.

    Args:
        msg (DiscreteMsg): Weights over `constellation.points` on the last axis.
        constellation (Constellation): The alphabet.

    Returns:
        tuple: (mean, variance) arrays over the leading axes; variance >= 0.
    """
    points = constellation.points
    mean = msg.weights @ points
    second = msg.weights @ (np.abs(points) ** 2)
    variance = np.maximum(second - np.abs(mean) ** 2, 0.0)
    return mean, variance


def project_gaussian(points, weights):
    """Project a weighted point set onto the Gaussian family.

    Args:
        points (array_like): Complex support points, reduced over the last axis.
        weights (array_like): Non-negative weights with the same shape.

    Returns:
        GaussMsg: Normalized first moment and central second moment.

    Raises:
        EmptyBelief: if every weight of some set is zero.
    """
    points = np.asarray(points, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    total = weights.sum(axis=-1)
    if np.any(total <= 0):
        raise EmptyBelief("cannot project a point set with zero total weight")
    weights = weights / total[..., None]
    mean = np.sum(weights * points, axis=-1)
    variance = np.sum(weights * np.abs(points - mean[..., None]) ** 2, axis=-1)
    return GaussMsg(mean, variance)
