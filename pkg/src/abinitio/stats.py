"""Streaming ensemble statistics.

Welford's single-pass update keeps a running mean and the un-normalized
second moment ``M2``; it avoids the cancellation of the naive
``E[q^2] - E[q]^2`` formula when the data share a large offset. Partial
accumulators combine with the pairwise rule of Chan et al.

Favre (phase-weighted) means are formed at the end as ``E[X q] / E[X]``;
the reported variance is the plain variance ``V[X q]`` of the weighted
field.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WelfordAccumulator",
    "FavreStats",
    "welford_update",
    "welford_merge",
    "favre_finalize",
    "cauchy_rate",
    "ALPHA_EPS",
]

#: Favre means are set to zero where the mean phase fraction is below this.
ALPHA_EPS = 1e-12


@dataclass
class WelfordAccumulator:
    """Running count, mean and ``M2`` of an array-valued sample stream.

    The recurrence runs on ``x - shift`` where ``shift`` is the first
    sample. The subtraction is exact for data sharing a large offset, so
    the running mean of the shifted data keeps full precision.

    Attributes
    ----------
    count : int
    shift : ndarray
        First sample seen (zeros while empty).
    dmean : ndarray
        Running mean of ``x - shift``.
    m2 : ndarray
        Sum of squared deviations from the mean.
    """

    count: int
    shift: np.ndarray
    dmean: np.ndarray
    m2: np.ndarray

    @classmethod
    def empty(cls, shape) -> "WelfordAccumulator":
        return cls(0, np.zeros(shape), np.zeros(shape), np.zeros(shape))

    @property
    def mean(self) -> np.ndarray:
        return self.shift + self.dmean

    def update(self, x) -> None:
        """Add one sample in place."""
        x = np.asarray(x, dtype=float)
        if self.count == 0:
            self.shift = np.array(x, dtype=float, copy=True)
        self.count += 1
        y = x - self.shift
        delta = y - self.dmean
        self.dmean = self.dmean + delta / self.count
        self.m2 = self.m2 + (y - self.dmean) * delta

    @property
    def variance(self) -> np.ndarray:
        """Unbiased sample variance, zero for fewer than two samples."""
        if self.count < 2:
            return np.zeros_like(self.m2)
        return self.m2 / (self.count - 1)

    def copy(self) -> "WelfordAccumulator":
        return copy.deepcopy(self)


def welford_update(acc: WelfordAccumulator, x) -> WelfordAccumulator:
    """Return a new accumulator with sample ``x`` added."""
    out = acc.copy()
    out.update(x)
    return out


def welford_merge(a: WelfordAccumulator, b: WelfordAccumulator) -> WelfordAccumulator:
    """Combine accumulators over disjoint sample sets.

    The result keeps the shift of ``a``; the difference of the two shifts
    is formed before the means are compared so no offset is reintroduced.
    """
    if a.count == 0:
        return b.copy()
    if b.count == 0:
        return a.copy()
    n = a.count + b.count
    delta = (b.shift - a.shift) + (b.dmean - a.dmean)
    dmean = a.dmean + delta * (b.count / n)
    m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / n)
    return WelfordAccumulator(n, a.shift.copy(), dmean, m2)


@dataclass
class FavreStats:
    """Per-cell, per-phase ensemble statistics.

    Arrays have shape ``(M, 2)``. ``mean[q]`` is the Favre mean
    ``E[X q] / E[X]`` and ``var[q]`` the variance ``V[X q]``; ``raw[q]``
    keeps the un-normalized mean ``E[X q]``.
    """

    alpha: np.ndarray
    alpha_var: np.ndarray
    mean: dict = field(default_factory=dict)
    var: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    count: int = 0


def favre_finalize(alpha: WelfordAccumulator, products: dict, eps: float = ALPHA_EPS) -> FavreStats:
    """Favre statistics from accumulators of ``X`` and of ``X q``.

    Parameters
    ----------
    alpha : WelfordAccumulator
        Accumulator of the per-cell phase fractions.
    products : dict of str to WelfordAccumulator
        Accumulators of the weighted fields ``X q``, keyed by ``q``.
    eps : float
        Threshold below which the Favre mean is set to zero.
    """
    a = alpha.mean
    present = a > eps
    safe = np.where(present, a, 1.0)
    out = FavreStats(alpha=a.copy(), alpha_var=alpha.variance, count=alpha.count)
    for name, acc in products.items():
        out.mean[name] = np.where(present, acc.mean / safe, 0.0)
        out.var[name] = acc.variance
        out.raw[name] = acc.mean.copy()
    return out


def cauchy_rate(a, b, dx) -> float:
    """L1 distance ``sum(dx |a - b|)`` between two fields on the same mesh.

    ``dx`` is a scalar or per-cell widths. Extra trailing axes of ``a`` and
    ``b`` are summed as well.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape:
        raise ValueError(f"mesh mismatch: {a.shape} vs {b.shape}")
    d = np.abs(a - b)
    dx = np.asarray(dx, float)
    if dx.ndim:
        if dx.shape[0] != a.shape[0]:
            raise ValueError("cell widths do not match the fields")
        d = d * dx.reshape((-1,) + (1,) * (a.ndim - 1))
        return float(d.sum())
    return float(dx * d.sum())
