"""Online moment estimates and the confidence radii built on them.

All radii use the natural logarithm. A count of zero yields the
:data:`UNSAMPLED` sentinel instead of an infinite radius; the policy layer
decides what to do with arms that have never been pulled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class _Unsampled:
    """Marker returned by the radius functions when ``t == 0``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNSAMPLED"

    def __bool__(self):
        return False


UNSAMPLED = _Unsampled()


@dataclass
class RunningStats:
    """Sufficient statistics of the samples seen from a single arm."""

    count: int = 0
    sum: float = 0.0
    sum_sq: float = 0.0

    def update(self, sample: float) -> "RunningStats":
        if not 0.0 <= sample <= 1.0:
            raise ValueError(f"sample {sample!r} lies outside [0, 1]")
        self.count += 1
        self.sum += sample
        self.sum_sq += sample * sample
        return self

    def extend(self, samples) -> "RunningStats":
        for s in samples:
            self.update(float(s))
        return self

    @property
    def mean(self) -> float:
        if self.count == 0:
            raise ValueError("no samples recorded")
        return self.sum / self.count

    @property
    def second_moment(self) -> float:
        if self.count == 0:
            raise ValueError("no samples recorded")
        return self.sum_sq / self.count

    @property
    def variance(self) -> float:
        # Rounding can push the moment form a hair below zero.
        m = self.mean
        return max(self.second_moment - m * m, 0.0)


def update(stats: RunningStats, sample: float) -> RunningStats:
    """Return a new :class:`RunningStats` with ``sample`` folded in."""
    out = RunningStats(stats.count, stats.sum, stats.sum_sq)
    return out.update(sample)


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")


def _base_radius(t, delta):
    return math.sqrt(math.log(1.0 / delta) / (2.0 * t))


def mean_radius(t: int, delta: float):
    """Hoeffding half-width ``sqrt(ln(1/delta) / (2t))`` for the mean."""
    _check_delta(delta)
    if t == 0:
        return UNSAMPLED
    if t < 0:
        raise ValueError("t must be nonnegative")
    return _base_radius(t, delta)


def variance_radius(t: int, delta: float):
    """Half-width ``5 sqrt(ln(1/delta) / (2t))`` for the empirical variance."""
    r = mean_radius(t, delta)
    return r if r is UNSAMPLED else 5.0 * r


def risk_radius(t: int, delta: float, phi):
    """Half-width of the risk confidence interval: ``phi(6 sqrt(ln(1/delta) / (2t)))``."""
    r = mean_radius(t, delta)
    if r is UNSAMPLED:
        return r
    return float(phi.forward(6.0 * r))


def radius_array(counts, delta: float, scale: float = 1.0):
    """Vectorised ``scale * sqrt(ln(1/delta) / (2 count))``; callers mask ``count == 0``."""
    counts = np.asarray(counts, dtype=float)
    with np.errstate(divide="ignore"):
        return scale * np.sqrt(math.log(1.0 / delta) / (2.0 * counts))


def moments(counts, sums, sums_sq):
    """Empirical means and clamped variances from batched accumulators."""
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = sums / counts
        var = np.maximum(sums_sq / counts - mean * mean, 0.0)
    return mean, var
