"""Bandit instances: arm laws with closed-form moments and seeded sampling.

Randomness is organised as one counter-based Philox stream per
``(base_seed, replication, arm)``. A replication therefore sees the same
sample tape for an arm no matter which policy pulls it, how many other
replications run next to it, or how they are split across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .risk_measures import ConfigError, RiskMeasure, catalog

PROB_TOL = 1e-12


class ArmSpec:
    """Base class for ``[0, 1]``-supported arm distributions."""

    kind = "arm"

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        raise NotImplementedError

    @property
    def second_moment(self) -> float:
        return self.variance + self.mean ** 2

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items() if k != "kind")
        return f"{type(self).__name__}({args})"

    def __eq__(self, other):
        return isinstance(other, ArmSpec) and self.to_dict() == other.to_dict()


def _prob(p, what="p"):
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"{what} must lie in [0, 1], got {p}")
    return p


def _support(x):
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ConfigError(f"support point {x} lies outside [0, 1]")
    return x


class Bernoulli(ArmSpec):
    kind = "bernoulli"

    def __init__(self, p):
        self.p = _prob(p)

    @property
    def mean(self):
        return self.p

    @property
    def variance(self):
        return self.p * (1.0 - self.p)

    def sample(self, rng, size=None):
        return (rng.random(size) < self.p).astype(float) if size is not None else float(rng.random() < self.p)

    def to_dict(self):
        return {"kind": self.kind, "p": self.p}


class TwoPoint(ArmSpec):
    """Takes value ``a`` with probability ``p`` and ``b`` otherwise."""

    kind = "two_point"

    def __init__(self, a, b, p):
        self.a, self.b, self.p = _support(a), _support(b), _prob(p)

    @classmethod
    def from_moments(cls, mean, variance, p=0.5):
        """Two-point law with the given mean and variance, weight ``p`` on the low point."""
        spread = math.sqrt(variance / (p * (1.0 - p)))
        a = mean - (1.0 - p) * spread
        return cls(a, a + spread, p)

    @property
    def mean(self):
        return self.p * self.a + (1.0 - self.p) * self.b

    @property
    def variance(self):
        return self.p * (1.0 - self.p) * (self.b - self.a) ** 2

    def sample(self, rng, size=None):
        u = rng.random(size)
        out = np.where(u < self.p, self.a, self.b)
        return out if size is not None else float(out)

    def to_dict(self):
        return {"kind": self.kind, "a": self.a, "b": self.b, "p": self.p}


class ScaledBeta(ArmSpec):
    kind = "scaled_beta"

    def __init__(self, alpha, beta):
        self.alpha, self.beta = float(alpha), float(beta)
        if not (self.alpha > 0 and self.beta > 0):
            raise ConfigError("beta parameters must be positive")

    @property
    def mean(self):
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self):
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1.0))

    def sample(self, rng, size=None):
        out = rng.beta(self.alpha, self.beta, size)
        return out if size is not None else float(out)

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}


class Discrete(ArmSpec):
    kind = "discrete"

    def __init__(self, support, probs):
        self.support = [_support(x) for x in support]
        self.probs = [_prob(p, "probability") for p in probs]
        if len(self.support) != len(self.probs) or not self.support:
            raise ConfigError("support and probs must be nonempty and of equal length")
        if abs(math.fsum(self.probs) - 1.0) > PROB_TOL:
            raise ConfigError("probabilities must sum to 1")
        self._support = np.array(self.support)
        self._cdf = np.cumsum(self.probs)
        self._cdf[-1] = 1.0

    @property
    def mean(self):
        return math.fsum(p * x for p, x in zip(self.probs, self.support))

    @property
    def variance(self):
        m = self.mean
        return math.fsum(p * (x - m) ** 2 for p, x in zip(self.probs, self.support))

    def sample(self, rng, size=None):
        u = rng.random(size)
        out = self._support[np.searchsorted(self._cdf, u, side="right")]
        return out if size is not None else float(out)

    def to_dict(self):
        return {"kind": self.kind, "support": list(self.support), "probs": list(self.probs)}


ARM_KINDS = {cls.kind: cls for cls in (Bernoulli, TwoPoint, ScaledBeta, Discrete)}


def arm_from_dict(d: dict) -> ArmSpec:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in ARM_KINDS:
        raise ConfigError(f"unknown arm kind {kind!r}")
    try:
        return ARM_KINDS[kind](**d)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind} arm: {exc}") from None


def sample(arm: ArmSpec, rng: np.random.Generator) -> float:
    return arm.sample(rng)


def stream(base_seed: int, replication: int, index: int, group: int = 0) -> np.random.Generator:
    """Independent Philox generator keyed by ``(base_seed, replication, group, index)``.

    ``group`` 0 is reserved for arm tapes, 1 for policy-internal randomness.
    """
    seq = np.random.SeedSequence(int(base_seed), spawn_key=(int(replication), int(group), int(index)))
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class BanditInstance:
    arms: list
    measure: RiskMeasure
    f: list = field(init=False)
    best_arm: int = field(init=False)
    gaps: list = field(init=False)
    e: list = field(init=False)

    def __post_init__(self):
        if not self.arms:
            raise ConfigError("an instance needs at least one arm")
        for arm in self.arms:
            if arm.variance > self.measure.y_max + 1e-15:
                raise ConfigError("arm variance outside the measure's domain")
        ground_truth(self)

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def means(self):
        return np.array([a.mean for a in self.arms])

    @property
    def second_moments(self):
        return np.array([a.second_moment for a in self.arms])

    @classmethod
    def from_dict(cls, d: dict) -> "BanditInstance":
        m = d.get("measure") or {}
        if isinstance(m, str):
            m = {"name": m}
        measure = catalog(m.get("name", ""), m.get("params") or {})
        return cls([arm_from_dict(a) for a in d.get("arms") or []], measure)

    def to_dict(self) -> dict:
        return {"measure": self.measure.spec(), "arms": [a.to_dict() for a in self.arms]}


def ground_truth(instance: BanditInstance) -> BanditInstance:
    """Fill true risks, best arm (lowest index on ties), gaps and continuity margins."""
    mu = np.array([a.mean for a in instance.arms])
    var = np.array([a.variance for a in instance.arms])
    f = np.atleast_1d(instance.measure.evaluate(mu, var)).astype(float)
    best = int(np.argmin(f))
    instance.f = f.tolist()
    instance.best_arm = best
    instance.gaps = (f - f[best]).tolist()
    instance.e = np.atleast_1d(instance.measure.disc_distance(mu, var)).astype(float).tolist()
    return instance


class ArmTapes:
    """Block-buffered draws from per-(replication, arm) streams.

    ``take(arms)`` returns one fresh sample per replication from the arm it
    chose. Buffers are refilled one ``(replication, arm)`` at a time so the
    realised tape does not depend on which other replications are present.
    """

    def __init__(self, arms, base_seed, replications, block=2048):
        self.arms = list(arms)
        self.block = int(block)
        self.replications = list(replications)
        R, K = len(self.replications), len(self.arms)
        self._gens = [[stream(base_seed, r, i) for i in range(K)] for r in self.replications]
        self._buf = np.empty((R, K, self.block))
        self._cur = np.zeros((R, K), dtype=np.int64)
        self._rows = np.arange(R)
        for r in range(R):
            for i in range(K):
                self._refill(r, i)

    def _refill(self, r, i):
        self._buf[r, i] = self.arms[i].sample(self._gens[r][i], self.block)
        self._cur[r, i] = 0

    def take(self, arms):
        rows = self._rows
        pos = self._cur[rows, arms]
        x = self._buf[rows, arms, pos]
        pos += 1
        self._cur[rows, arms] = pos
        full = np.flatnonzero(pos == self.block)
        for r in full:
            self._refill(r, arms[r])
        return x
