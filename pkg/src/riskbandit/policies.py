"""Arm-selection policies.

Every policy works on a :class:`PolicyState` that holds ``R`` independent
replications side by side (arrays of shape ``(R, K)``). A single run is
simply ``R == 1``. Decisions are made row by row; no quantity mixes
replications, so results do not depend on how replications are batched.

Arms that were never pulled are forced first, lowest index first, and
remaining ties go to the lowest arm index.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .environment import stream
from .estimators import RunningStats, moments, radius_array
from .risk_measures import IDENTITY, ConfigError, Modulus, RiskMeasure, restricted_modulus

FORCE = "force"

LCB_SCALE = 6.0


def lcb_index(stats: RunningStats, delta: float, measure: RiskMeasure, phi: Modulus):
    """``f(mean, var) - phi(6 sqrt(ln(1/delta) / (2 count)))``, or :data:`FORCE` if unpulled."""
    if stats.count == 0:
        return FORCE
    r = LCB_SCALE * math.sqrt(math.log(1.0 / delta) / (2.0 * stats.count))
    return float(measure.evaluate(stats.mean, stats.variance)) - float(phi.forward(r))


def phase1_stop_check(stats: RunningStats, delta: float, measure: RiskMeasure) -> bool:
    """True once the confidence radius is at most half the distance to a discontinuity."""
    if stats.count < 1:
        raise ValueError("stop check needs at least one sample")
    r = LCB_SCALE * math.sqrt(math.log(1.0 / delta) / (2.0 * stats.count))
    return bool(r <= 0.5 * float(measure.disc_distance(stats.mean, stats.variance)))


@dataclass
class PhaseOne:
    """Certification progress of the two-phase policy."""

    current: np.ndarray  # (R,) arm being certified, K once finished
    certified: np.ndarray  # (R, K)
    uncertifiable: np.ndarray  # (R, K)
    length: np.ndarray  # (R, K) pulls spent in phase one
    end: np.ndarray  # (R,) step at which phase one finished, 0 while running
    modulus_id: np.ndarray  # (R, K) index into ``moduli``
    moduli: list = field(default_factory=list)


@dataclass
class PolicyState:
    counts: np.ndarray
    sums: np.ndarray
    sums_sq: np.ndarray
    delta: float | None = None
    step: int = 0
    phase: PhaseOne | None = None
    guarantee_voided: np.ndarray | None = None
    aux: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, n_reps: int, n_arms: int, delta=None) -> "PolicyState":
        return cls(
            counts=np.zeros((n_reps, n_arms), dtype=np.int64),
            sums=np.zeros((n_reps, n_arms)),
            sums_sq=np.zeros((n_reps, n_arms)),
            delta=delta,
            guarantee_voided=np.zeros(n_reps, dtype=bool),
        )

    @property
    def n_reps(self) -> int:
        return self.counts.shape[0]

    @property
    def n_arms(self) -> int:
        return self.counts.shape[1]

    def arm_stats(self, arm: int, rep: int = 0) -> RunningStats:
        return RunningStats(int(self.counts[rep, arm]), float(self.sums[rep, arm]), float(self.sums_sq[rep, arm]))

    def set_arm(self, arm: int, stats: RunningStats, rep: int = 0):
        self.counts[rep, arm] = stats.count
        self.sums[rep, arm] = stats.sum
        self.sums_sq[rep, arm] = stats.sum_sq

    def record(self, arms, samples):
        rows = np.arange(self.n_reps)
        self.counts[rows, arms] += 1
        self.sums[rows, arms] += samples
        self.sums_sq[rows, arms] += samples * samples
        self.step += 1

    def moments(self):
        return moments(self.counts, self.sums, self.sums_sq)


def _forced(state: PolicyState):
    """Per-row lowest unpulled arm, or -1."""
    if state.step >= state.n_arms and state.counts.min() > 0:
        return None
    unpulled = state.counts == 0
    first = np.argmax(unpulled, axis=1)
    return np.where(unpulled.any(axis=1), first, -1)


def _with_forced(state, choose_rest):
    forced = _forced(state)
    if forced is None:
        return choose_rest()
    if np.all(forced >= 0):
        return forced
    rest = choose_rest()
    return np.where(forced >= 0, forced, rest)


class Policy:
    name = "policy"
    delta: float | None = None

    def init_state(self, n_reps: int, n_arms: int, replications=None) -> PolicyState:
        return PolicyState.empty(n_reps, n_arms, self.delta)

    def choose(self, state: PolicyState) -> np.ndarray:
        raise NotImplementedError

    def observe(self, state: PolicyState, arms, samples):
        state.record(arms, samples)

    def describe(self) -> dict:
        return {"name": self.name}


def resolve_delta(delta=None, delta_rule=None, horizon=None) -> float:
    """Turn a ``delta`` or ``delta_rule`` setting into a number."""
    if delta_rule is not None:
        if delta_rule != "n_squared":
            raise ConfigError(f"unknown delta_rule {delta_rule!r}")
        if horizon is None:
            raise ConfigError("delta_rule 'n_squared' needs the horizon")
        return 1.0 / float(horizon) ** 2
    if delta is None:
        raise ConfigError("confidence level delta is required")
    delta = float(delta)
    if not 0.0 < delta < 0.5:
        raise ConfigError(f"delta must lie in (0, 1/2), got {delta}")
    return delta


def check_guarantee_delta(delta: float, n_arms: int, horizon: int):
    """Reject ``delta`` outside ``(0, 1/(4 K n))``, where the guarantees hold."""
    if not 0.0 < delta < 1.0 / (4.0 * n_arms * horizon):
        raise ConfigError(
            f"delta={delta:g} outside (0, 1/(4Kn)) = (0, {1.0 / (4 * n_arms * horizon):g}); "
            "disable guarantee_mode for exploratory runs"
        )


class PhiLCB(Policy):
    """Pull the arm minimising ``f(mean, var) - phi(6 sqrt(ln(1/delta) / 2T))``."""

    name = "phi_lcb"

    def __init__(self, measure: RiskMeasure, delta: float, phi: Modulus | None = None):
        if phi is None:
            if measure.modulus is None:
                raise ConfigError(f"{measure.name} is discontinuous; pass an explicit phi")
            phi = measure.modulus
        self.measure, self.delta, self.phi = measure, float(delta), phi

    def indices(self, state):
        mean, var = state.moments()
        f = self.measure.evaluate(mean, var)
        with np.errstate(invalid="ignore"):
            pen = self.phi.forward(radius_array(state.counts, self.delta, LCB_SCALE))
        return f - pen

    def choose(self, state):
        return _with_forced(state, lambda: np.argmin(self.indices(state), axis=1))

    def describe(self):
        return {"name": self.name, "delta": self.delta, "phi": self.phi.name}


class PhiLCB2(Policy):
    """Two-phase policy for measures with discontinuities.

    Phase one pulls arm 0, 1, ... in turn until each one's radius is at most
    half its estimated distance to a discontinuity, then freezes a modulus
    valid on the ball around the estimate. Phase two is the LCB rule with
    these per-arm moduli. An arm that does not certify within ``budget``
    pulls is marked uncertifiable, gets the identity modulus, and voids the
    guarantee for that replication.
    """

    name = "phi_lcb2"

    def __init__(self, measure: RiskMeasure, delta: float, budget: int):
        if budget < 1:
            raise ConfigError("phase one budget must be positive")
        self.measure, self.delta, self.budget = measure, float(delta), int(budget)
        self._log_term = math.log(1.0 / self.delta)

    def init_state(self, n_reps, n_arms, replications=None):
        state = super().init_state(n_reps, n_arms)
        state.phase = PhaseOne(
            current=np.zeros(n_reps, dtype=np.int64),
            certified=np.zeros((n_reps, n_arms), dtype=bool),
            uncertifiable=np.zeros((n_reps, n_arms), dtype=bool),
            length=np.zeros((n_reps, n_arms), dtype=np.int64),
            end=np.zeros(n_reps, dtype=np.int64),
            modulus_id=np.zeros((n_reps, n_arms), dtype=np.int64),
            moduli=[IDENTITY],
        )
        return state

    def indices(self, state):
        mean, var = state.moments()
        f = self.measure.evaluate(mean, var)
        z = radius_array(state.counts, self.delta, LCB_SCALE)
        ph = state.phase
        if len(ph.moduli) == 1:
            pen = ph.moduli[0].forward(z)
        else:
            pen = np.empty_like(z)
            for j, m in enumerate(ph.moduli):
                sel = ph.modulus_id == j
                if sel.any():
                    pen[sel] = m.forward(z[sel])
        return f - pen

    def choose(self, state):
        ph = state.phase
        n_arms = state.n_arms
        in_one = ph.current < n_arms
        if in_one.all():
            return ph.current.copy()
        arms = np.argmin(self.indices(state), axis=1)
        return np.where(in_one, ph.current, arms)

    def _freeze(self, ph, r, i, modulus):
        for j, m in enumerate(ph.moduli):
            if m is modulus:
                ph.modulus_id[r, i] = j
                return
        ph.moduli.append(modulus)
        ph.modulus_id[r, i] = len(ph.moduli) - 1

    def observe(self, state, arms, samples):
        ph = state.phase
        n_arms = state.n_arms
        rows = np.flatnonzero(ph.current < n_arms)
        state.record(arms, samples)
        if rows.size == 0:
            return
        cur = ph.current[rows]
        cnt = state.counts[rows, cur]
        ph.length[rows, cur] = cnt
        mean = state.sums[rows, cur] / cnt
        var = np.maximum(state.sums_sq[rows, cur] / cnt - mean * mean, 0.0)
        dist = np.asarray(self.measure.disc_distance(mean, var), dtype=float)
        radius = LCB_SCALE * np.sqrt(self._log_term / (2.0 * cnt))
        stop = radius <= 0.5 * dist
        capped = ~stop & (cnt >= self.budget)
        for k in np.flatnonzero(stop | capped):
            r, i = rows[k], cur[k]
            if stop[k]:
                ph.certified[r, i] = True
                self._freeze(ph, r, i, restricted_modulus(self.measure, (mean[k], var[k]), 0.5 * dist[k]))
            else:
                ph.uncertifiable[r, i] = True
                state.guarantee_voided[r] = True
                self._freeze(ph, r, i, IDENTITY)
            ph.current[r] += 1
            if ph.current[r] == n_arms:
                ph.end[r] = state.step
        if capped.any():
            warnings.warn(
                f"{int(capped.sum())} arm(s) hit the phase-one budget of {self.budget} pulls and were excluded "
                "from certification; guarantees are void for those replications",
                RuntimeWarning,
                stacklevel=2,
            )

    def describe(self):
        return {"name": self.name, "delta": self.delta, "budget": self.budget}


def default_budget(horizon: int, n_arms: int) -> int:
    return max(1, math.ceil(horizon / n_arms))


class Uniform(Policy):
    """Uniformly random arm from a per-replication policy stream."""

    name = "uniform"

    def __init__(self, base_seed: int = 0, block: int = 4096):
        self.base_seed, self.block = int(base_seed), int(block)

    def init_state(self, n_reps, n_arms, replications=None):
        state = super().init_state(n_reps, n_arms)
        reps = range(n_reps) if replications is None else replications
        state.aux["gens"] = [stream(self.base_seed, r, 0, group=1) for r in reps]
        state.aux["pos"] = self.block
        return state

    def choose(self, state):
        aux = state.aux
        if aux["pos"] == self.block:
            aux["buf"] = np.stack([g.integers(0, state.n_arms, self.block) for g in aux["gens"]])
            aux["pos"] = 0
        arms = aux["buf"][:, aux["pos"]]
        aux["pos"] += 1
        return arms


class Greedy(Policy):
    """Pull the arm with the smallest estimated risk."""

    name = "greedy"

    def __init__(self, measure: RiskMeasure):
        self.measure = measure

    def choose(self, state):
        def rest():
            mean, var = state.moments()
            return np.argmin(self.measure.evaluate(mean, var), axis=1)

        return _with_forced(state, rest)


class Oracle(Policy):
    """Always pulls the true best arm."""

    name = "oracle"

    def __init__(self, best_arm: int):
        self.best_arm = int(best_arm)

    def choose(self, state):
        return np.full(state.n_reps, self.best_arm, dtype=np.int64)

    def describe(self):
        return {"name": self.name, "best_arm": self.best_arm}
