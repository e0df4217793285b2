"""Seeded Monte Carlo experiments: config, simulation loop, aggregation, outputs.

Replication ``r`` always draws arm samples from the streams keyed by
``(base_seed, r, arm)``, so every policy in an experiment faces the same
sample tapes, and thread count or chunking cannot change any result.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import logging
import math
import os
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import bounds as B
from .environment import ArmTapes, BanditInstance
from .policies import (
    Greedy,
    Oracle,
    PhiLCB,
    PhiLCB2,
    Uniform,
    check_guarantee_delta,
    default_budget,
    resolve_delta,
)
from .risk_measures import IDENTITY, ConfigError, lipschitz, restricted_modulus
from .svg import regret_plot

log = logging.getLogger(__name__)

POLICY_NAMES = ("phi_lcb", "phi_lcb2", "uniform", "greedy", "oracle")
TRACE_COLUMNS = ("policy", "replication", "checkpoint_t", "cumulative_regret", "phase1_end", "guarantee_voided")


class OutputError(RuntimeError):
    pass


# ---------------------------------------------------------------- config


@dataclass
class PolicySpec:
    name: str
    params: dict = field(default_factory=dict)
    label: str | None = None

    @property
    def key(self) -> str:
        return self.label or self.name

    def to_dict(self) -> dict:
        d = {"name": self.name, **self.params}
        if self.label:
            d["label"] = self.label
        return d

    @classmethod
    def from_dict(cls, d) -> "PolicySpec":
        if isinstance(d, str):
            d = {"name": d}
        d = dict(d)
        name = d.pop("name", None)
        if name not in POLICY_NAMES:
            raise ConfigError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")
        label = d.pop("label", None)
        return cls(name, d, label)


def default_checkpoints(n: int) -> list:
    pts = [10 ** k for k in range(1, 12) if 10 ** k < n]
    return pts + [n]


@dataclass
class ExperimentConfig:
    instance: dict
    policies: list
    horizon: int
    replications: int = 100
    base_seed: int = 0
    output: str = "results"
    checkpoints: list | None = None
    guarantee_mode: bool = True

    def __post_init__(self):
        self.policies = [p if isinstance(p, PolicySpec) else PolicySpec.from_dict(p) for p in self.policies]
        if self.checkpoints is None:
            self.checkpoints = default_checkpoints(self.horizon)

    def validate(self) -> BanditInstance:
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError("horizon must be a positive integer")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError("replications must be a positive integer")
        if not isinstance(self.base_seed, int) or not 0 <= self.base_seed < 2 ** 64:
            raise ConfigError("base_seed must be an unsigned 64-bit integer")
        cps = self.checkpoints
        if not cps or any(not isinstance(t, int) for t in cps):
            raise ConfigError("checkpoints must be a nonempty list of integers")
        if cps != sorted(set(cps)) or cps[0] < 1 or cps[-1] > self.horizon:
            raise ConfigError("checkpoints must be strictly increasing and lie in [1, horizon]")
        if not self.policies:
            raise ConfigError("at least one policy is required")
        keys = [p.key for p in self.policies]
        if len(set(keys)) != len(keys):
            raise ConfigError("policy labels must be unique; set 'label' to disambiguate")
        instance = BanditInstance.from_dict(self.instance)
        for spec in self.policies:
            build_policy(spec, instance, self)
        return instance

    def to_dict(self) -> dict:
        return {
            "instance": copy.deepcopy(self.instance),
            "policies": [p.to_dict() for p in self.policies],
            "horizon": self.horizon,
            "replications": self.replications,
            "base_seed": self.base_seed,
            "output": self.output,
            "checkpoints": list(self.checkpoints),
            "guarantee_mode": self.guarantee_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        known = {"instance", "policies", "horizon", "replications", "base_seed", "output", "checkpoints", "guarantee_mode"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key in ("instance", "policies", "horizon"):
            if key not in d:
                raise ConfigError(f"missing required key {key!r}")
        kw = dict(d)
        kw["policies"] = list(kw["policies"] or [])
        return cls(**kw)

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def _policy_delta(spec, horizon):
    p = spec.params
    return resolve_delta(p.get("delta"), p.get("delta_rule"), horizon)


def _phi_from_name(name):
    if name in (None, "measure"):
        return None
    if name == "identity":
        return IDENTITY
    if isinstance(name, str) and name.startswith("lipschitz:"):
        return lipschitz(float(name.split(":", 1)[1]))
    raise ConfigError(f"unknown phi {name!r}; use 'identity' or 'lipschitz:<L>'")


def build_policy(spec: PolicySpec, instance: BanditInstance, config: ExperimentConfig):
    n, K = config.horizon, instance.n_arms
    p = spec.params
    allowed = {
        "phi_lcb": {"delta", "delta_rule", "phi"},
        "phi_lcb2": {"delta", "delta_rule", "budget"},
        "uniform": set(),
        "greedy": set(),
        "oracle": set(),
    }[spec.name]
    extra = set(p) - allowed
    if extra:
        raise ConfigError(f"policy {spec.key}: unknown parameters {', '.join(sorted(extra))}")
    if spec.name in ("phi_lcb", "phi_lcb2"):
        delta = _policy_delta(spec, n)
        if config.guarantee_mode:
            check_guarantee_delta(delta, K, n)
        if spec.name == "phi_lcb":
            return PhiLCB(instance.measure, delta, _phi_from_name(p.get("phi")))
        budget = int(p.get("budget", default_budget(n, K)))
        return PhiLCB2(instance.measure, delta, budget)
    if spec.name == "uniform":
        return Uniform(config.base_seed)
    if spec.name == "greedy":
        return Greedy(instance.measure)
    return Oracle(instance.best_arm)


# ---------------------------------------------------------------- simulation


@dataclass
class RegretTrace:
    replication: int
    checkpoints: list
    cumulative_regret: list
    pulls: list
    phase1_end: int | None = None
    phase1_lengths: list | None = None
    guarantee_voided: bool = False
    event_a: bool | None = None

    @property
    def final_regret(self) -> float:
        return self.cumulative_regret[-1]


@dataclass
class BatchResult:
    """Per-replication outcome arrays of one policy."""

    replications: np.ndarray
    checkpoints: list
    regret: np.ndarray  # (R, C)
    pulls: np.ndarray  # (R, K)
    guarantee_voided: np.ndarray
    event_a: np.ndarray | None = None
    phase1_end: np.ndarray | None = None
    phase1_lengths: np.ndarray | None = None

    def traces(self) -> list:
        out = []
        for k, r in enumerate(self.replications):
            out.append(
                RegretTrace(
                    replication=int(r),
                    checkpoints=list(self.checkpoints),
                    cumulative_regret=self.regret[k].tolist(),
                    pulls=self.pulls[k].tolist(),
                    phase1_end=None if self.phase1_end is None else int(self.phase1_end[k]),
                    phase1_lengths=None if self.phase1_lengths is None else self.phase1_lengths[k].tolist(),
                    guarantee_voided=bool(self.guarantee_voided[k]),
                    event_a=None if self.event_a is None else bool(self.event_a[k]),
                )
            )
        return out

    @staticmethod
    def concat(parts):
        def cat(name):
            vals = [getattr(p, name) for p in parts]
            return None if vals[0] is None else np.concatenate(vals)

        return BatchResult(
            replications=cat("replications"),
            checkpoints=parts[0].checkpoints,
            regret=cat("regret"),
            pulls=cat("pulls"),
            guarantee_voided=cat("guarantee_voided"),
            event_a=cat("event_a"),
            phase1_end=cat("phase1_end"),
            phase1_lengths=cat("phase1_lengths"),
        )


def simulate(instance: BanditInstance, policy, horizon: int, replications, base_seed: int = 0, checkpoints=None,
             track_event_a: bool = True) -> BatchResult:
    """Run ``policy`` for ``horizon`` steps on each listed replication.

    When the policy has a confidence level, the good event (every running
    mean and second-moment estimate within ``sqrt(ln(1/delta)/(2t))`` of the
    truth) is checked after every pull of each replication.
    """
    replications = np.asarray(list(replications), dtype=np.int64)
    checkpoints = list(checkpoints or [horizon])
    R, K = len(replications), instance.n_arms
    state = policy.init_state(R, K, replications=replications)
    tapes = ArmTapes(instance.arms, base_seed, replications)
    gaps = np.asarray(instance.gaps, dtype=float)
    regret = np.zeros(R)
    log_regret = np.zeros((R, len(checkpoints)))
    rows = np.arange(R)
    delta = getattr(policy, "delta", None)
    check_a = track_event_a and delta is not None
    if check_a:
        a_ok = np.ones(R, dtype=bool)
        mu, mu2 = instance.means, instance.second_moments
        log_term = math.log(1.0 / delta)
    cp_iter = iter(enumerate(checkpoints))
    next_cp = next(cp_iter)
    for t in range(1, horizon + 1):
        arms = policy.choose(state)
        x = tapes.take(arms)
        policy.observe(state, arms, x)
        regret += gaps[arms]
        if check_a:
            c = state.counts[rows, arms]
            rad = np.sqrt(log_term / (2.0 * c))
            a_ok &= np.abs(state.sums[rows, arms] / c - mu[arms]) <= rad
            a_ok &= np.abs(state.sums_sq[rows, arms] / c - mu2[arms]) <= rad
        if next_cp is not None and t == next_cp[1]:
            log_regret[:, next_cp[0]] = regret
            next_cp = next(cp_iter, None)
    ph = state.phase
    return BatchResult(
        replications=replications,
        checkpoints=checkpoints,
        regret=log_regret,
        pulls=state.counts.copy(),
        guarantee_voided=state.guarantee_voided.copy(),
        event_a=a_ok if check_a else None,
        phase1_end=None if ph is None else ph.end.copy(),
        phase1_lengths=None if ph is None else ph.length.copy(),
    )


def _chunks(n, parts):
    parts = max(1, min(parts, n))
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [range(edges[i], edges[i + 1]) for i in range(parts)]


def simulate_parallel(instance, policy_factory, horizon, replications: int, base_seed=0, checkpoints=None,
                      threads: int = 1) -> BatchResult:
    """Split replications into contiguous chunks, one fresh policy per chunk, merged by index."""
    chunks = _chunks(replications, threads)

    def work(chunk):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return simulate(instance, policy_factory(), horizon, chunk, base_seed, checkpoints)

    if len(chunks) == 1:
        return work(chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(work, chunks))
    return BatchResult.concat(parts)


# ---------------------------------------------------------------- summary


def policy_bounds(spec: PolicySpec, policy, instance: BanditInstance, horizon: int) -> list:
    """Theoretical bounds attached to a policy's output, keyed by regime."""
    gaps = instance.gaps
    rule = B.N_SQUARED if spec.params.get("delta_rule") == "n_squared" else policy.delta
    reports = []
    if spec.name == "phi_lcb":
        rep = B.theorem1_bound(gaps, policy.phi, rule, horizon)
        if not instance.measure.continuous:
            rep.valid = False
            rep.notes.append("measure is discontinuous; the single-modulus guarantee does not apply")
        reports.append(rep)
        if rule == B.N_SQUARED and instance.measure.continuous:
            special = B.specialised_bound(gaps, policy.phi, horizon)
            if special is not None:
                reports.append(special)
    elif spec.name == "phi_lcb2":
        m = instance.measure
        phis = []
        for arm, e_i in zip(instance.arms, instance.e):
            if math.isinf(e_i):
                phis.append(m.modulus)
            elif e_i > 0:
                phis.append(restricted_modulus(m, (arm.mean, arm.variance), e_i / 2.0))
            else:
                phis.append(IDENTITY)
        reports.append(B.theorem2_bound(gaps, instance.e, phis, rule, horizon))
        if m.name == "threshold_variance" and rule == B.N_SQUARED:
            reports.append(B.threshold_corollary_bound(gaps, instance.e, horizon))
    return reports


def aggregate(regret: np.ndarray) -> dict:
    if regret.shape[0] == 0:
        return {"mean": [], "median": [], "p05": [], "p95": []}
    return {
        "mean": np.mean(regret, axis=0).tolist(),
        "median": np.median(regret, axis=0).tolist(),
        "p05": np.percentile(regret, 5, axis=0).tolist(),
        "p95": np.percentile(regret, 95, axis=0).tolist(),
    }


def regret_ratio_diagnostic(traces, checkpoints, n_arms: int | None = None) -> dict:
    """``R_t / ln t`` per replication at each checkpoint ``t`` (with ``t > 4K`` when ``n_arms`` given)."""
    if isinstance(traces, BatchResult):
        regret, cps = traces.regret, traces.checkpoints
    else:
        regret = np.array([tr.cumulative_regret for tr in traces], dtype=float).reshape(len(traces), -1)
        cps = traces[0].checkpoints if traces else list(checkpoints)
    out = {}
    for t in checkpoints:
        if t <= 1 or (n_arms is not None and t <= 4 * n_arms):
            continue
        out[int(t)] = regret[:, cps.index(t)] / math.log(t)
    return out


def _finite(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def summarise(config, instance, spec, policy, result: BatchResult) -> dict:
    reports = policy_bounds(spec, policy, instance, config.horizon)
    final = result.regret[:, -1] if result.regret.size else np.zeros(0)
    entry = {
        "policy": spec.key,
        "name": spec.name,
        "parameters": {k: _finite(v) for k, v in policy.describe().items()},
        "checkpoints": list(result.checkpoints),
        "aggregates": aggregate(result.regret),
        "mean_final_pulls": result.pulls.mean(axis=0).tolist() if len(final) else [],
        "guarantee_voided_count": int(result.guarantee_voided.sum()),
        "bounds": [r.to_dict() for r in reports],
    }
    if result.event_a is not None:
        entry["event_a_fraction"] = float(result.event_a.mean()) if len(final) else None
    if result.phase1_end is not None and len(final):
        entry["phase1_end_median"] = float(np.median(result.phase1_end))
    for r in reports:
        if r.valid and math.isfinite(r.total) and len(final):
            entry.setdefault("bound_exceed_fraction", {})[r.regime] = float(np.mean(final > r.total))
    return entry


def run_experiment(config: ExperimentConfig, threads: int = 1, out_dir=None, write=True) -> dict:
    """Simulate every configured policy and optionally write the output files."""
    instance = config.validate()
    results = {}
    entries = []
    for spec in config.policies:
        factory = lambda spec=spec: build_policy(spec, instance, config)  # noqa: E731
        log.info("running %s: n=%d, R=%d", spec.key, config.horizon, config.replications)
        res = simulate_parallel(instance, factory, config.horizon, config.replications, config.base_seed,
                                config.checkpoints, threads)
        results[spec.key] = res
        entries.append(summarise(config, instance, spec, factory(), res))
    echo = config.to_dict()
    # where the files go is not part of the result
    echo.pop("output")
    summary = {
        "config": echo,
        "instance": {
            "f": instance.f,
            "best_arm": instance.best_arm,
            "gaps": instance.gaps,
            "e": [_finite(v) for v in instance.e],
            "means": instance.means.tolist(),
            "variances": [a.variance for a in instance.arms],
        },
        "policies": entries,
        "traces": results,
    }
    if write:
        emit_outputs(summary, out_dir or config.output)
    return summary


# ---------------------------------------------------------------- outputs


def _traces_csv(summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for key, res in summary.get("traces", {}).items():
        for k, r in enumerate(res.replications):
            p1 = "" if res.phase1_end is None else int(res.phase1_end[k])
            voided = "true" if res.guarantee_voided[k] else "false"
            for j, t in enumerate(res.checkpoints):
                w.writerow([key, int(r), t, repr(float(res.regret[k, j])), p1, voided])
    return buf.getvalue()


def results_json(summary) -> str:
    public = {k: v for k, v in summary.items() if k != "traces"}
    return json.dumps(public, indent=2, sort_keys=False, allow_nan=False) + "\n"


def emit_outputs(summary: dict, directory) -> dict:
    """Write ``results.json``, ``traces.csv`` and ``regret.svg`` into ``directory``.

    Files are written to temporaries and moved into place; on failure the
    temporaries are removed and :class:`OutputError` is raised.
    """
    payloads = {
        "results.json": results_json(summary),
        "traces.csv": _traces_csv(summary),
        "regret.svg": regret_plot(summary),
    }
    temps = []
    # mkstemp creates 0600 files; give the outputs ordinary umask permissions
    umask = os.umask(0)
    os.umask(umask)
    try:
        os.makedirs(directory, exist_ok=True)
        for name, text in payloads.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=directory)
            temps.append((tmp, os.path.join(directory, name)))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o666 & ~umask)
        for tmp, final in temps:
            os.replace(tmp, final)
    except OSError as exc:
        for tmp, _ in temps:
            if os.path.exists(tmp):
                os.remove(tmp)
        raise OutputError(f"cannot write outputs to {directory}: {exc}") from exc
    return {name: os.path.join(directory, name) for name in payloads}
