"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run alone with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed at the end of the session.
"""

import math
import time
import warnings

import numpy as np
import pytest

from riskbandit.bounds import (
    N_SQUARED,
    hoelder_bound,
    lipschitz_bound,
    non_hoelder_bound,
    phase1_cap,
    pull_count_bound,
    theorem1_bound,
    theorem2_bound,
)
from riskbandit.cli import main
from riskbandit.environment import BanditInstance, Bernoulli, ScaledBeta, TwoPoint, stream
from riskbandit.estimators import mean_radius
from riskbandit.harness import regret_ratio_diagnostic, simulate
from riskbandit.policies import PhiLCB, PhiLCB2, Uniform, default_budget
from riskbandit.risk_measures import IDENTITY, NON_HOELDER, catalog, hoelder, lipschitz, restricted_modulus


def binomial_se(p, n):
    return math.sqrt(p * (1 - p) / n)


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


# ---------------------------------------------------------------- 1


@pytest.mark.criterion(1, "concentration coverage")
def test_concentration_coverage():
    with Clock() as clock:
        arm, delta, reps = Bernoulli(0.3), 0.01, 10 ** 4
        limit = 2 * delta + 3 * binomial_se(2 * delta, reps)
        x = arm.sample(stream(2024, 0, 0), (reps, 1000))
        fractions = {}
        for t in (10, 100, 1000):
            mu_hat = x[:, :t].mean(axis=1)
            fractions[t] = float(np.mean(np.abs(mu_hat - arm.mean) > mean_radius(t, delta)))
    print(f"miss fractions {fractions}, limit {limit:.4f}, {clock.seconds:.2f}s")
    assert all(f <= limit for f in fractions.values()), fractions
    assert clock.seconds < 10


# ---------------------------------------------------------------- 2

MEASURES = [
    ("standard", {}),
    ("variance", {}),
    ("mean_variance_linear", {"lam": 0.5}),
    ("mean_variance_linear", {"lam": 2.0}),
    ("mean_variance_sqrt", {"lam": 0.5}),
    ("mean_variance_sqrt", {"lam": 2.0}),
    ("log_exponential", {"lam": 1.0}),
    ("non_holder_demo", {}),
    ("threshold_variance", {"v": 0.1}),
    ("threshold_variance", {"v": 0.5, "diagnostic": True}),
    ("optimism_trap", {"v": 0.15}),
]


@pytest.mark.criterion(2, "modulus property on same-region pairs")
def test_modulus_property():
    rng = np.random.default_rng(7)
    violations = {}
    with Clock() as clock:
        for name, params in MEASURES:
            m = catalog(name, params)
            x1, x2 = rng.random(10 ** 5), rng.random(10 ** 5)
            y1, y2 = rng.random(10 ** 5) * m.y_max, rng.random(10 ** 5) * m.y_max
            if m.continuous:
                phi = m.modulus
            else:
                # move the second point onto the first one's side of the threshold
                v = m.params["v"]
                low = y1 < v
                y2 = np.where(low, rng.random(10 ** 5) * v, v + rng.random(10 ** 5) * (m.y_max - v))
                phi = m.region_modulus(x1[0], y1[0])
                assert (y2 < v).tolist() == low.tolist()
            diff = np.abs(m.evaluate(x2, y2) - m.evaluate(x1, y1))
            bound = phi.forward(np.abs(x2 - x1) + np.abs(y2 - y1))
            violations[f"{name}{params}"] = int(np.count_nonzero(diff > bound))
    print(f"violations {violations}, {clock.seconds:.2f}s")
    assert sum(violations.values()) == 0, violations
    assert clock.seconds < 5


# ---------------------------------------------------------------- 3, 4, 5

N3, R3 = 10 ** 4, 1000
CHECKPOINTS3 = [10, 100, 1000, N3]


@pytest.fixture(scope="module")
def mean_instance():
    return BanditInstance([Bernoulli(0.4), Bernoulli(0.6)], catalog("standard"))


@pytest.fixture(scope="module")
def lcb_run(mean_instance):
    with Clock() as clock:
        res = simulate(mean_instance, PhiLCB(mean_instance.measure, 1 / N3 ** 2), N3, range(R3), base_seed=1,
                       checkpoints=CHECKPOINTS3)
    return res, clock.seconds


@pytest.mark.criterion(3, "single-modulus regret bound validity")
def test_theorem1_validity(mean_instance, lcb_run):
    res, seconds = lcb_run
    bound = theorem1_bound(mean_instance.gaps, IDENTITY, N_SQUARED, N3)
    assert bound.valid
    final = res.regret[:, -1]
    p = 4 * mean_instance.n_arms / N3
    exceed = float(np.mean(final > bound.total))
    print(f"bound {bound.total:.1f}, mean regret {final.mean():.1f}, exceed {exceed}, {seconds:.2f}s")
    assert exceed <= p + 3 * binomial_se(p, R3)
    assert final.mean() <= 0.1 * bound.total
    assert seconds < 60


@pytest.mark.criterion(4, "pull-count bound on the good event")
def test_pull_count_bound(mean_instance, lcb_run):
    res, _ = lcb_run
    delta = 1 / N3 ** 2
    good = res.event_a
    assert good.any()
    exceptions = 0
    for i, gap in enumerate(mean_instance.gaps):
        if gap > 0:
            cap = pull_count_bound(gap, IDENTITY, delta)
            exceptions += int(np.count_nonzero(res.pulls[good, i] > cap))
    print(f"good event in {good.mean():.3f} of replications, exceptions {exceptions}")
    assert exceptions == 0


@pytest.mark.criterion(5, "logarithmic-growth diagnostic")
def test_log_growth():
    # the diagnostic's reference instance: gaps (0, 0.3), delta = 1/n**2
    inst = BanditInstance([Bernoulli(0.4), Bernoulli(0.7)], catalog("standard"))
    assert inst.gaps == pytest.approx([0.0, 0.3])
    lcb = simulate(inst, PhiLCB(inst.measure, 1 / N3 ** 2), N3, range(R3), base_seed=5, checkpoints=CHECKPOINTS3,
                   track_event_a=False)
    ratios = regret_ratio_diagnostic(lcb, [1000, N3], n_arms=inst.n_arms)
    growth = ratios[N3] / ratios[1000]
    within = float(np.mean((growth <= 3) & (growth >= 1 / 3)))
    uni = simulate(inst, Uniform(5), N3, range(R3), base_seed=5, checkpoints=CHECKPOINTS3, track_event_a=False)
    u = regret_ratio_diagnostic(uni, [1000, N3], n_arms=inst.n_arms)
    uni_growth = float(u[N3].mean() / u[1000].mean())
    print(f"phi-LCB growth median {np.median(growth):.3f}, within 3x {within:.3f}; uniform growth {uni_growth:.2f}")
    assert uni_growth >= 5
    assert within >= 0.9, f"only {within:.1%} of replications within 3x (median growth {np.median(growth):.2f})"


# ---------------------------------------------------------------- 6


@pytest.mark.criterion(6, "phi-LCB2 on threshold variance")
def test_lcb2_threshold_variance():
    n, R = 10 ** 5, 1000
    delta = 1 / n ** 2
    tv = catalog("threshold_variance", v=0.5, diagnostic=True)
    inst = BanditInstance([TwoPoint.from_moments(0.5, 0.1), TwoPoint(0.0, 1.0, 0.4)], tv)
    assert [a.variance for a in inst.arms] == pytest.approx([0.1, 0.24])
    with Clock() as clock:
        res = simulate(inst, PhiLCB2(tv, delta, default_budget(n, inst.n_arms)), n, range(R), base_seed=6,
                       checkpoints=[n], track_event_a=False)
    caps = np.array([phase1_cap(e, delta) for e in inst.e])
    over_cap = int(np.count_nonzero(res.phase1_lengths > caps))
    phis = [restricted_modulus(tv, (a.mean, a.variance), e / 2) for a, e in zip(inst.arms, inst.e)]
    bound = theorem2_bound(inst.gaps, inst.e, phis, N_SQUARED, n)
    assert bound.valid, bound.notes
    fail = float(np.mean(res.regret[:, -1] > bound.total))
    print(f"caps {caps.round(1).tolist()}, median lengths {np.median(res.phase1_lengths, axis=0).tolist()}, "
          f"bound {bound.total:.1f}, mean regret {res.regret[:, -1].mean():.1f}, fail {fail}, {clock.seconds:.2f}s")
    assert over_cap == 0
    assert not res.guarantee_voided.any()
    assert fail <= 4 * inst.n_arms / n
    assert clock.seconds < 120


# ---------------------------------------------------------------- 7


@pytest.mark.criterion(7, "optimism-trap reproduction")
def test_optimism_trap():
    n = 10 ** 5
    trap = catalog("optimism_trap", v=0.15)
    # a continuous law sitting on the trap point; a discrete one would put
    # its sample moments exactly on the trap with positive probability
    inst = BanditInstance([ScaledBeta(0.75, 0.75), Bernoulli(0.5)], trap)
    assert inst.e[0] == 0 and inst.f == [1.0, 0.5] and inst.best_arm == 1
    gap = inst.gaps[0]
    with Clock() as clock:
        naive = simulate(inst, PhiLCB(trap, 1 / n ** 2, phi=IDENTITY), n, range(100), base_seed=7,
                         checkpoints=[100, n], track_event_a=False)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            two = simulate(inst, PhiLCB2(trap, 1 / n ** 2, default_budget(n, 2)), n, range(20), base_seed=7,
                           checkpoints=[n], track_event_a=False)
    share = (naive.regret[:, 1] - naive.regret[:, 0]) / gap / (n - 100)
    print(f"trap share after t=100: min {share.min():.4f}, min regret {naive.regret[:, 1].min():.0f}, "
          f"{clock.seconds:.2f}s")
    assert np.all(share >= 0.95)
    assert np.all(naive.regret[:, 1] >= 0.4 * n)
    phase = two.phase1_lengths[:, 0]
    assert np.all(phase == default_budget(n, 2))
    assert two.guarantee_voided.all()
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    assert clock.seconds < 30


# ---------------------------------------------------------------- 8


@pytest.mark.criterion(8, "bound-evaluator cross-checks")
def test_bound_cross_checks():
    rng = np.random.default_rng(88)
    worst = 0.0
    for _ in range(100):
        L, alpha = rng.uniform(0.5, 5.0), rng.uniform(0.2, 0.95)
        n = float(rng.integers(20, 10 ** 9))
        gaps = [0.0, *rng.uniform(0.01, 1.0, size=3)]
        hgaps = [0.0, *rng.uniform(0.15, 1.44, size=3)]
        pairs = [
            (theorem1_bound(gaps, lipschitz(L), N_SQUARED, n), lipschitz_bound(gaps, L, n)),
            (theorem1_bound(gaps, hoelder(L, alpha), N_SQUARED, n), hoelder_bound(gaps, L, alpha, n)),
            (theorem1_bound(hgaps, NON_HOELDER, N_SQUARED, n), non_hoelder_bound(hgaps, n)),
        ]
        for generic, closed in pairs:
            worst = max(worst, abs(generic.total - closed.total) / closed.total)
    print(f"worst relative disagreement {worst:.2e}")
    assert worst <= 1e-9
    e4, e10 = math.exp(4), math.exp(10)
    assert theorem1_bound([0.0, 0.5], IDENTITY, N_SQUARED, e4).total == pytest.approx(1152.5, rel=1e-12)
    assert theorem2_bound([0.0, 0.5], [0.4, 0.4], [IDENTITY] * 2, N_SQUARED, e10).total == pytest.approx(
        13005.5, rel=1e-12
    )
    assert non_hoelder_bound([0.0, 0.5], e4).total == pytest.approx(9 * 0.5 * math.exp(8) * 4 + 0.5, rel=1e-12)


# ---------------------------------------------------------------- 9

CONFIG9 = """\
instance:
  measure: {name: threshold_variance, params: {v: 0.5, diagnostic: true}}
  arms:
    - {kind: two_point, a: 0.0, b: 1.0, p: 0.5}
    - {kind: scaled_beta, alpha: 2.0, beta: 5.0}
    - {kind: bernoulli, p: 0.15}
policies:
  - {name: phi_lcb2, delta_rule: n_squared}
  - {name: phi_lcb, delta_rule: n_squared, phi: identity}
  - {name: uniform}
  - {name: greedy}
horizon: 3000
replications: 40
base_seed: 123456789012345
checkpoints: [10, 100, 1000, 3000]
"""


@pytest.mark.criterion(9, "determinism across thread counts")
def test_determinism(tmp_path, capsys):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text(CONFIG9)
    assert main(["run", str(cfg), "--out", str(tmp_path / "one"), "--threads", "1"]) == 0
    assert main(["run", str(cfg), "--out", str(tmp_path / "four"), "--threads", "4"]) == 0
    capsys.readouterr()
    for name in ("traces.csv", "results.json"):
        a = (tmp_path / "one" / name).read_bytes()
        b = (tmp_path / "four" / name).read_bytes()
        assert a == b, name
