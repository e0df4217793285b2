import math
import zlib

import numpy as np
import pytest

from riskbandit.risk_measures import (
    IDENTITY,
    NON_HOELDER,
    ConfigError,
    DomainError,
    Modulus,
    catalog,
    construct_modulus,
    disc_distance,
    hoelder,
    lipschitz,
    modulus_inverse,
    restricted_modulus,
)

CATALOG_CASES = [
    ("standard", {}),
    ("variance", {}),
    ("mean_variance_linear", {"lam": 0.5}),
    ("mean_variance_linear", {"lam": 3.0}),
    ("mean_variance_sqrt", {"lam": 0.5}),
    ("mean_variance_sqrt", {"lam": 2.0}),
    ("log_exponential", {"lam": 1.0}),
    ("threshold_variance", {"v": 0.1}),
    ("non_holder_demo", {}),
    ("optimism_trap", {"v": 0.15}),
]


def test_catalog_values():
    assert catalog("standard").evaluate(0.3, 0.2) == 0.3
    assert catalog("variance").evaluate(0.3, 0.2) == 0.2
    assert catalog("threshold_variance", v=0.5, diagnostic=True).evaluate(0.5, 0.1) == 0.5
    assert catalog("threshold_variance", v=0.2).evaluate(0.5, 0.2) == 1.0
    assert catalog("log_exponential", lam=1.0).evaluate(0.5, 0.25) == pytest.approx(0.75)
    assert catalog("mean_variance_linear", lam=2.0).evaluate(0.1, 0.2) == pytest.approx(0.5)
    assert catalog("mean_variance_sqrt", lam=2.0).evaluate(0.1, 0.04) == pytest.approx(0.5)


def test_non_holder_values():
    h = catalog("non_holder_demo")
    assert h.evaluate(0.0, 0.1) == 0.0
    assert h.evaluate(2 / math.e, 0.1) == pytest.approx(1.0)


def test_catalog_moduli():
    assert catalog("standard").modulus.forward(0.3) == 0.3
    assert catalog("mean_variance_linear", lam=3.0).modulus.constant == 3.0
    assert catalog("mean_variance_linear", lam=0.2).modulus.constant == 1.0
    assert catalog("log_exponential", lam=0.5).modulus.constant == 1.5
    m = catalog("mean_variance_sqrt", lam=2.0).modulus
    assert m.kind == "hoelder" and m.alpha == 0.5
    assert catalog("threshold_variance", v=0.1).modulus is None


@pytest.mark.parametrize(
    "name,params",
    [
        ("nope", {}),
        ("mean_variance_linear", {"lam": -1.0}),
        ("mean_variance_linear", {}),
        ("threshold_variance", {"v": 0.5}),
        ("threshold_variance", {"v": 0.0}),
        ("optimism_trap", {"v": 0.05}),
    ],
)
def test_catalog_errors(name, params):
    with pytest.raises(ConfigError):
        catalog(name, params)


def test_modulus_inverse_examples():
    assert modulus_inverse(IDENTITY, 0.3) == pytest.approx(0.3)
    assert modulus_inverse(hoelder(1.0, 0.5), 0.5) == pytest.approx(0.25)
    assert modulus_inverse(NON_HOELDER, 1.0) == pytest.approx(2 / math.e)
    assert 2 / math.e == pytest.approx(0.73576, abs=1e-5)


def test_bisection_inverse_matches_closed_form():
    generic = Modulus(lambda z: 3.0 * np.power(z, 0.7), name="no-inverse")
    for w in (1e-4, 0.3, 2.0, 17.0):
        expected = (w / 3.0) ** (1 / 0.7)
        assert modulus_inverse(generic, w) == pytest.approx(expected, abs=1e-11)


def test_inverse_domain_errors():
    with pytest.raises(DomainError):
        modulus_inverse(IDENTITY, -0.1)
    bounded = construct_modulus(lambda eps: eps, resolution=5)
    with pytest.raises(DomainError):
        modulus_inverse(bounded, bounded.w_max * 2)


@pytest.mark.parametrize(
    "phi", [IDENTITY, lipschitz(2.5), hoelder(1.0, 0.5), hoelder(2 ** 0.5 * 3, 0.5), NON_HOELDER],
    ids=lambda p: p.name,
)
def test_inverse_round_trip(phi):
    for z in np.geomspace(1e-6, 1.999 if phi is NON_HOELDER else 2.0, 60):
        assert modulus_inverse(phi, phi.forward(z)) == pytest.approx(z, rel=1e-9)


def test_generic_round_trip_by_bisection():
    phi = Modulus(lambda z: z + np.sqrt(z), name="z+sqrt")
    for z in np.geomspace(1e-6, 2.0, 40):
        assert modulus_inverse(phi, phi.forward(z)) == pytest.approx(z, rel=1e-9, abs=1e-12)


def test_disc_distance_examples():
    tv = catalog("threshold_variance", v=0.5, diagnostic=True)
    assert disc_distance(tv, 0.3, 0.3) == pytest.approx(0.2)
    assert disc_distance(catalog("standard"), 0.4, 0.1) == math.inf
    assert disc_distance(catalog("threshold_variance", v=0.2), 0.9, 0.2) == 0.0
    trap = catalog("optimism_trap", v=0.15)
    assert disc_distance(trap, 0.5, 0.1) == 0.0
    assert disc_distance(trap, 0.6, 0.1) == pytest.approx(min(0.1, 0.05))


@pytest.mark.parametrize("name,params", [("threshold_variance", {"v": 0.1}), ("optimism_trap", {"v": 0.2})])
def test_disc_distance_is_1_lipschitz(name, params):
    m = catalog(name, params)
    rng = np.random.default_rng(4)
    p = np.c_[rng.random(10 ** 4), rng.random(10 ** 4) / 4]
    q = np.c_[rng.random(10 ** 4), rng.random(10 ** 4) / 4]
    gap = np.abs(m.disc_distance(p[:, 0], p[:, 1]) - m.disc_distance(q[:, 0], q[:, 1]))
    assert np.all(gap <= np.abs(p - q).sum(axis=1) + 1e-12)


def test_restricted_modulus():
    tv = catalog("threshold_variance", v=0.5, diagnostic=True)
    assert restricted_modulus(tv, (0.3, 0.1), 0.2) is IDENTITY
    tv2 = catalog("threshold_variance", v=0.2)
    assert restricted_modulus(tv2, (0.5, 0.24), 0.03) is IDENTITY
    assert restricted_modulus(catalog("standard"), (0.1, 0.1), 5.0) is IDENTITY
    with pytest.raises(ValueError):
        restricted_modulus(tv2, (0.5, 0.21), 0.03)


def _same_region_pairs(measure, n, rng):
    y_max = measure.y_max
    x1, x2 = rng.random(n), rng.random(n)
    y1, y2 = rng.random(n) * y_max, rng.random(n) * y_max
    if measure.continuous:
        return x1, y1, x2, y2
    # a segment that stays inside one continuity region; the trap point is a
    # measure-zero set and is excluded explicitly
    v = measure.params["v"]
    same = (y1 < v) == (y2 < v)
    return x1[same], y1[same], x2[same], y2[same]


@pytest.mark.parametrize("name,params", CATALOG_CASES, ids=[f"{n}{p}" for n, p in CATALOG_CASES])
def test_modulus_property_random_pairs(name, params):
    m = catalog(name, params)
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    x1, y1, x2, y2 = _same_region_pairs(m, 10 ** 5, rng)
    diff = np.abs(m.evaluate(x2, y2) - m.evaluate(x1, y1))
    phi = m.modulus or m.region_modulus(x1[0], y1[0])
    bound = phi.forward(np.abs(x2 - x1) + np.abs(y2 - y1))
    assert np.count_nonzero(diff > bound) == 0


def test_plain_sqrt_modulus_is_not_enough_in_l1():
    # |dx| = |dy| = 1/4 gives a difference 0.75 > sqrt(1/2)
    m = catalog("mean_variance_sqrt", lam=1.0)
    diff = m.evaluate(0.25, 0.25) - m.evaluate(0.0, 0.0)
    assert diff > math.sqrt(0.5)
    assert diff <= m.modulus.forward(0.5)


@pytest.mark.parametrize("L", [1.0, 2.0, 5.0])
def test_construct_modulus_lipschitz_oracle(L):
    phi = construct_modulus(lambda eps: eps / L, resolution=20)
    assert phi.forward(0.0) == 0.0
    grid = np.geomspace(phi.z_min, phi.z_max, 400)
    vals = phi.forward(grid)
    assert np.all(vals <= 4 * L * grid * (1 + 1e-12))
    assert np.all(vals >= L * grid)
    rng = np.random.default_rng(1)
    a = rng.uniform(phi.z_min, phi.z_max, 1000)
    b = rng.uniform(phi.z_min, phi.z_max, 1000)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    keep = hi > lo
    assert np.all(phi.forward(hi[keep]) > phi.forward(lo[keep]))


def test_construct_modulus_dominates_oscillation():
    # f(x, y) = sqrt(x) is 1/2-Hoelder: |f2 - f1| < eps whenever distance < eps**2
    f = lambda x, y: np.sqrt(x)  # noqa: E731
    phi = construct_modulus(lambda eps: eps ** 2, resolution=12)
    rng = np.random.default_rng(2)
    x1, x2 = rng.random(10 ** 5), rng.random(10 ** 5)
    y1, y2 = rng.random(10 ** 5) / 4, rng.random(10 ** 5) / 4
    z = np.abs(x2 - x1) + np.abs(y2 - y1)
    inside = (z >= phi.z_min) & (z <= phi.z_max)
    assert inside.mean() > 0.99
    diff = np.abs(f(x2, y2) - f(x1, y1))[inside]
    assert np.all(diff <= phi.forward(z[inside]))


def test_construct_modulus_covered_range():
    phi = construct_modulus(lambda eps: eps, resolution=4)
    assert phi.z_min == pytest.approx(2 ** -4) and phi.z_max == pytest.approx(2 ** 4)
    with pytest.raises(DomainError):
        phi.forward(phi.z_min / 2)
    with pytest.raises(DomainError):
        phi.forward(phi.z_max * 2)
    z = 0.3
    assert modulus_inverse(phi, phi.forward(z)) == pytest.approx(z, abs=1e-11)


def test_construct_modulus_rejects_non_monotone_oracle():
    with pytest.raises(ConfigError):
        construct_modulus(lambda eps: 1.0 / eps, resolution=3)


def test_shifted_measure_keeps_moduli():
    m = catalog("log_exponential", lam=0.5)
    s = m.shifted(3.0)
    assert s.evaluate(0.2, 0.1) == pytest.approx(m.evaluate(0.2, 0.1) + 3.0)
    assert s.modulus is m.modulus


def test_trap_absorbs_rounding_of_closed_form_moments():
    from riskbandit.environment import TwoPoint

    arm = TwoPoint.from_moments(0.5, 0.1)
    assert arm.variance != 0.1
    trap = catalog("optimism_trap", v=0.15)
    assert trap.evaluate(arm.mean, arm.variance) == 1.0
    assert disc_distance(trap, arm.mean, arm.variance) == 0.0
    assert trap.evaluate(0.5, 0.1 + 1e-9) == 0.0
    assert disc_distance(trap, 0.5, 0.1 + 1e-9) == pytest.approx(1e-9 - 1e-12, rel=1e-6)
