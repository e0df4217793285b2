"""Risk measures ``f(mean, variance)`` and their moduli of continuity.

A :class:`RiskMeasure` bundles the function itself, a global modulus (when
``f`` is continuous on the whole domain), a per-region modulus for the
discontinuous members of the catalog, and the l1 distance to the set of
discontinuities. Every callable here is numpy-vectorised.

The default domain is ``[0, 1] x [0, 1/4]``; the variance of a
``[0, 1]``-valued variable never exceeds 1/4. Passing ``diagnostic=True``
to :func:`catalog` widens the variance axis to ``[0, 1]`` so thresholds
above 1/4 can be studied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import bisect


class ConfigError(ValueError):
    """Invalid measure or experiment configuration."""


class DomainError(ValueError):
    """Value outside the domain or range of a modulus."""


VARIANCE_MAX = 0.25
INVERSE_XTOL = 1e-12


@dataclass(frozen=True)
class Modulus:
    """A strictly increasing ``phi`` with ``phi(0) == 0``.

    ``z_min``/``z_max`` bound the region where ``forward`` is defined (``0``
    itself is always allowed). ``kind`` and the accompanying constants let
    the bound calculators recognise closed-form specialisations.
    """

    forward_fn: Callable
    inverse_fn: Callable | None = None
    name: str = "generic"
    kind: str = "generic"
    constant: float | None = None
    alpha: float | None = None
    z_min: float = 0.0
    z_max: float = math.inf
    w_max: float = math.inf

    def forward(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z < 0):
            raise DomainError("modulus argument must be nonnegative")
        if self.z_min > 0 and np.any((z > 0) & (z < self.z_min)):
            raise DomainError(f"argument below covered range [{self.z_min}, {self.z_max}]")
        out = self.forward_fn(z)
        return out[()] if out.ndim == 0 else out

    def inverse(self, w):
        return modulus_inverse(self, w)

    def __call__(self, z):
        return self.forward(z)


def lipschitz(L: float = 1.0) -> Modulus:
    L = float(L)
    return Modulus(
        forward_fn=lambda z: L * z,
        inverse_fn=lambda w: w / L,
        name="identity" if L == 1.0 else f"lipschitz({L:g})",
        kind="lipschitz",
        constant=L,
        alpha=1.0,
    )


IDENTITY = lipschitz(1.0)


def hoelder(L: float, alpha: float) -> Modulus:
    L, alpha = float(L), float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ConfigError("Hoelder exponent must lie in (0, 1]")
    return Modulus(
        forward_fn=lambda z: L * np.power(z, alpha),
        inverse_fn=lambda w: np.power(w / L, 1.0 / alpha),
        name=f"hoelder({L:g}, {alpha:g})",
        kind="lipschitz" if alpha == 1.0 else "hoelder",
        constant=L,
        alpha=alpha,
    )


def _h(z):
    # -1/ln(z/2) is increasing on [0, 2) and blows up at 2.
    z = np.asarray(z, dtype=float)
    out = np.full(z.shape, np.inf)
    pos = (z > 0) & (z < 2.0)
    out[pos] = -1.0 / np.log(z[pos] / 2.0)
    out[z == 0] = 0.0
    return out


def _h_inverse(w):
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(w > 0, 2.0 * np.exp(-1.0 / np.where(w > 0, w, 1.0)), 0.0)


NON_HOELDER = Modulus(
    forward_fn=_h,
    inverse_fn=_h_inverse,
    name="h",
    kind="non_hoelder",
    z_max=2.0,
)


def modulus_inverse(phi: Modulus, w):
    """Solve ``phi(z) == w`` for ``z``.

    Closed-form inverses are used when available, otherwise bisection to an
    absolute tolerance of 1e-12.
    """
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr < 0) or np.any(w_arr > phi.w_max):
        raise DomainError(f"{w!r} outside the range of modulus {phi.name}")
    if phi.inverse_fn is not None:
        out = np.asarray(phi.inverse_fn(w_arr), dtype=float)
        return float(out) if out.ndim == 0 else out
    if w_arr.ndim:
        return np.array([modulus_inverse(phi, float(v)) for v in w_arr.ravel()]).reshape(w_arr.shape)
    w = float(w_arr)
    if w == 0.0:
        return 0.0
    lo = phi.z_min
    if float(phi.forward(lo)) > w:
        raise DomainError(f"{w!r} below the covered range of modulus {phi.name}")
    hi = max(2.0 * lo, 1.0)
    while float(phi.forward(min(hi, phi.z_max))) < w:
        if hi >= phi.z_max:
            raise DomainError(f"{w!r} outside the range of modulus {phi.name}")
        hi *= 2.0
    hi = min(hi, phi.z_max)
    return bisect(lambda z: float(phi.forward(z)) - w, lo, hi, xtol=INVERSE_XTOL)


def construct_modulus(delta_of_eps: Callable[[float], float], resolution: int = 30) -> Modulus:
    """Build a piecewise-linear modulus from a uniform-continuity oracle.

    ``delta_of_eps(eps)`` must return a ``delta`` such that points closer than
    ``delta`` in l1 have ``f`` values closer than ``eps``. Levels
    ``eps_i = 2**-i`` for ``i`` in ``[0, resolution]`` give breakpoints
    ``a_{-i} = min(delta(eps_i), eps_i)``; above ``a_0`` the scale doubles,
    ``a_i = 2**i a_0``. The step function ``psi(z) = 2**k`` on
    ``(a_{k-1}, a_k]`` is then dominated by linear interpolation from
    ``(a_{k-1}, 2**k)`` to ``(a_k, 2**(k+1))``.

    The result only covers ``[a_{-resolution}, a_resolution]`` (plus 0);
    arguments outside raise :class:`DomainError`.
    """
    if resolution < 1:
        raise ConfigError("resolution must be a positive integer")
    raw = [float(delta_of_eps(2.0 ** -i)) for i in range(resolution + 1)]
    if not all(d > 0 for d in raw):
        raise ConfigError("oracle must return positive deltas")
    if any(raw[i + 1] > raw[i] for i in range(resolution)):
        raise ConfigError("oracle delta(eps) must be nondecreasing in eps")
    small = [min(d, 2.0 ** -i) for i, d in enumerate(raw)]
    # levels k = -resolution .. resolution
    levels = np.arange(-resolution, resolution + 1)
    a = np.array(small[::-1] + [2.0 ** i * small[0] for i in range(1, resolution + 1)])
    # drop repeated breakpoints; the interval (a_{k-1}, a_k] is then nonempty
    keep = np.r_[True, np.diff(a) > 0]
    a, levels = a[keep], levels[keep]
    lo_val = 2.0 ** levels.astype(float)
    hi_val = 2.0 * lo_val
    a_prev = np.r_[0.0, a[:-1]]
    # skipped levels only make the curve jump upward, never down
    start_val = np.r_[0.0, lo_val[1:]]

    def forward_fn(z):
        z = np.asarray(z, dtype=float)
        if np.any(z > a[-1]):
            raise DomainError(f"argument above covered range (max {a[-1]:.6g})")
        k = np.searchsorted(a, z, side="left")
        k = np.minimum(k, len(a) - 1)
        frac = (z - a_prev[k]) / (a[k] - a_prev[k])
        out = start_val[k] + (hi_val[k] - start_val[k]) * frac
        out = np.where(z == 0, 0.0, out)
        return out

    return Modulus(
        forward_fn=forward_fn,
        inverse_fn=None,
        name="constructed",
        kind="generic",
        z_min=float(a[0]),
        z_max=float(a[-1]),
        w_max=float(hi_val[-1]),
    )


@dataclass(frozen=True)
class RiskMeasure:
    """A risk criterion ``f(mean, variance)`` on the domain ``[0,1] x [0, y_max]``.

    ``modulus`` is the global modulus, or ``None`` when ``f`` has
    discontinuities; ``region_modulus(x, y)`` returns a modulus valid on the
    continuity region containing ``(x, y)``.
    """

    name: str
    evaluate_fn: Callable
    disc_distance_fn: Callable
    modulus: Modulus | None
    region_modulus_fn: Callable | None = None
    params: dict = field(default_factory=dict)
    y_max: float = VARIANCE_MAX

    def evaluate(self, x, y):
        out = np.asarray(self.evaluate_fn(np.asarray(x, dtype=float), np.asarray(y, dtype=float)), dtype=float)
        return out[()] if out.ndim == 0 else out

    __call__ = evaluate

    def disc_distance(self, x, y):
        out = np.asarray(self.disc_distance_fn(np.asarray(x, dtype=float), np.asarray(y, dtype=float)), dtype=float)
        return out[()] if out.ndim == 0 else out

    @property
    def continuous(self) -> bool:
        return self.modulus is not None

    def region_modulus(self, x, y) -> Modulus:
        if self.region_modulus_fn is None:
            return self.modulus
        return self.region_modulus_fn(float(x), float(y))

    def shifted(self, c: float) -> "RiskMeasure":
        """``f + c``: same moduli and discontinuities, shifted values."""
        fn = self.evaluate_fn
        return RiskMeasure(
            name=f"{self.name}+{c:g}",
            evaluate_fn=lambda x, y: fn(x, y) + c,
            disc_distance_fn=self.disc_distance_fn,
            modulus=self.modulus,
            region_modulus_fn=self.region_modulus_fn,
            params=dict(self.params),
            y_max=self.y_max,
        )

    def spec(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


def disc_distance(measure: RiskMeasure, x, y):
    """l1 distance from ``(x, y)`` to the nearest discontinuity; ``inf`` if none."""
    return measure.disc_distance(x, y)


def restricted_modulus(measure: RiskMeasure, center, radius: float) -> Modulus:
    """Modulus valid on the l1 ball ``B(center, radius)``.

    The ball must not touch a discontinuity of ``measure``.
    """
    x, y = center
    if not radius > 0:
        raise ValueError("radius must be positive")
    d = float(measure.disc_distance(x, y))
    if not (d > radius or d == math.inf):
        raise ValueError(f"ball of radius {radius} around {center} meets a discontinuity of {measure.name}")
    return measure.region_modulus(x, y)


def _no_discontinuity(x, y):
    return np.full(np.broadcast(x, y).shape, np.inf)


def _standard():
    return RiskMeasure("standard", lambda x, y: x + 0.0 * y, _no_discontinuity, IDENTITY)


def _variance():
    return RiskMeasure("variance", lambda x, y: y + 0.0 * x, _no_discontinuity, IDENTITY)


def _mean_variance_linear(lam):
    return RiskMeasure(
        "mean_variance_linear",
        lambda x, y: x + lam * y,
        _no_discontinuity,
        lipschitz(max(1.0, lam)),
        params={"lam": lam},
    )


def _mean_variance_sqrt(lam):
    # |dx| + lam |sqrt(y2) - sqrt(y1)| <= max(1, lam) (sqrt|dx| + sqrt|dy|)
    # <= sqrt(2) max(1, lam) sqrt(|dx| + |dy|); the sqrt(2) is needed in l1.
    return RiskMeasure(
        "mean_variance_sqrt",
        lambda x, y: x + lam * np.sqrt(y),
        _no_discontinuity,
        hoelder(math.sqrt(2.0) * max(1.0, lam), 0.5),
        params={"lam": lam},
    )


def _log_exponential(lam):
    return RiskMeasure(
        "log_exponential",
        lambda x, y: x + 0.5 * lam * x * x + 0.5 * lam * y,
        _no_discontinuity,
        lipschitz(1.0 + lam),
        params={"lam": lam},
    )


def _non_holder_demo():
    return RiskMeasure("non_holder_demo", lambda x, y: _h(x) + 0.0 * y, _no_discontinuity, NON_HOELDER)


def _threshold_variance(v, y_max):
    return RiskMeasure(
        "threshold_variance",
        lambda x, y: np.where(y < v, x, 1.0),
        lambda x, y: np.abs(y - v) + 0.0 * x,
        None,
        region_modulus_fn=lambda x, y: IDENTITY,
        params={"v": v},
        y_max=y_max,
    )


TRAP_TOLERANCE = 1e-12


def _optimism_trap(v, x0, y0, y_max):
    # the trap "point" is an l1 ball of radius TRAP_TOLERANCE, so that closed-form
    # moments with rounding error (e.g. a two-point law built for variance 0.1) land on it
    def evaluate(x, y):
        out = np.where(y >= v, 0.5, 0.0)
        return np.where(np.abs(x - x0) + np.abs(y - y0) <= TRAP_TOLERANCE, 1.0, out)

    def dist(x, y):
        to_trap = np.maximum(np.abs(x - x0) + np.abs(y - y0) - TRAP_TOLERANCE, 0.0)
        return np.minimum(to_trap, np.abs(y - v))

    return RiskMeasure(
        "optimism_trap",
        evaluate,
        dist,
        None,
        region_modulus_fn=lambda x, y: IDENTITY,
        params={"v": v, "x0": x0, "y0": y0},
        y_max=y_max,
    )


CATALOG = (
    "standard",
    "variance",
    "mean_variance_linear",
    "mean_variance_sqrt",
    "threshold_variance",
    "log_exponential",
    "non_holder_demo",
    "optimism_trap",
)


def _param(params, key, default=None):
    if key in params:
        try:
            return float(params[key])
        except (TypeError, ValueError):
            raise ConfigError(f"parameter {key!r} must be a number") from None
    if default is None:
        raise ConfigError(f"missing parameter {key!r}")
    return default


def catalog(name: str, params: dict | None = None, **kwargs) -> RiskMeasure:
    """Look up a named risk measure.

    ``lam`` parametrises the mean-variance and log-exponential measures,
    ``v`` the threshold of ``threshold_variance`` and ``optimism_trap``.
    ``diagnostic=True`` allows thresholds in ``(0, 1)`` on the widened
    domain ``[0, 1] x [0, 1]``.
    """
    params = dict(params or {}, **kwargs)
    diagnostic = bool(params.pop("diagnostic", False))
    y_max = 1.0 if diagnostic else VARIANCE_MAX
    lam_names = {"mean_variance_linear", "mean_variance_sqrt", "log_exponential"}
    if name in lam_names:
        lam = _param(params, "lam")
        if lam < 0:
            raise ConfigError("lam must be nonnegative")
        measure = {
            "mean_variance_linear": _mean_variance_linear,
            "mean_variance_sqrt": _mean_variance_sqrt,
            "log_exponential": _log_exponential,
        }[name](lam)
    elif name == "standard":
        measure = _standard()
    elif name == "variance":
        measure = _variance()
    elif name == "non_holder_demo":
        measure = _non_holder_demo()
    elif name in ("threshold_variance", "optimism_trap"):
        v = _param(params, "v")
        if not 0.0 < v < y_max:
            raise ConfigError(f"v must lie in (0, {y_max:g}), got {v:g}")
        if name == "threshold_variance":
            measure = _threshold_variance(v, y_max)
        else:
            x0 = _param(params, "x0", 0.5)
            y0 = _param(params, "y0", 0.1)
            if not y0 < v:
                raise ConfigError("the trap point must lie below the variance threshold")
            measure = _optimism_trap(v, x0, y0, y_max)
    else:
        raise ConfigError(f"unknown risk measure {name!r}")
    if diagnostic:
        measure.params["diagnostic"] = True
    return measure
