"""Closed-form high-probability regret bounds.

Each calculator returns a :class:`BoundReport` whose ``total`` is the sum of
the per-arm terms plus the additive ``sum(gaps)`` term. ``valid`` is false
whenever the regime's horizon or confidence precondition fails; the numbers
are still reported.

``delta`` is either a number or the string ``"n_squared"`` (``delta = 1/n**2``,
which switches to the ``ln n`` form of each bound).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .risk_measures import IDENTITY, NON_HOELDER, DomainError, Modulus, modulus_inverse

N_SQUARED = "n_squared"


@dataclass
class BoundReport:
    regime: str
    per_arm_terms: list
    total: float
    valid: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_arm_terms"] = [_finite_or_none(v) for v in self.per_arm_terms]
        d["total"] = _finite_or_none(self.total)
        return d


def _finite_or_none(v):
    return float(v) if math.isfinite(v) else None


def _log_factor(delta, n):
    """Return ``(multiplier, log_term, is_logn)`` shared by the single- and two-phase bounds."""
    if delta == N_SQUARED:
        return 2.0, math.log(n), True
    return 1.0, math.log(1.0 / float(delta)), False


def _delta_ok(delta, n_arms, n):
    if delta == N_SQUARED:
        return n > 4 * n_arms
    return 0.0 < float(delta) < 1.0 / (4.0 * n_arms * n)


def _finish(regime, gaps, terms, valid, notes):
    extra = math.fsum(g for g in gaps if g > 0)
    total = math.fsum(terms) + extra if all(math.isfinite(t) for t in terms) else math.inf
    return BoundReport(regime, list(terms), total, bool(valid), notes)


def _inverse_half_gap(phi, gap):
    try:
        z = float(modulus_inverse(phi, gap / 2.0))
    except DomainError:
        return None
    return z if z > 0 else None


def theorem1_bound(gaps, phi: Modulus, delta, n) -> BoundReport:
    """Single-modulus LCB bound: ``sum 18 gap ln(1/delta) / phi^-1(gap/2)**2 + sum gap``."""
    mult, log_term, logn = _log_factor(delta, n)
    notes = []
    valid = _delta_ok(delta, len(gaps), n)
    if not valid:
        notes.append("n > 4K required" if logn else "delta outside (0, 1/(4Kn))")
    terms = []
    for i, g in enumerate(gaps):
        if g <= 0:
            terms.append(0.0)
            continue
        z = _inverse_half_gap(phi, g)
        if z is None:
            terms.append(math.inf)
            valid = False
            notes.append(f"arm {i}: gap/2 outside the modulus range")
            continue
        terms.append(mult * 18.0 * g * log_term / (z * z))
    return _finish("theorem1_logn" if logn else "theorem1_delta", gaps, terms, valid, notes)


def pull_count_bound(gap: float, phi: Modulus, delta: float) -> float:
    """Maximum pulls of a suboptimal arm on the good event: ``18 ln(1/delta)/phi^-1(gap/2)**2 + 1``."""
    z = _inverse_half_gap(phi, gap)
    if z is None:
        return math.inf
    return 18.0 * math.log(1.0 / delta) / (z * z) + 1.0


def lipschitz_bound(gaps, L: float, n) -> BoundReport:
    terms = [144.0 * L * L / g * math.log(n) if g > 0 else 0.0 for g in gaps]
    return _finish("lipschitz", gaps, terms, n > 4 * len(gaps), [])


def hoelder_bound(gaps, L: float, alpha: float, n) -> BoundReport:
    terms = [
        36.0 * (2.0 * L) ** (2.0 / alpha) / g ** ((2.0 - alpha) / alpha) * math.log(n) if g > 0 else 0.0
        for g in gaps
    ]
    return _finish("hoelder", gaps, terms, n > 4 * len(gaps), [])


NON_HOELDER_MAX_GAP = float(NON_HOELDER.forward(1.0))


def non_hoelder_bound(gaps, n) -> BoundReport:
    """Bound for ``f(x, y) = h(x)``: ``sum 9 gap exp(4/gap) ln n + sum gap``."""
    notes = []
    valid = n > 4 * len(gaps)
    terms = []
    for i, g in enumerate(gaps):
        if g <= 0:
            terms.append(0.0)
            continue
        if g > NON_HOELDER_MAX_GAP:
            valid = False
            notes.append(f"arm {i}: gap {g:g} exceeds the range of h on [0, 1]")
        terms.append(9.0 * g * math.exp(4.0 / g) * math.log(n))
    return _finish("non_hoelder", gaps, terms, valid, notes)


def theorem2_bound(gaps, e, phi_list, delta, n) -> BoundReport:
    """Two-phase bound: ``sum gap (162/e**2 + 18/phi_i^-1(gap/2)**2) ln(1/delta) + sum gap``."""
    mult, log_term, logn = _log_factor(delta, n)
    notes = []
    valid = _delta_ok(delta, len(gaps), n)
    if not valid:
        notes.append("n > 4K required" if logn else "delta outside (0, 1/(4Kn))")
    if any(not ei > 0 for ei in e):
        valid = False
        notes.append("some arm sits on a discontinuity (e_i = 0)")
    inv_sq = [1.0 / (ei * ei) if ei > 0 else math.inf for ei in e]
    warmup = math.fsum(mult * 162.0 * s * log_term for s in inv_sq)
    if not n >= warmup:
        valid = False
        notes.append(f"horizon {n:g} below the certification requirement {warmup:g}")
    terms = []
    for i, (g, s, phi) in enumerate(zip(gaps, inv_sq, phi_list)):
        if g <= 0:
            terms.append(0.0)
            continue
        z = _inverse_half_gap(phi, g)
        if z is None or not math.isfinite(s):
            terms.append(math.inf)
            valid = False
            continue
        terms.append(mult * g * (162.0 * s + 18.0 / (z * z)) * log_term)
    return _finish("theorem2_logn" if logn else "theorem2_delta", gaps, terms, valid, notes)


def threshold_corollary_bound(gaps, e, n) -> BoundReport:
    """Threshold-variance form ``sum 4 (81 gap/e**2 + 36/gap) ln n + sum gap``."""
    rep = theorem2_bound(gaps, e, [IDENTITY] * len(gaps), N_SQUARED, n)
    terms = []
    for g, ei in zip(gaps, e):
        if g <= 0:
            terms.append(0.0)
        elif ei > 0:
            terms.append(4.0 * (81.0 * g / (ei * ei) + 36.0 / g) * math.log(n))
        else:
            terms.append(math.inf)
    return _finish("threshold_corollary", gaps, terms, rep.valid, rep.notes)


def phase1_cap(e_i: float, delta: float) -> float:
    """Largest phase-one length on the good event: ``162 ln(1/delta) / e_i**2``."""
    return 162.0 * math.log(1.0 / delta) / (e_i * e_i)


def specialised_bound(gaps, phi: Modulus, n) -> BoundReport | None:
    """Closed-form ``ln n`` bound matching the modulus family, if there is one."""
    if phi.kind == "lipschitz":
        return lipschitz_bound(gaps, phi.constant, n)
    if phi.kind == "hoelder":
        return hoelder_bound(gaps, phi.constant, phi.alpha, n)
    if phi.kind == "non_hoelder":
        return non_hoelder_bound(gaps, n)
    return None
