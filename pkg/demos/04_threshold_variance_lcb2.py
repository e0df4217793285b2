"""
Two-phase learning on a discontinuous risk
==========================================

Threshold variance: an arm's risk is its mean, unless its variance exceeds
v, in which case it is 1. phi-LCB2 first estimates each arm until it is
sure which side of the threshold it lies on, then runs the LCB rule.
"""

import numpy as np

from riskbandit.bounds import N_SQUARED, phase1_cap, theorem2_bound, threshold_corollary_bound
from riskbandit.environment import BanditInstance, TwoPoint
from riskbandit.harness import simulate
from riskbandit.policies import PhiLCB2, default_budget
from riskbandit.risk_measures import catalog, restricted_modulus

tv = catalog("threshold_variance", v=0.5, diagnostic=True)
inst = BanditInstance([TwoPoint.from_moments(0.5, 0.1), TwoPoint(0.0, 1.0, 0.4)], tv)
print("f", inst.f, "gaps", np.round(inst.gaps, 3), "distance to threshold e", np.round(inst.e, 3))

n, reps = 10 ** 5, 100
delta = 1 / n ** 2
res = simulate(inst, PhiLCB2(tv, delta, default_budget(n, inst.n_arms)), n, range(reps), checkpoints=[1000, 10 ** 4, n])

# %%
# Phase one ends when 6 sqrt(ln(1/delta) / 2t) drops below half the estimated
# distance; on the good event it lasts at most 162 ln(1/delta) / e**2 pulls.
caps = [phase1_cap(e, delta) for e in inst.e]
for i, cap in enumerate(caps):
    lengths = res.phase1_lengths[:, i]
    print(f"arm {i}: phase one median {np.median(lengths):.0f}, max {lengths.max()}, cap {cap:.0f}")

# %%
# Regret against the two-phase bound and the threshold-variance corollary.
phis = [restricted_modulus(tv, (a.mean, a.variance), e / 2) for a, e in zip(inst.arms, inst.e)]
b2 = theorem2_bound(inst.gaps, inst.e, phis, N_SQUARED, n)
bc = threshold_corollary_bound(inst.gaps, inst.e, n)
final = res.regret[:, -1]
print(f"mean regret {final.mean():.0f}, max {final.max():.0f}")
print(f"two-phase bound {b2.total:.0f} (valid={b2.valid}), corollary {bc.total:.0f}")
