"""
The optimism trap
=================

A risk equal to 1 at a single point (the trap) and 0 on the low-variance
side around it. An arm sitting exactly on the trap always *looks* like risk
0, because its estimates never land on the point. A single-modulus LCB
keeps pulling it; the two-phase policy notices that the arm never leaves
the neighbourhood of a discontinuity and flags it.
"""

import warnings

import numpy as np

from riskbandit.environment import BanditInstance, Bernoulli, ScaledBeta
from riskbandit.harness import simulate
from riskbandit.policies import PhiLCB, PhiLCB2, default_budget
from riskbandit.risk_measures import IDENTITY, catalog

trap = catalog("optimism_trap", v=0.15)
# Beta(3/4, 3/4) has mean 1/2 and variance 1/10, i.e. it sits on the trap
inst = BanditInstance([ScaledBeta(0.75, 0.75), Bernoulli(0.5)], trap)
print("f", inst.f, "best arm", inst.best_arm, "e", inst.e)

n = 10 ** 5
naive = simulate(inst, PhiLCB(trap, 1 / n ** 2, phi=IDENTITY), n, range(50), checkpoints=[100, n])
share = (naive.regret[:, 1] - naive.regret[:, 0]) / inst.gaps[0] / (n - 100)
print(f"naive LCB: trap arm share after t=100 {share.mean():.3f}, regret / n {naive.regret[:, 1].mean() / n:.3f}")

# %%
# phi-LCB2 with the default per-arm phase-one budget of n / K pulls.
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    two = simulate(inst, PhiLCB2(trap, 1 / n ** 2, default_budget(n, 2)), n, range(10), checkpoints=[n])
print("phase-one lengths of the trap arm:", np.unique(two.phase1_lengths[:, 0]))
print("guarantee voided in every run:", bool(two.guarantee_voided.all()))
print("warning:", caught[0].message if caught else None)
