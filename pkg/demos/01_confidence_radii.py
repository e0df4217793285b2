"""
Running moments and confidence radii
====================================

Every policy in the package keeps three numbers per arm: the pull count,
the sum and the sum of squares. Mean and variance come from those, and the
confidence radii shrink like ``1/sqrt(t)``.
"""

import math

import numpy as np

from riskbandit.environment import ScaledBeta, stream
from riskbandit.estimators import RunningStats, mean_radius, variance_radius

# A few samples by hand. The variance is the plug-in (divide by t) one.
s = RunningStats().extend([0.2, 0.4, 0.6])
print("mean", s.mean, "variance", s.variance)

# Radii for a fixed confidence level.
delta = 0.01
for t in (1, 10, 100, 1000):
    print(f"t={t:5d}  mean radius {mean_radius(t, delta):.4f}  variance radius {variance_radius(t, delta):.4f}")

# %%
# How often does the estimate leave its interval? For each t draw 10**4
# independent runs of a Beta arm and count the misses. The mean bound allows
# 2*delta, the variance bound 4*delta (two Hoeffding events).
arm = ScaledBeta(2.0, 5.0)
x = arm.sample(stream(0, 0, 0), (10 ** 4, 1000))
for t in (10, 100, 1000):
    mu = x[:, :t].mean(axis=1)
    var = np.maximum((x[:, :t] ** 2).mean(axis=1) - mu ** 2, 0)
    miss_mean = np.mean(np.abs(mu - arm.mean) > mean_radius(t, delta))
    miss_var = np.mean(np.abs(var - arm.variance) > variance_radius(t, delta))
    print(f"t={t:4d}  mean misses {miss_mean:.4f}  variance misses {miss_var:.4f}")

# Hoeffding is loose for low-variance arms; both columns sit far below the
# nominal levels.
print("nominal", 2 * delta, 4 * delta, "| ln(1/delta) =", round(math.log(1 / delta), 3))
