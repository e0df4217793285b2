"""
The risk-measure catalog
========================

A risk measure maps an arm's (mean, variance) to a number to be minimised.
Each catalog entry carries a modulus of continuity ``phi`` with
``|f(p) - f(q)| <= phi(|p - q|_1)``; discontinuous entries instead report
the distance to their discontinuity set and a modulus valid away from it.
"""

import numpy as np

from riskbandit.risk_measures import (
    catalog,
    construct_modulus,
    disc_distance,
    modulus_inverse,
    restricted_modulus,
)

for name, params in [
    ("standard", {}),
    ("variance", {}),
    ("mean_variance_linear", {"lam": 2.0}),
    ("mean_variance_sqrt", {"lam": 2.0}),
    ("log_exponential", {"lam": 1.0}),
    ("non_holder_demo", {}),
    ("threshold_variance", {"v": 0.1}),
]:
    m = catalog(name, params)
    phi = m.modulus.name if m.modulus else "none (discontinuous)"
    print(f"{name:22s} f(0.5, 0.05) = {float(m.evaluate(0.5, 0.05)):.4f}   phi: {phi}")

# %%
# The bounds use ``phi^-1(gap / 2)``: how close estimates must get before a
# gap can be resolved. The non-Hoelder modulus makes this tiny very fast.
for name in ("standard", "mean_variance_sqrt", "non_holder_demo"):
    m = catalog(name, lam=1.0) if name == "mean_variance_sqrt" else catalog(name)
    print(name, [f"{float(modulus_inverse(m.modulus, g / 2)):.3g}" for g in (0.5, 0.2, 0.1)])

# %%
# Threshold variance: the mean if the variance is below v, otherwise 1.
tv = catalog("threshold_variance", v=0.1)
print("distance to the threshold from (0.3, 0.04):", float(disc_distance(tv, 0.3, 0.04)))
print("modulus on the ball of radius 0.03:", restricted_modulus(tv, (0.3, 0.04), 0.03).name)

# %%
# A modulus for a function given only through a uniform-continuity oracle.
# For sqrt(x), |p - q|_1 < eps**2 keeps the values eps apart.
phi = construct_modulus(lambda eps: eps ** 2, resolution=10)
z = np.array([1e-3, 1e-2, 0.1, 0.5])
print("staircase modulus", phi.forward(z).round(4), "vs sqrt", np.sqrt(z).round(4))
