"""
Joint exceedance of a Gaussian pair
===================================

The level-set predictors rank candidate weights by how often the field and
its prediction exceed the same level together. For a bivariate normal pair
with correlation ``rho`` this is a one-dimensional integral over an angle.
"""

import numpy as np

from levelset_extrapolation import GaussianMarginal, joint_exceedance, normal_sf, target_functional

# %%
# At the mean the answer is known in closed form: 1/4 + asin(rho) / (2 pi).

for rho in (-1.0, -0.5, 0.0, 0.5, 1.0):
    closed = 0.25 + np.arcsin(rho) / (2 * np.pi)
    print(f"rho={rho:+.1f}  quadrature={joint_exceedance(0.0, rho):.15f}  closed={closed:.15f}")

# %%
# Away from the mean, compare with a Monte-Carlo estimate.

rng = np.random.default_rng(0)
u, rho, n = 0.7, 0.6, 2_000_000
x = rng.standard_normal(n)
y = rho * x + np.sqrt(1 - rho ** 2) * rng.standard_normal(n)
mc = np.mean((x > u) & (y > u))
print(f"\nP(X>{u}, Y>{u}) at rho={rho}: {joint_exceedance(u, rho):.6f} (Monte Carlo {mc:.6f})")

# %%
# The value always sits between the Frechet bounds and grows with ``rho``.
# Summed over several levels it is the quantity the predictors maximise.

m = GaussianMarginal(1.0, 1.0)
levels = [-1.0, 0.0, 1.0, 2.0, 3.0]
for rho in np.linspace(-1, 1, 5):
    print(f"rho={rho:+.2f}  target={target_functional(levels, rho, m):.6f}")
print("upper bound (rho=1):", sum(normal_sf(u, m) for u in levels))
