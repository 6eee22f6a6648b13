"""
Four predictors on the same data
================================

Level-set predictors keep the marginal law of the field: their weights lie
on the ellipsoid ``lambda' Sigma lambda = sigma^2``. Kriging weights shrink
towards the mean instead. This script compares weights and mean-square
errors on a small one-dimensional design.
"""

import numpy as np

from levelset_extrapolation import (
    METHODS,
    CovarianceModel,
    ObservationSet,
    b_quantities,
    build_ct,
    build_sigma,
    compute_weights,
    mse,
)

model = CovarianceModel("exponential")
obs = ObservationSet([0.0, 1.0, 2.5, 4.0], [0.3, -0.4, 1.1, 0.2])
system = build_sigma(model, obs)

# %%
# Between observations all methods interpolate sensibly; beyond the last one
# kriging decays to the mean while the level-set weights keep unit variance.

for t in (1.7, 6.0):
    ct = build_ct(model, obs, t)
    bq = b_quantities(system, ct)
    print(f"\nt = {t}")
    for m in METHODS:
        w = compute_weights(m, system, ct, t=[t])
        var = w.weights @ system.sigma_matrix @ w.weights
        print(f"  {m:22s} weights={np.round(w.weights, 4)}  var={var:.4f}  mse={mse(m, bq, 1.0):.4f}")

# %%
# At an observation every method returns the observed value.

ct = build_ct(model, obs, 2.5)
print("\nat t=2.5:", {m: np.round(compute_weights(m, system, ct, t=[2.5]).weights, 12).tolist() for m in METHODS})
