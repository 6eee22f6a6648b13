"""
Mean-square consistency
=======================

As the observation mesh ``h`` shrinks, the mean-square error at a fixed
point falls at least as fast as ``2 K (h / 2)^alpha``, where ``K`` and
``alpha`` are the Hoelder constants of the covariance at the origin.
"""

from levelset_extrapolation import CovarianceModel, GaussianMarginal, Window, consistency_experiment

meshes = (10.0, 5.0, 2.5, 1.25, 0.625)
for kind in ("exponential", "gaussian"):
    model = CovarianceModel(kind)
    print(f"\n{kind} (K={model.holder_K}, alpha={model.holder_alpha})")
    print("     h   n   analytical   empirical   bound")
    for p in consistency_experiment(model, GaussianMarginal(), Window.interval(0, 100), [33.3], meshes,
                                    replications=400):
        print(f"{p.mesh:6.3f} {p.n_obs:3d}   {p.analytical_mse:.3e}   {p.empirical_mse:.3e}   {p.grid_bound:.3e}")
