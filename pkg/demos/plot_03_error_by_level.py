"""
Excursion errors by level
=========================

Simulate a Gaussian-covariance process on ``[0, 100]``, observe it every 10
units and extrapolate onto a 0.5 grid. The symmetric-difference error
between true and predicted excursion sets is largest at the mean level.
"""

from levelset_extrapolation import desk_scale_gaussian_config, run_study

config = desk_scale_gaussian_config(replications=100)
report = run_study(config, threads=4)

# %%
# Median error per method and level (boxplot centres).

print("method".ljust(24) + "".join(f"u={u:+.0f}".rjust(9) for u in config.levels))
for m in config.methods:
    row = "".join(f"{report.median(m, u):9.2f}" for u in config.levels)
    print(m.ljust(24) + row)

# %%
# Quartiles for the level-set predictor at u = 0.

s = report.summaries[("levelset_unknown_mean", 0.0)]
print("\nlevelset_unknown_mean, u=0:", {k: round(v, 3) for k, v in s.items()})
