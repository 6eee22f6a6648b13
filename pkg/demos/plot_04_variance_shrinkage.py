"""
Variance of predicted paths
===========================

Treating each predicted trajectory as a sample, its empirical variance shows
how much of the field's variability a predictor keeps. Ordinary kriging
shrinks far from the data; the unknown-mean level-set predictor does not.
"""

from levelset_extrapolation import TRUE_FIELD, desk_scale_bessel_config, run_study

config = desk_scale_bessel_config(replications=100)
report = run_study(config, threads=4)

for label, s in report.variance_summaries.items():
    tag = "(simulated field)" if label == TRUE_FIELD else ""
    print(f"{label:22s} median={s['median']:.3f}  q1={s['q1']:.3f}  q3={s['q3']:.3f} {tag}")
