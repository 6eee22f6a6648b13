"""Extrapolation of stationary Gaussian random fields by matching excursion sets.

Linear predictors that keep the field's marginal law and maximise the
overlap of excursion sets, next to simple and ordinary kriging, with
simulation and scoring utilities for comparing them.
"""

__version__ = "0.1.0"

from .covariance import (
    CovarianceModel,
    CovarianceSystem,
    ObservationSet,
    SingularCovarianceError,
    Window,
    build_ct,
    build_sigma,
    evaluate,
)
from .excursion import (
    ExcursionErrorReport,
    ExcursionLevels,
    error_report,
    excursion_indicator,
    expected_error_decomposition,
    symmetric_difference_volume,
)
from .linalg import BQuantities, accurate_bilinear, b_quantities, solve_spd
from .predictors import (
    METHODS,
    PredictorWeights,
    brute_force_objective,
    compute_weights,
    levelset_known_mean,
    levelset_unknown_mean,
    mse,
    ordinary_kriging,
    predict,
    simple_kriging,
)
from .simulate import FieldPath, GridSpec, replication_seed, restrict_to_observations, simulate_path
from .special import GaussianMarginal, bessel_j0, joint_exceedance, normal_cdf, normal_sf, target_functional
from .study import (
    TRUE_FIELD,
    StudyConfig,
    StudyReport,
    consistency_experiment,
    desk_scale_bessel_config,
    desk_scale_gaussian_config,
    run_study,
    summarize,
)
