from fractions import Fraction

import numpy as np
import pytest

from levelset_extrapolation.covariance import CovarianceModel, ObservationSet, build_sigma, factorize

PAPER_MODELS = ("exponential", "gaussian", "bessel_j0", "sinc")


def identity_system(n=2, sigma2=1.0):
    return factorize(sigma2 * np.eye(n), sigma2)


def exact_quadratic(matrix, lam) -> float:
    """lam' A lam evaluated exactly in rationals for the given binary floats."""
    x = [Fraction(float(v)) for v in lam]
    rows = [[Fraction(float(v)) for v in row] for row in np.asarray(matrix)]
    return float(sum(xi * sum(a * xj for a, xj in zip(row, x)) for xi, row in zip(x, rows)))


def exact_sum(lam) -> float:
    return float(sum(Fraction(float(v)) for v in lam))


def random_instance(rng, n, kind, spread=None):
    """Observation system for n random 1-d locations and a random target point."""
    model = CovarianceModel(kind)
    spread = spread or 3.0 * n
    while True:
        locs = np.sort(rng.uniform(0, spread, n))
        if n == 1 or np.min(np.diff(locs)) > 0.3:
            break
    obs = ObservationSet(locs, rng.standard_normal(n))
    system = build_sigma(model, obs)
    t = rng.uniform(-1, spread + 1)
    ct = model.of_distance(np.abs(locs - t))
    return model, obs, system, t, ct


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
