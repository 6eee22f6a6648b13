"""Linear predictors ``X_hat(t) = sum_j lambda_j X(t_j)``.

Two level-set predictors maximise ``<lambda, c_t>`` (equivalently the
correlation between X(t) and its predictor) on the ellipsoid
``lambda' Sigma lambda = sigma^2``; the unknown-mean variant also imposes
``sum(lambda) = 1``. Simple and ordinary kriging are provided as baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .covariance import CovarianceSystem, ObservationSet
from .linalg import BQuantities, accurate_bilinear, b_quantities, solve_spd

__all__ = [
    "LEVELSET_UNKNOWN_MEAN",
    "LEVELSET_KNOWN_MEAN",
    "SIMPLE_KRIGING",
    "ORDINARY_KRIGING",
    "METHODS",
    "PredictorWeights",
    "levelset_unknown_mean",
    "levelset_branches",
    "levelset_known_mean",
    "simple_kriging",
    "ordinary_kriging",
    "compute_weights",
    "predict",
    "mse",
    "sample_feasible",
    "brute_force_objective",
]

LEVELSET_UNKNOWN_MEAN = "levelset_unknown_mean"
LEVELSET_KNOWN_MEAN = "levelset_known_mean"
SIMPLE_KRIGING = "simple_kriging"
ORDINARY_KRIGING = "ordinary_kriging"
METHODS = (LEVELSET_UNKNOWN_MEAN, LEVELSET_KNOWN_MEAN, SIMPLE_KRIGING, ORDINARY_KRIGING)

_NEG_GUARD = 1e-10


@dataclass(frozen=True, eq=False)
class PredictorWeights:
    weights: np.ndarray
    method: str
    objective: float
    degenerate: bool = False
    reason: Optional[str] = None

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def _clamp_nonneg(x: float) -> float:
    if x < 0.0:
        if x < -_NEG_GUARD:
            raise FloatingPointError(f"negative discriminant {x:.3e}")
        return 0.0
    return x


def _nearest_index(system: CovarianceSystem, ct: np.ndarray, t) -> int:
    # argmin/argmax return the lowest index among ties
    if t is not None and system.locations is not None:
        t = np.atleast_1d(np.asarray(t, dtype=float)).reshape(1, -1)
        d = np.linalg.norm(system.locations - t, axis=1)
        return int(np.argmin(d))
    return int(np.argmax(ct))


def _tie_break(system, ct, t, method, reason) -> PredictorWeights:
    j = _nearest_index(system, ct, t)
    lam = np.zeros(system.n)
    lam[j] = 1.0
    return PredictorWeights(lam, method, float(ct[j]), True, reason)


def _prepare(system: CovarianceSystem, ct, sigma2):
    ct = np.asarray(ct, dtype=float).reshape(-1)
    if ct.shape[0] != system.n:
        raise ValueError(f"c_t has length {ct.shape[0]}, system has {system.n}")
    if not np.all(np.isfinite(ct)):
        raise ValueError("c_t must be finite")
    if sigma2 is None:
        sigma2 = system.sigma2
    return ct, float(sigma2)


def _unknown_mean_parts(system, ct, sigma2):
    """Scaled direction and offset of the two stationary points, or None if degenerate.

    Both level-set weight vectors are scale invariant in c_t, so the forms are
    evaluated for c_t / max|c_t| to keep tiny covariances out of underflow.
    """
    scale = float(np.max(np.abs(ct)))
    if scale == 0.0:
        return None, "c_t is zero"
    bq = b_quantities(system, ct / scale)
    if bq.is_collinear():
        return None, "c_t parallel to e"
    s = _clamp_nonneg(sigma2 * bq.b2 - 1.0)
    det = _clamp_nonneg(bq.gram_det)
    direction = math.sqrt(s / det) * (bq.sigma_inv_ct - (bq.b1 / bq.b2) * bq.sigma_inv_e)
    offset = bq.sigma_inv_e / bq.b2
    return (direction, offset), None


def _on_ellipsoid_with_offset(system, offset, direction, sigma2):
    """offset + a * direction with sum(offset) = 1, sum(direction) = 0 and a fixed
    so that the result lies on lambda' Sigma lambda = sigma2 (root nearest 1).

    Solving this scalar quadratic against Sigma itself removes the Cholesky
    backward error, which is amplified by |lambda|^2 on ill-conditioned systems.
    """
    offset = offset / offset.sum()
    direction = direction - direction.sum() / direction.size
    sig = system.sigma_matrix
    a = accurate_bilinear(sig, direction)
    b = accurate_bilinear(sig, offset, direction)
    c = accurate_bilinear(sig, offset) - sigma2
    disc = b * b - a * c
    if a <= 0.0 or disc < 0.0:
        return _sum_to_one(offset + direction)
    root = math.sqrt(disc)
    # the two roots, each in cancellation-free form
    q = -(b + math.copysign(root, b)) if b != 0.0 else -root
    cands = [q / a, c / q] if q != 0.0 else [root / a, -root / a]
    alpha = min(cands, key=lambda r: abs(r - 1.0))
    return _sum_to_one(offset + alpha * direction)


def _sum_to_one(lam):
    """Absorb 1 - sum(lam) into the smallest weight.

    With weights of size |lam| the rounded vector misses the simplex by about
    eps * sum|lam|; moving the smallest entry keeps lambda' Sigma lambda intact
    to first order in that residual.
    """
    r = 1.0 - math.fsum(lam.tolist())
    if r != 0.0:
        lam = lam.copy()
        k = int(np.argmin(np.abs(lam)))
        lam[k] += r
    return lam


def _on_ellipsoid(system, lam, sigma2):
    q = accurate_bilinear(system.sigma_matrix, lam)
    return lam * math.sqrt(sigma2 / q) if q > 0.0 else lam


def levelset_unknown_mean(system: CovarianceSystem, ct, sigma2: Optional[float] = None,
                          t=None) -> PredictorWeights:
    """Maximiser of <lambda, c_t> subject to lambda' Sigma lambda = sigma2 and sum(lambda) = 1.

    When the problem has no unique solution (one observation, or c_t parallel
    to the all-ones vector) every feasible point has the same objective; the
    unit vector of the observation nearest to ``t`` is returned and the result
    is flagged ``degenerate``. Without ``t`` the largest covariance is used.
    """
    ct, sigma2 = _prepare(system, ct, sigma2)
    if system.n == 1:
        return PredictorWeights(np.ones(1), LEVELSET_UNKNOWN_MEAN, float(ct[0]), True, "single observation")
    parts, reason = _unknown_mean_parts(system, ct, sigma2)
    if parts is None:
        return _tie_break(system, ct, t, LEVELSET_UNKNOWN_MEAN, reason)
    lam = _on_ellipsoid_with_offset(system, parts[1], parts[0], sigma2)
    return PredictorWeights(lam, LEVELSET_UNKNOWN_MEAN, float(ct @ lam))


def levelset_branches(system: CovarianceSystem, ct, sigma2: Optional[float] = None):
    """Both stationary points (delta_1 and delta_2 roots) of the unknown-mean problem."""
    ct, sigma2 = _prepare(system, ct, sigma2)
    parts, reason = _unknown_mean_parts(system, ct, sigma2)
    if parts is None:
        raise ValueError(f"no isolated stationary points: {reason}")
    direction, offset = parts
    return (_on_ellipsoid_with_offset(system, offset, direction, sigma2),
            _on_ellipsoid_with_offset(system, offset, -direction, sigma2))


def levelset_known_mean(system: CovarianceSystem, ct, sigma2: Optional[float] = None,
                        t=None) -> PredictorWeights:
    """sigma * Sigma^-1 c_t / sqrt(c_t' Sigma^-1 c_t); tie-break when c_t = 0."""
    ct, sigma2 = _prepare(system, ct, sigma2)
    scale = float(np.max(np.abs(ct)))
    if scale == 0.0:
        return _tie_break(system, ct, t, LEVELSET_KNOWN_MEAN, "c_t is zero")
    c = ct / scale
    sic = solve_spd(system, c)
    b0 = float(c @ sic)
    if b0 <= 0.0:
        return _tie_break(system, ct, t, LEVELSET_KNOWN_MEAN, "c_t is zero")
    lam = _on_ellipsoid(system, math.sqrt(sigma2 / b0) * sic, sigma2)
    return PredictorWeights(lam, LEVELSET_KNOWN_MEAN, float(ct @ lam))


def simple_kriging(system: CovarianceSystem, ct) -> PredictorWeights:
    ct, _ = _prepare(system, ct, None)
    lam = solve_spd(system, ct)
    return PredictorWeights(lam, SIMPLE_KRIGING, float(ct @ lam))


def ordinary_kriging(system: CovarianceSystem, ct) -> PredictorWeights:
    ct, _ = _prepare(system, ct, None)
    bq = b_quantities(system, ct)
    delta = (1.0 - bq.b1) / bq.b2
    lam = _sum_to_one(bq.sigma_inv_ct + delta * bq.sigma_inv_e)
    return PredictorWeights(lam, ORDINARY_KRIGING, float(ct @ lam))


def compute_weights(method: str, system: CovarianceSystem, ct, sigma2: Optional[float] = None,
                    t=None) -> PredictorWeights:
    if method == LEVELSET_UNKNOWN_MEAN:
        return levelset_unknown_mean(system, ct, sigma2, t)
    if method == LEVELSET_KNOWN_MEAN:
        return levelset_known_mean(system, ct, sigma2, t)
    if method == SIMPLE_KRIGING:
        return simple_kriging(system, ct)
    if method == ORDINARY_KRIGING:
        return ordinary_kriging(system, ct)
    raise ValueError(f"unknown method {method!r}")


def predict(weights: PredictorWeights, obs: ObservationSet, mean: float = 0.0) -> float:
    """Linear prediction; simple kriging predicts ``mean + <lambda, X - mean>``."""
    if weights.n != obs.n:
        raise ValueError(f"{weights.n} weights for {obs.n} observations")
    if weights.method == SIMPLE_KRIGING:
        return float(mean + weights.weights @ (obs.values - mean))
    return float(weights.weights @ obs.values)


def mse(method: str, bq: BQuantities, sigma2: float) -> float:
    """Closed-form E[(X_hat(t) - X(t))^2] of each predictor."""
    if method == LEVELSET_UNKNOWN_MEAN:
        s = max(sigma2 * bq.b2 - 1.0, 0.0)
        det = max(bq.gram_det, 0.0)
        val = 2.0 * (sigma2 - bq.b1 / bq.b2 - math.sqrt(det * s) / bq.b2)
    elif method == LEVELSET_KNOWN_MEAN:
        sigma = math.sqrt(sigma2)
        val = 2.0 * sigma * (sigma - math.sqrt(bq.b0))
    elif method == SIMPLE_KRIGING:
        val = sigma2 - bq.b0
    elif method == ORDINARY_KRIGING:
        val = sigma2 - bq.b0 + (1.0 - bq.b1) ** 2 / bq.b2
    else:
        raise ValueError(f"unknown method {method!r}")
    return max(val, 0.0)


def _sigma_with_ridge(system: CovarianceSystem) -> np.ndarray:
    return system.sigma_matrix + system.ridge_applied * np.eye(system.n)


def sample_feasible(system: CovarianceSystem, sigma2: float, simplex: bool, size: int,
                    rng: np.random.Generator) -> np.ndarray:
    """``size`` random points of the feasible set, one per row.

    Ellipsoid: sigma * L^{-T} z / |z| for uniform directions z. With the
    sum-to-one constraint the feasible set is an (n-1)-dimensional ellipsoid
    centred at Sigma^-1 e / b2 inside the hyperplane, sampled the same way
    through an orthonormal basis of the hyperplane directions.
    """
    sig = _sigma_with_ridge(system)
    n = system.n
    if not simplex:
        z = rng.standard_normal((size, n))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        chol = np.linalg.cholesky(sig)
        return math.sqrt(sigma2) * np.linalg.solve(chol.T, z.T).T
    if n == 1:
        return np.ones((size, 1))
    w = np.linalg.solve(sig, np.ones(n))
    center = w / w.sum()
    radius2 = sigma2 - 1.0 / w.sum()
    if radius2 < 0:
        raise ValueError("empty feasible set")
    # orthonormal basis of {y : sum(y) = 0}
    q, _ = np.linalg.qr(np.column_stack([np.ones(n), np.eye(n)[:, : n - 1]]))
    basis = q[:, 1:]
    m = np.linalg.cholesky(basis.T @ sig @ basis)
    z = rng.standard_normal((size, n - 1))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    y = math.sqrt(radius2) * np.linalg.solve(m.T, z.T).T
    return center + y @ basis.T


def brute_force_objective(system: CovarianceSystem, ct, sigma2: float, simplex: bool,
                          samples: int = 100_000, seed: int = 0) -> float:
    """Largest <lambda, c_t> over ``samples`` random feasible points (n <= 6)."""
    if system.n > 6:
        raise ValueError("brute-force oracle limited to n <= 6")
    if samples < 100_000:
        raise ValueError("brute-force oracle needs at least 1e5 samples")
    ct = np.asarray(ct, dtype=float).reshape(-1)
    pts = sample_feasible(system, sigma2, simplex, samples, np.random.default_rng(seed))
    return float(np.max(pts @ ct))
