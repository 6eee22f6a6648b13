"""SPD solves against a factorised covariance system and the b0, b1, b2 forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .covariance import CovarianceSystem

__all__ = ["BQuantities", "solve_spd", "b_quantities", "accurate_bilinear", "COLLINEAR_TOL"]

COLLINEAR_TOL = 1e-10

_SPLITTER = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    """p + e == a * b exactly (Dekker), elementwise."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def accurate_bilinear(matrix, x, y=None) -> float:
    """x' A y with error-free products and an exactly rounded sum.

    Plain evaluation loses about eps * sum|x_i A_ij y_j|, which dominates when
    the weights are large and cancel (ill-conditioned Sigma).
    """
    x = np.asarray(x, dtype=float)
    y = x if y is None else np.asarray(y, dtype=float)
    p1, e1 = _two_prod(np.asarray(matrix, dtype=float), y[None, :])
    p2, e2 = _two_prod(p1, x[:, None])
    return math.fsum(np.concatenate([p2.ravel(), e2.ravel(), (e1 * x[:, None]).ravel()]).tolist())


def solve_spd(system: CovarianceSystem, rhs) -> np.ndarray:
    """x with (Sigma + ridge I) x = rhs, by forward/back substitution."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != system.n:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, system has {system.n}")
    return cho_solve((system.chol, True), rhs, check_finite=True)


@dataclass(frozen=True, eq=False)
class BQuantities:
    """Quadratic forms in the Sigma^{-1} inner product.

    b0 = c' S^-1 c, b1 = e' S^-1 c, b2 = e' S^-1 e.
    """

    b0: float
    b1: float
    b2: float
    sigma_inv_ct: np.ndarray
    sigma_inv_e: np.ndarray

    @property
    def gram_det(self) -> float:
        """b0*b2 - b1^2, nonnegative by Cauchy-Schwarz."""
        return self.b0 * self.b2 - self.b1 * self.b1

    def is_collinear(self, tol: float = COLLINEAR_TOL) -> bool:
        """True when c_t is (numerically) parallel to e."""
        return self.gram_det <= tol * max(self.b0 * self.b2, 1.0)


def b_quantities(system: CovarianceSystem, ct, sigma_inv_e=None) -> BQuantities:
    ct = np.asarray(ct, dtype=float).reshape(-1)
    if sigma_inv_e is None:
        sigma_inv_e = solve_spd(system, np.ones(system.n))
    sic = solve_spd(system, ct)
    b0 = float(ct @ sic)
    b1 = float(sigma_inv_e @ ct)
    b2 = float(sigma_inv_e.sum())
    return BQuantities(b0=max(b0, 0.0), b1=b1, b2=b2, sigma_inv_ct=sic, sigma_inv_e=sigma_inv_e)
