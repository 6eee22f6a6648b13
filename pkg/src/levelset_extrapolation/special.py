"""Scalar special functions: Gaussian c.d.f., Bessel J0 and the equal-level
bivariate Gaussian orthant probability.

The orthant probability uses the one-dimensional representation

    P(X > u, Y > u) = S(u)**2 + 1/(2 pi) * int_0^{asin rho} exp(-a (1 - sin t) / cos(t)**2) dt

with ``a = (u - mu)**2 / sigma**2`` and ``S`` the Gaussian survival function.
The factor ``(1 - sin t) / cos(t)**2`` is rewritten as ``1 / (1 + sin t)`` so
that the integrand stays finite at ``t = pi/2``. For negative correlations
the same integral is taken from ``-pi/2``, where the probability equals
``max(0, 2 S(u) - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import integrate, special

__all__ = [
    "GaussianMarginal",
    "normal_cdf",
    "normal_sf",
    "bessel_j0",
    "joint_exceedance",
    "target_functional",
]

RHO_CLAMP_TOL = 1e-9
QUAD_EPSABS = 1e-12

# |x| below this uses the power series, above it the Hankel expansion
_J0_SERIES_LIMIT = 12.0


@dataclass(frozen=True)
class GaussianMarginal:
    """Univariate N(mu, sigma**2) law shared by the field and its predictor."""

    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError("marginal parameters must be finite")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def variance(self) -> float:
        return self.sigma * self.sigma

    def standardize(self, x):
        return (x - self.mu) / self.sigma


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise ValueError("argument must be finite")


def normal_cdf(x, marginal: GaussianMarginal = GaussianMarginal()):
    """Phi_{mu,sigma}(x). Accepts scalars or arrays."""
    _check_finite(x)
    z = marginal.standardize(np.asarray(x, dtype=float))
    out = 0.5 * special.erfc(-z / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def normal_sf(x, marginal: GaussianMarginal = GaussianMarginal()):
    """Upper tail 1 - Phi_{mu,sigma}(x), evaluated without cancellation."""
    _check_finite(x)
    z = marginal.standardize(np.asarray(x, dtype=float))
    out = 0.5 * special.erfc(z / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def _j0_series(x):
    # sum_s (-1)^s (x/2)^(2s) / (s!)^2, summed until terms drop below 1e-17
    q = -(x * x) / 4.0
    term = np.ones_like(x)
    total = np.ones_like(x)
    s = 0
    while True:
        s += 1
        term = term * q / (s * s)
        total = total + term
        if np.all(np.abs(term) < 1e-17):
            return total


def _j0_asymptotic(x):
    # Hankel expansion J0 = sqrt(2/(pi x)) (P cos(x - pi/4) - Q sin(x - pi/4)),
    # each series cut at its smallest term.
    p = np.ones_like(x)
    qsum = np.zeros_like(x)
    coef = np.ones_like(x)  # a_k / x^k with a_k the Hankel coefficients for nu = 0
    last = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 80):
        coef = coef * (-((2 * k - 1) ** 2)) / (8.0 * k * x)
        mag = np.abs(coef)
        active &= (mag < last) & (last > 1e-17)
        if not active.any():
            break
        sign = (-1) ** (k // 2)
        if k % 2 == 0:
            p = np.where(active, p + sign * coef, p)
        else:
            qsum = np.where(active, qsum + sign * coef, qsum)
        last = np.where(active, mag, last)
    chi = x - math.pi / 4.0
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - qsum * np.sin(chi))


def bessel_j0(x):
    """Bessel function of the first kind of order zero.

    Power series for ``|x| <= 12``; Hankel asymptotic expansion beyond, where
    the alternating series would lose too many digits to cancellation.
    """
    _check_finite(x)
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(ax)
    small = ax <= _J0_SERIES_LIMIT
    if small.any():
        out[small] = _j0_series(ax[small])
    if (~small).any():
        out[~small] = _j0_asymptotic(ax[~small])
    return float(out) if out.ndim == 0 else out


def _clamp_rho(rho: float) -> float:
    if not math.isfinite(rho):
        raise ValueError("correlation must be finite")
    if abs(rho) > 1.0 + RHO_CLAMP_TOL:
        raise ValueError(f"correlation out of range: {rho!r}")
    return min(1.0, max(-1.0, rho))


def _orthant_sum(scaled_sq: np.ndarray, sf: np.ndarray, rho: float) -> float:
    """sum_j P(X > u_j, Y > u_j) from the squared standardised levels and survivals.

    For rho >= 0 the integral runs from 0 and is added to sum S^2. For rho < 0 it
    runs from -pi/2 and is added to the rho = -1 value max(0, 2S - 1); this keeps
    relative accuracy when the probability is tiny.
    """
    upper = math.asin(rho)
    if rho >= 0.0:
        lower, base = 0.0, float(np.sum(sf * sf))
        if upper == 0.0:
            return base
    else:
        lower, base = -math.pi / 2.0, float(np.sum(np.maximum(0.0, 2.0 * sf - 1.0)))
    zero = scaled_sq == 0.0
    # a_j = 0 terms integrate to the interval length in closed form
    closed = np.count_nonzero(zero) * (upper - lower)
    rest = scaled_sq[~zero]
    if rest.size == 0:
        return base + closed / (2.0 * math.pi)

    def integrand(theta):
        d = 1.0 + math.sin(theta)
        if d <= 0.0:
            return 0.0
        return float(np.exp(-rest / d).sum())

    if rho >= 0.0:
        val, _ = integrate.quad(integrand, lower, upper, epsabs=QUAD_EPSABS, epsrel=1e-12, limit=200)
    else:
        val, _ = integrate.quad(integrand, lower, upper, epsabs=0.0, epsrel=1e-11, limit=200)
    return base + (closed + val) / (2.0 * math.pi)


def joint_exceedance(u: float, rho: float, marginal: GaussianMarginal = GaussianMarginal()) -> float:
    """P(X > u, Y > u) for a N(mu, sigma^2) pair with correlation ``rho``."""
    _check_finite(u)
    rho = _clamp_rho(float(rho))
    a = np.array([marginal.standardize(float(u)) ** 2])
    sf = normal_sf(u, marginal)
    p = _orthant_sum(a, np.array([sf]), rho)
    # round-off can push the value marginally past the Frechet bounds
    return min(max(p, 0.0, 2.0 * sf - 1.0), sf)


def target_functional(levels: Iterable[float], rho: float,
                      marginal: GaussianMarginal = GaussianMarginal()) -> float:
    """Sum over levels of the joint exceedance probabilities, one quadrature."""
    u = np.asarray(list(levels), dtype=float)
    if u.size == 0:
        raise ValueError("at least one level is required")
    _check_finite(u)
    rho = _clamp_rho(float(rho))
    sf = normal_sf(u, marginal)
    return _orthant_sum(marginal.standardize(u) ** 2, sf, rho)
