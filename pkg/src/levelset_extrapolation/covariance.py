"""Stationary isotropic covariance models and the observation covariance system."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .special import bessel_j0

__all__ = [
    "KINDS",
    "CovarianceModel",
    "Window",
    "ObservationSet",
    "CovarianceSystem",
    "SingularCovarianceError",
    "evaluate",
    "covariance_matrix",
    "factorize",
    "build_sigma",
    "build_ct",
]

log = logging.getLogger(__name__)

KINDS = ("exponential", "gaussian", "bessel_j0", "sinc", "user_table")

# Hoelder constants (K, alpha) of the unit-variance, unit-length profiles
_HOLDER = {
    "exponential": (1.0, 1.0),
    "gaussian": (1.0, 2.0),
    "bessel_j0": (0.25, 2.0),
    "sinc": (1.0 / 6.0, 2.0),
}

RIDGE_LADDER = (1e-12, 1e-10, 1e-8, 1e-6)


class SingularCovarianceError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Isotropic stationary covariance ``C(h) = sigma2 * c(|h| / length_scale)``.

    For ``kind="user_table"`` the ``table`` holds ``(lag, covariance)`` pairs
    starting at lag 0; ``sigma2`` is then read off the first row. Lags beyond
    the table are clamped to the last value.
    """

    kind: str
    sigma2: Optional[float] = None
    length_scale: float = 1.0
    holder_K: Optional[float] = None
    holder_alpha: Optional[float] = None
    table: Optional[Sequence[Sequence[float]]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown covariance kind {self.kind!r}")
        if not (math.isfinite(self.length_scale) and self.length_scale > 0):
            raise ValueError("length_scale must be positive")
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731

        if self.kind == "user_table":
            if self.table is None:
                raise ValueError("user_table model needs a table")
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 2:
                raise ValueError("table must be a list of at least two (lag, value) pairs")
            if tab[0, 0] != 0.0 or np.any(np.diff(tab[:, 0]) <= 0):
                raise ValueError("table lags must start at 0 and increase strictly")
            if not np.all(np.isfinite(tab)):
                raise ValueError("table entries must be finite")
            if self.sigma2 is not None and not math.isclose(self.sigma2, tab[0, 1], rel_tol=1e-12):
                raise ValueError("sigma2 disagrees with the table value at lag 0")
            set_("sigma2", float(tab[0, 1]))
            set_("table", tab)
        elif self.sigma2 is None:
            set_("sigma2", 1.0)

        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError("sigma2 must be positive")

        if self.kind in _HOLDER:
            k0, a0 = _HOLDER[self.kind]
            if self.holder_alpha is None:
                set_("holder_alpha", a0)
            if self.holder_K is None:
                set_("holder_K", k0 * self.sigma2 / self.length_scale ** self.holder_alpha)
        if self.holder_alpha is not None and not (0 < self.holder_alpha <= 2):
            raise ValueError("holder_alpha must lie in (0, 2]")
        if self.holder_K is not None and not self.holder_K > 0:
            raise ValueError("holder_K must be positive")

    def of_distance(self, r):
        """Covariance as a function of Euclidean distance (vectorised)."""
        r = np.abs(np.asarray(r, dtype=float)) / self.length_scale
        if self.kind == "exponential":
            prof = np.exp(-r)
        elif self.kind == "gaussian":
            prof = np.exp(-0.5 * r * r)
        elif self.kind == "bessel_j0":
            prof = bessel_j0(r)
        elif self.kind == "sinc":
            prof = np.sinc(r / math.pi)
        else:
            return np.interp(r, self.table[:, 0], self.table[:, 1])
        return self.sigma2 * prof

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "sigma2": self.sigma2, "length_scale": self.length_scale,
             "holder_K": self.holder_K, "holder_alpha": self.holder_alpha}
        if self.table is not None:
            d["table"] = np.asarray(self.table).tolist()
        return d


def evaluate(model: CovarianceModel, lag) -> float:
    """C(lag) for a scalar or d-dimensional lag."""
    lag = np.atleast_1d(np.asarray(lag, dtype=float))
    if not np.all(np.isfinite(lag)):
        raise ValueError("lag must be finite")
    return float(model.of_distance(np.linalg.norm(lag)))


@dataclass(frozen=True)
class Window:
    """Compact box ``prod [lo_i, hi_i]``."""

    bounds: tuple

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not b:
            raise ValueError("window needs at least one axis")
        for lo, hi in b:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError("window bounds must satisfy lo < hi")
        object.__setattr__(self, "bounds", b)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Window":
        return cls(((lo, hi),))

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.bounds]))

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        slack = tol * np.maximum(1.0, np.abs(hi - lo))
        return np.all((p >= lo - slack) & (p <= hi + slack), axis=1)


def _as_points(locations, dim: Optional[int] = None) -> np.ndarray:
    p = np.asarray(locations, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1, 1)
    elif p.ndim == 1:
        p = p.reshape(-1, 1) if dim in (None, 1) else p.reshape(1, -1)
    if p.ndim != 2:
        raise ValueError("locations must be a list of d-vectors")
    return p


@dataclass(eq=False)
class ObservationSet:
    """Observed values ``X(t_j)`` at pairwise distinct locations ``t_j``."""

    locations: np.ndarray
    values: np.ndarray
    window: Optional[Window] = None

    def __post_init__(self):
        self.locations = _as_points(self.locations)
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        n = self.locations.shape[0]
        if n == 0:
            raise ValueError("at least one observation is required")
        if self.values.shape[0] != n:
            raise ValueError("one value per location is required")
        if not (np.all(np.isfinite(self.locations)) and np.all(np.isfinite(self.values))):
            raise ValueError("observations must be finite")
        if np.unique(self.locations, axis=0).shape[0] != n:
            raise ValueError("observation locations must be pairwise distinct")
        if self.window is not None:
            if self.window.dim != self.dim:
                raise ValueError("window dimension does not match locations")
            if not np.all(self.window.contains(self.locations)):
                raise ValueError("observation location outside the window")

    @property
    def n(self) -> int:
        return self.locations.shape[0]

    @property
    def dim(self) -> int:
        return self.locations.shape[1]


@dataclass(frozen=True, eq=False)
class CovarianceSystem:
    """Sigma = (C(t_l - t_j)) together with its lower Cholesky factor.

    ``chol @ chol.T`` equals ``sigma_matrix + ridge_applied * I``.
    """

    sigma_matrix: np.ndarray
    chol: np.ndarray
    ridge_applied: float
    sigma2: float
    locations: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.sigma_matrix.shape[0]


def covariance_matrix(model: CovarianceModel, a, b=None) -> np.ndarray:
    a = _as_points(a)
    b = a if b is None else _as_points(b, a.shape[1])
    out = model.of_distance(cdist(a, b))
    if b is a:
        # exact symmetry and diagonal regardless of round-off in the profile
        out = 0.5 * (out + out.T)
        np.fill_diagonal(out, model.sigma2)
    return out


def factorize(sigma: np.ndarray, sigma2: float, locations=None) -> CovarianceSystem:
    """Cholesky with ridge escalation; raises SingularCovarianceError when all rungs fail."""
    n = sigma.shape[0]
    for eps in (0.0,) + RIDGE_LADDER:
        ridge = eps * sigma2
        try:
            chol = np.linalg.cholesky(sigma + ridge * np.eye(n) if ridge else sigma)
        except np.linalg.LinAlgError:
            continue
        if ridge:
            log.warning("covariance matrix (n=%d) needed ridge %.1e * sigma2", n, eps)
        return CovarianceSystem(sigma, chol, ridge, sigma2, locations)
    raise SingularCovarianceError("covariance matrix numerically singular")


def build_sigma(model: CovarianceModel, obs: ObservationSet) -> CovarianceSystem:
    sigma = covariance_matrix(model, obs.locations)
    return factorize(sigma, model.sigma2, obs.locations)


def build_ct(model: CovarianceModel, obs: ObservationSet, t) -> np.ndarray:
    """c_t = (C(t - t_1), ..., C(t - t_n))."""
    t = np.atleast_1d(np.asarray(t, dtype=float)).reshape(1, -1)
    if not np.all(np.isfinite(t)):
        raise ValueError("prediction point must be finite")
    if t.shape[1] != obs.dim:
        raise ValueError("prediction point dimension does not match observations")
    return model.of_distance(cdist(t, obs.locations)[0])
