"""Exact (dense Cholesky) simulation of stationary Gaussian fields on grids.

Randomness comes from numpy's Philox counter-based generator. A replication
``r`` of a study with master seed ``m`` draws from the 64-bit key
``replication_seed(m, r)``, so results do not depend on execution order.
Standard normals are produced by inverting the Gaussian c.d.f. on
uniforms built from the top 53 bits of each raw draw, one draw per point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import special

from .covariance import (
    CovarianceModel,
    CovarianceSystem,
    ObservationSet,
    Window,
    covariance_matrix,
    factorize,
)
from .special import GaussianMarginal

__all__ = [
    "MAX_GRID_POINTS",
    "GridSpec",
    "FieldPath",
    "replication_seed",
    "standard_normals",
    "grid_system",
    "simulate_path",
    "restrict_to_observations",
]

MAX_GRID_POINTS = 20000


@dataclass(frozen=True)
class GridSpec:
    """Regular grid ``lo_i + k*mesh`` inside a window, points in lexicographic order."""

    window: Window
    mesh: float

    def __post_init__(self):
        if not (math.isfinite(self.mesh) and self.mesh > 0):
            raise ValueError("mesh must be positive")

    @cached_property
    def shape(self) -> tuple:
        # small slack so that e.g. 100/0.1 counts 1001 points, not 1000
        return tuple(int(math.floor((hi - lo) / self.mesh + 1e-9)) + 1 for lo, hi in self.window.bounds)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def dim(self) -> int:
        return self.window.dim

    @cached_property
    def points(self) -> np.ndarray:
        axes = [lo + self.mesh * np.arange(k) for (lo, _), k in zip(self.window.bounds, self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    @property
    def cell_volume(self) -> float:
        return self.mesh ** self.dim

    def index_of(self, locations) -> np.ndarray:
        """Flat indices of grid points; ValueError for off-grid locations."""
        p = np.atleast_2d(np.asarray(locations, dtype=float))
        if p.shape[1] != self.dim:
            p = p.reshape(-1, self.dim)
        lo = np.array([b[0] for b in self.window.bounds])
        k = np.rint((p - lo) / self.mesh)
        snapped = lo + self.mesh * k
        tol = 1e-9 * np.maximum(1.0, np.abs(p))
        bad = np.any(np.abs(snapped - p) > tol, axis=1) | np.any(k < 0, axis=1) | np.any(k >= np.array(self.shape), axis=1)
        if bad.any():
            raise ValueError(f"location {p[bad][0].tolist()} is not a grid point")
        return np.ravel_multi_index(tuple(k.astype(np.int64).T), self.shape)

    def same_as(self, other: "GridSpec") -> bool:
        if self.shape != other.shape:
            return False
        scale = max(1.0, float(np.max(np.abs(self.points))))
        return bool(np.allclose(self.points, other.points, rtol=0.0, atol=1e-9 * scale))


@dataclass(eq=False)
class FieldPath:
    """Values of a (true or predicted) field at every grid point."""

    grid: GridSpec
    values: np.ndarray
    seed: Optional[int] = None
    marginal: GaussianMarginal = GaussianMarginal()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.values.shape[0] != self.grid.size:
            raise ValueError("one value per grid point is required")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("path values must be finite")


def replication_seed(master_seed: int, replication: int) -> int:
    """64-bit key derived from (master_seed, replication) by SeedSequence hashing."""
    if master_seed < 0 or replication < 0:
        raise ValueError("seeds and replication indices must be nonnegative")
    ss = np.random.SeedSequence([int(master_seed), int(replication)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def standard_normals(seed: int, size: int) -> np.ndarray:
    raw = np.random.Philox(key=int(seed)).random_raw(size)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return special.ndtri(u)


def grid_system(model: CovarianceModel, grid: GridSpec) -> CovarianceSystem:
    if grid.size > MAX_GRID_POINTS:
        raise ValueError(f"grid has {grid.size} points, limit is {MAX_GRID_POINTS}")
    pts = grid.points
    return factorize(covariance_matrix(model, pts), model.sigma2, pts)


def _check_marginal(model: CovarianceModel, marginal: GaussianMarginal):
    if not math.isclose(marginal.variance, model.sigma2, rel_tol=1e-9):
        raise ValueError(f"marginal variance {marginal.variance} != model sigma2 {model.sigma2}")


def simulate_path(model: CovarianceModel, marginal: GaussianMarginal, grid: GridSpec, seed: int,
                  system: Optional[CovarianceSystem] = None) -> FieldPath:
    """mu + L z on the grid, with L the Cholesky factor of the grid covariance.

    ``system`` may carry a precomputed ``grid_system(model, grid)`` when many
    paths are drawn on the same grid.
    """
    _check_marginal(model, marginal)
    if system is None:
        system = grid_system(model, grid)
    elif system.n != grid.size:
        raise ValueError("precomputed system does not match the grid")
    z = standard_normals(seed, grid.size)
    return FieldPath(grid, marginal.mu + system.chol @ z, seed=int(seed), marginal=marginal)


def restrict_to_observations(path: FieldPath, obs_locations) -> ObservationSet:
    idx = path.grid.index_of(obs_locations)
    return ObservationSet(path.grid.points[idx], path.values[idx], window=path.grid.window)
