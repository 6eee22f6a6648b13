"""Excursion sets on grids and the symmetric-difference (distance in measure) error."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable

import numpy as np

from .simulate import FieldPath, GridSpec
from .special import GaussianMarginal, joint_exceedance, normal_sf

__all__ = [
    "ExcursionLevels",
    "ExcursionErrorReport",
    "GridMismatchError",
    "excursion_indicator",
    "symmetric_difference_volume",
    "error_report",
    "expected_error_decomposition",
]

PAPER_LEVELS = (-2.0, -1.0, 0.0, 1.0, 2.0)


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class ExcursionLevels:
    levels: tuple

    def __post_init__(self):
        lv = tuple(float(u) for u in self.levels)
        if not lv:
            raise ValueError("at least one level is required")
        if not np.all(np.isfinite(lv)):
            raise ValueError("levels must be finite")
        if np.any(np.diff(lv) <= 0):
            raise ValueError("levels must be strictly increasing")
        object.__setattr__(self, "levels", lv)

    @classmethod
    def of(cls, levels: Iterable[float]) -> "ExcursionLevels":
        """Sorted, deduplicated levels from any iterable."""
        return cls(tuple(sorted(set(float(u) for u in levels))))

    def __iter__(self):
        return iter(self.levels)

    def __len__(self):
        return len(self.levels)


@dataclass(frozen=True, eq=False)
class ExcursionErrorReport:
    per_level: Dict[float, float]
    total: float
    grid: GridSpec


def excursion_indicator(path: FieldPath, level: float) -> np.ndarray:
    """Grid points of the excursion set {t : X(t) > level}."""
    return path.values > level


def _check_grids(a: FieldPath, b: FieldPath):
    if not a.grid.same_as(b.grid):
        raise GridMismatchError("paths live on different grids")


def symmetric_difference_volume(path_a: FieldPath, path_b: FieldPath, level: float) -> float:
    """Riemann volume (mesh^d per point) of the points in exactly one excursion set."""
    _check_grids(path_a, path_b)
    count = np.count_nonzero(excursion_indicator(path_a, level) != excursion_indicator(path_b, level))
    return count * path_a.grid.cell_volume


def error_report(true_path: FieldPath, predicted_path: FieldPath, levels: ExcursionLevels) -> ExcursionErrorReport:
    _check_grids(true_path, predicted_path)
    per = {u: symmetric_difference_volume(true_path, predicted_path, u) for u in levels}
    return ExcursionErrorReport(per, float(sum(per.values())), true_path.grid)


def expected_error_decomposition(rho: float, levels: ExcursionLevels,
                                 marginal: GaussianMarginal = GaussianMarginal(),
                                 window_volume: float = 1.0) -> float:
    """Expected symmetric-difference volume for a predictor with constant correlation rho:
    2 v(W) sum_j [S(u_j) - P(X > u_j, X_hat > u_j)]."""
    if window_volume <= 0:
        raise ValueError("window volume must be positive")
    total = sum(normal_sf(u, marginal) - joint_exceedance(u, rho, marginal) for u in levels)
    return max(0.0, 2.0 * window_volume * total)
