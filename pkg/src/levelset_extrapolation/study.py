"""Replicated simulation studies: predictor comparison on excursion-set errors,
per-path variance diagnostics and mean-square consistency along mesh refinement."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .covariance import CovarianceModel, ObservationSet, Window, build_sigma, covariance_matrix, factorize
from .excursion import ExcursionLevels, PAPER_LEVELS, error_report
from .linalg import b_quantities, solve_spd
from .predictors import (
    LEVELSET_KNOWN_MEAN,
    LEVELSET_UNKNOWN_MEAN,
    METHODS,
    ORDINARY_KRIGING,
    SIMPLE_KRIGING,
    compute_weights,
    mse,
)
from .simulate import FieldPath, GridSpec, grid_system, replication_seed, simulate_path, standard_normals
from .special import GaussianMarginal

__all__ = [
    "TRUE_FIELD",
    "StudyConfig",
    "StudyReport",
    "ConsistencyPoint",
    "run_study",
    "summarize",
    "summary_table",
    "consistency_experiment",
    "desk_scale_gaussian_config",
    "desk_scale_bessel_config",
]

# label of the simulated field itself in the variance table
TRUE_FIELD = "true_field"


@dataclass(frozen=True)
class StudyConfig:
    model: CovarianceModel
    marginal: GaussianMarginal
    window: Window
    obs_mesh: float
    eval_mesh: float
    levels: ExcursionLevels
    methods: Tuple[str, ...] = METHODS
    replications: int = 200
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise ValueError("at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("duplicate methods")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if not (0 < self.eval_mesh <= self.obs_mesh):
            raise ValueError("need 0 < eval_mesh <= obs_mesh")
        ratio = self.obs_mesh / self.eval_mesh
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError("obs_mesh must be an integer multiple of eval_mesh")
        if not math.isclose(self.marginal.variance, self.model.sigma2, rel_tol=1e-9):
            raise ValueError("marginal variance must equal the model's sigma2")

    @property
    def eval_grid(self) -> GridSpec:
        return GridSpec(self.window, self.eval_mesh)

    @property
    def obs_grid(self) -> GridSpec:
        return GridSpec(self.window, self.obs_mesh)

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "marginal": {"mu": self.marginal.mu, "sigma": self.marginal.sigma},
            "window": {"bounds": [list(b) for b in self.window.bounds]},
            "obs_mesh": self.obs_mesh,
            "eval_mesh": self.eval_mesh,
            "levels": list(self.levels.levels),
            "methods": list(self.methods),
            "replications": self.replications,
            "seed": self.master_seed,
        }


@dataclass(eq=False)
class StudyReport:
    config: StudyConfig
    raw: List[Tuple[int, str, float, float]]
    summaries: Dict[Tuple[str, float], Dict[str, float]]
    variance_estimates: Dict[str, np.ndarray]
    variance_summaries: Dict[str, Dict[str, float]]
    eval_points: np.ndarray
    mse_curve: Dict[str, np.ndarray] = field(default_factory=dict)

    def median(self, method: str, level: float) -> float:
        return self.summaries[(method, float(level))]["median"]


def summarize(values: Sequence[float]) -> Dict[str, float]:
    """Mean, quartiles (numpy's default linear interpolation, inclusive of
    the extremes) and range of a non-empty sample."""
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("cannot summarise an empty sample")
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75], method="linear")
    return {
        "mean": math.fsum(v.tolist()) / v.size,
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "min": float(v.min()),
        "max": float(v.max()),
    }


def summary_table(raw: Sequence[Tuple[int, str, float, float]]) -> Dict[Tuple[str, float], Dict[str, float]]:
    """Group raw (replication, method, level, sym_diff) rows by (method, level)."""
    if not raw:
        raise ValueError("empty raw table")
    groups: Dict[Tuple[str, float], List[float]] = {}
    for _, method, level, value in raw:
        groups.setdefault((method, level), []).append(value)
    return {key: summarize(vals) for key, vals in groups.items()}


def _weight_matrices(config: StudyConfig, obs_points: np.ndarray, eval_points: np.ndarray):
    obs = ObservationSet(obs_points, np.zeros(len(obs_points)), window=config.window)
    system = build_sigma(config.model, obs)
    sigma2 = config.model.sigma2
    cts = covariance_matrix(config.model, eval_points, obs_points)
    sie = solve_spd(system, np.ones(system.n))
    weights = {m: np.empty((len(eval_points), system.n)) for m in config.methods}
    curve = {m: np.empty(len(eval_points)) for m in config.methods}
    for i, (t, ct) in enumerate(zip(eval_points, cts)):
        bq = b_quantities(system, ct, sie)
        for m in config.methods:
            weights[m][i] = compute_weights(m, system, ct, sigma2, t=t).weights
            curve[m][i] = mse(m, bq, sigma2)
    return weights, curve


def run_study(config: StudyConfig, threads: int = 1) -> StudyReport:
    """Simulate, extrapolate and score ``config.replications`` paths.

    Replication r uses the key replication_seed(master_seed, r); rows are
    assembled in replication order, so the output does not depend on
    ``threads``.
    """
    eval_grid = config.eval_grid
    obs_points = config.obs_grid.points
    obs_idx = eval_grid.index_of(obs_points)
    sim_system = grid_system(config.model, eval_grid)
    weights, curve = _weight_matrices(config, obs_points, eval_grid.points)
    mu = config.marginal.mu

    def replicate(r: int):
        true = simulate_path(config.model, config.marginal, eval_grid,
                             replication_seed(config.master_seed, r), system=sim_system)
        x_obs = true.values[obs_idx]
        rows, var = [], {TRUE_FIELD: _sample_variance(true.values)}
        for m in config.methods:
            if m == SIMPLE_KRIGING:
                pred = mu + weights[m] @ (x_obs - mu)
            else:
                pred = weights[m] @ x_obs
            rep = error_report(true, FieldPath(eval_grid, pred, marginal=config.marginal), config.levels)
            rows.extend((r, m, u, rep.per_level[u]) for u in config.levels)
            var[m] = _sample_variance(pred)
        return rows, var

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(replicate, range(config.replications)))
    else:
        results = [replicate(r) for r in range(config.replications)]

    raw = [row for rows, _ in results for row in rows]
    labels = (TRUE_FIELD,) + config.methods
    variances = {k: np.array([v[k] for _, v in results]) for k in labels}
    return StudyReport(
        config=config,
        raw=raw,
        summaries=summary_table(raw),
        variance_estimates=variances,
        variance_summaries={k: summarize(v) for k, v in variances.items()},
        eval_points=eval_grid.points,
        mse_curve=curve,
    )


def _sample_variance(values: np.ndarray) -> float:
    if values.size < 2:
        return float("nan")
    return float(np.var(values, ddof=1))


@dataclass(frozen=True)
class ConsistencyPoint:
    mesh: float
    n_obs: int
    min_distance: float
    analytical_mse: float
    empirical_mse: float
    grid_bound: float       # 2 K (sqrt(d) h / 2)^alpha
    distance_bound: float   # 2 K min_j |t_j - t|^alpha
    method: str


def consistency_experiment(model: CovarianceModel, marginal: GaussianMarginal, window: Window, t,
                           mesh_sequence: Sequence[float], master_seed: int = 0,
                           replications: int = 200, method: Optional[str] = None) -> List[ConsistencyPoint]:
    """Mean-square error at a fixed point ``t`` as the observation mesh shrinks.

    The known-mean level-set predictor is used for centred fields and the
    unknown-mean one otherwise, unless ``method`` says differently.
    """
    if model.holder_K is None or model.holder_alpha is None:
        raise ValueError("model needs Hoelder constants for the rate bound")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape[0] != window.dim or not window.contains(t)[0]:
        raise ValueError("t must be a point of the window")
    meshes = [float(h) for h in mesh_sequence]
    if not meshes:
        raise ValueError("empty mesh sequence")
    if any(b >= a for a, b in zip(meshes, meshes[1:])):
        warnings.warn("mesh sequence is not strictly decreasing", stacklevel=2)
    coarse = GridSpec(window, meshes[0])
    if np.min(np.linalg.norm(coarse.points - t, axis=1)) == 0.0:
        raise ValueError("t lies on the coarsest observation grid")
    if method is None:
        method = LEVELSET_KNOWN_MEAN if marginal.mu == 0 else LEVELSET_UNKNOWN_MEAN
    if not math.isclose(marginal.variance, model.sigma2, rel_tol=1e-9):
        raise ValueError("marginal variance must equal the model's sigma2")

    K, alpha, d = model.holder_K, model.holder_alpha, window.dim
    sigma2 = model.sigma2
    out = []
    for h in meshes:
        pts = GridSpec(window, h).points
        dist = np.linalg.norm(pts - t, axis=1)
        obs = ObservationSet(pts, np.zeros(len(pts)), window=window)
        system = build_sigma(model, obs)
        ct = model.of_distance(dist)
        bq = b_quantities(system, ct)
        lam = compute_weights(method, system, ct, sigma2, t=t).weights
        analytical = mse(method, bq, sigma2)

        on_grid = np.flatnonzero(dist == 0.0)
        if on_grid.size:
            joint, target = system, int(on_grid[0])
        else:
            full = np.vstack([pts, t])
            joint = factorize(covariance_matrix(model, full), sigma2, full)
            target = len(pts)
        sq = np.empty(replications)
        for r in range(replications):
            x = marginal.mu + joint.chol @ standard_normals(replication_seed(master_seed, r), joint.n)
            xo = x[: len(pts)]
            pred = marginal.mu + lam @ (xo - marginal.mu) if method == SIMPLE_KRIGING else lam @ xo
            sq[r] = (pred - x[target]) ** 2
        out.append(ConsistencyPoint(
            mesh=h,
            n_obs=len(pts),
            min_distance=float(dist.min()),
            analytical_mse=analytical,
            empirical_mse=float(sq.mean()),
            grid_bound=2.0 * K * (math.sqrt(d) * h / 2.0) ** alpha,
            distance_bound=2.0 * K * float(dist.min()) ** alpha,
            method=method,
        ))
    return out


def desk_scale_gaussian_config(master_seed: int = 20240611, replications: int = 200) -> StudyConfig:
    """Gaussian covariance, obs every 10 on [0, 100], scored on a 0.5 grid at levels -2..2."""
    return StudyConfig(
        model=CovarianceModel("gaussian"),
        marginal=GaussianMarginal(0.0, 1.0),
        window=Window.interval(0.0, 100.0),
        obs_mesh=10.0,
        eval_mesh=0.5,
        levels=ExcursionLevels(PAPER_LEVELS),
        methods=METHODS,
        replications=replications,
        master_seed=master_seed,
    )


def desk_scale_bessel_config(master_seed: int = 20240611, replications: int = 200) -> StudyConfig:
    """J0 covariance with mean 1, levels every 0.25 over [-1, 3]."""
    return StudyConfig(
        model=CovarianceModel("bessel_j0"),
        marginal=GaussianMarginal(1.0, 1.0),
        window=Window.interval(0.0, 100.0),
        obs_mesh=10.0,
        eval_mesh=0.5,
        levels=ExcursionLevels(tuple(np.round(np.arange(-1.0, 3.0001, 0.25), 10))),
        methods=(LEVELSET_UNKNOWN_MEAN, ORDINARY_KRIGING),
        replications=replications,
        master_seed=master_seed,
    )
