"""Command-line front end.

Exit codes: 0 success, 2 invalid config or arguments, 3 numerical failure,
4 repeated observation location, 5 grid mismatch. Nothing is written when a
command fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config, objects, study_config
from .covariance import ObservationSet, build_sigma, covariance_matrix
from .excursion import ExcursionLevels, GridMismatchError, error_report
from .io import (
    coord_columns,
    coord_header,
    infer_grid,
    manifest,
    read_path_csv,
    read_table,
    write_csv,
    write_manifest,
    write_path_csv,
    write_study,
)
from .linalg import b_quantities, solve_spd
from .predictors import METHODS, compute_weights, mse, predict
from .simulate import FieldPath, GridSpec, replication_seed, simulate_path
from .special import GaussianMarginal, joint_exceedance
from .study import run_study

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_DUPLICATE = 4
EXIT_GRID = 5


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _csv_list(text: str, conv=str) -> list:
    try:
        items = [conv(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise CommandError(EXIT_CONFIG, f"bad list {text!r}: {exc}") from exc
    if not items:
        raise CommandError(EXIT_CONFIG, "empty list")
    return items


def _resolved(args) -> dict:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        raise CommandError(EXIT_CONFIG, str(exc)) from exc
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        cfg["threads"] = args.threads
    if getattr(args, "methods", None):
        methods = _csv_list(args.methods)
        bad = [m for m in methods if m not in METHODS]
        if bad:
            raise CommandError(EXIT_CONFIG, f"unknown methods {bad}")
        cfg["methods"] = methods
    if getattr(args, "levels", None):
        cfg["levels"] = sorted(set(_csv_list(args.levels, float)))
    return cfg


def _eval_grid(cfg, window) -> GridSpec:
    if "eval_mesh" not in cfg:
        raise CommandError(EXIT_CONFIG, "config needs 'eval_mesh'")
    return GridSpec(window, float(cfg["eval_mesh"]))


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.stem + ".manifest.json")


def cmd_simulate(args) -> int:
    cfg = _resolved(args)
    model, marginal, window = objects(cfg)
    grid = _eval_grid(cfg, window)
    try:
        path = simulate_path(model, marginal, grid, replication_seed(int(cfg["seed"]), 0))
    except ValueError as exc:
        raise CommandError(EXIT_CONFIG, str(exc)) from exc
    out = Path(args.out)
    write_path_csv(out, path)
    write_manifest(_manifest_path(out), manifest(cfg, "simulate", {"path_seed": path.seed}))
    return 0


def _read_observations(path, window) -> ObservationSet:
    try:
        header, rows = read_table(path)
        cols = coord_columns(header)
        vi = header.index("value")
        pts = np.array([[float(r[i]) for i in cols] for r in rows])
        vals = np.array([float(r[vi]) for r in rows])
    except (OSError, ValueError, IndexError) as exc:
        raise CommandError(EXIT_CONFIG, f"observations: {exc}") from exc
    if not rows:
        raise CommandError(EXIT_CONFIG, "observations: no data rows")
    if np.unique(pts, axis=0).shape[0] != len(pts):
        raise CommandError(EXIT_DUPLICATE, "observation locations repeat")
    try:
        return ObservationSet(pts, vals, window=window)
    except ValueError as exc:
        raise CommandError(EXIT_CONFIG, f"observations: {exc}") from exc


def cmd_predict(args) -> int:
    cfg = _resolved(args)
    model, marginal, window = objects(cfg)
    grid = _eval_grid(cfg, window)
    obs = _read_observations(args.observations, window)
    system = build_sigma(model, obs)
    sigma2 = model.sigma2
    cts = covariance_matrix(model, grid.points, obs.locations)
    sie = solve_spd(system, np.ones(obs.n))
    rows, wrows = [], []
    bqs = [b_quantities(system, ct, sie) for ct in cts]
    for m in cfg["methods"]:
        for t, ct, bq in zip(grid.points, cts, bqs):
            w = compute_weights(m, system, ct, sigma2, t=t)
            x = predict(w, obs, marginal.mu)
            rows.append(list(t) + [m, x, w.objective, mse(m, bq, sigma2), w.degenerate])
            wrows.append(list(t) + [m] + list(w.weights))
    out = Path(args.out)
    header = coord_header(grid.dim)
    write_csv(out, header + ["method", "prediction", "objective", "mse", "degenerate"], rows)
    if args.weights:
        write_csv(args.weights, header + ["method"] + [f"w_{j + 1}" for j in range(obs.n)], wrows)
    write_manifest(_manifest_path(out), manifest(cfg, "predict", {"observations": str(args.observations)}))
    return 0


def _read_predicted(path, mesh, fallback_mesh):
    """{label: FieldPath} from a path CSV or a predict output (grouped by method).

    The grid is inferred from the file itself; ``fallback_mesh`` is used only
    for one-point grids, whose mesh cannot be inferred.
    """
    try:
        header, rows = read_table(path)
        if "method" not in header:
            if mesh is None and len(rows) == 1:
                mesh = fallback_mesh
            return {"predicted": read_path_csv(path, mesh)}
        cols = coord_columns(header)
        mi, pi = header.index("method"), header.index("prediction")
        groups = {}
        for r in rows:
            groups.setdefault(r[mi], []).append(r)
        out = {}
        for m, grp in groups.items():
            pts = np.array([[float(r[i]) for i in cols] for r in grp])
            grid_mesh = fallback_mesh if mesh is None and len(grp) == 1 else mesh
            out[m] = FieldPath(infer_grid(pts, grid_mesh), [float(r[pi]) for r in grp])
        if not out:
            raise ValueError("no data rows")
        return out
    except (OSError, ValueError, IndexError) as exc:
        raise CommandError(EXIT_CONFIG, f"{path}: {exc}") from exc


def cmd_evaluate(args) -> int:
    levels = ExcursionLevels.of(_csv_list(args.levels, float))
    try:
        true = read_path_csv(args.true, args.mesh)
    except (OSError, ValueError, IndexError) as exc:
        raise CommandError(EXIT_CONFIG, f"{args.true}: {exc}") from exc
    rows, totals = [], []
    for label, pred in _read_predicted(args.predicted, args.mesh, true.grid.mesh).items():
        rep = error_report(true, pred, levels)
        rows.extend([label, u, rep.per_level[u]] for u in levels)
        totals.append((label, rep.total))
    if args.out:
        write_csv(args.out, ["method", "level", "sym_diff"], rows)
    if len(totals) == 1:
        print(format(totals[0][1], ".17g"))
    else:
        for label, total in totals:
            print(f"{label} {total:.17g}")
    return 0


def cmd_study(args) -> int:
    cfg = _resolved(args)
    try:
        config = study_config(cfg)
    except ConfigError as exc:
        raise CommandError(EXIT_CONFIG, str(exc)) from exc
    report = run_study(config, threads=int(cfg["threads"]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_study(report, out)
    write_manifest(out / "manifest.json", manifest(cfg, "study"))
    return 0


def cmd_orthant(args) -> int:
    try:
        marginal = GaussianMarginal(args.mu, args.sigma)
        value = joint_exceedance(args.u, args.rho, marginal)
    except ValueError as exc:
        raise CommandError(EXIT_CONFIG, str(exc)) from exc
    print(format(value, ".15g"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levelset-extrap",
                                description="Level-set extrapolation of stationary Gaussian fields.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate one path on the eval grid")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("predict", help="extrapolate observations onto the eval grid")
    s.add_argument("--config", required=True)
    s.add_argument("--observations", required=True, help="CSV with t_1..t_d,value")
    s.add_argument("--out", required=True)
    s.add_argument("--methods")
    s.add_argument("--weights", help="optional CSV of weight vectors per point and method")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", help="symmetric-difference error between two paths")
    s.add_argument("--true", required=True)
    s.add_argument("--predicted", required=True)
    s.add_argument("--levels", default="-2,-1,0,1,2")
    s.add_argument("--mesh", type=float, help="grid mesh, needed only for one-point grids")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("study", help="replicated simulation study")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--methods")
    s.add_argument("--levels")
    s.set_defaults(func=cmd_study)

    s = sub.add_parser("orthant", help="P(X > u, X_hat > u) for correlation rho")
    s.add_argument("--u", type=float, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--mu", type=float, default=0.0)
    s.add_argument("--sigma", type=float, default=1.0)
    s.set_defaults(func=cmd_orthant)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except GridMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRID
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except json.JSONDecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
