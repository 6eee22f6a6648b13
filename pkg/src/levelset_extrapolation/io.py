"""CSV and manifest serialisation.

Numbers are written with 17 significant digits, '.' decimals and LF line
endings so that files round-trip bit-exactly across platforms.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .covariance import Window
from .simulate import FieldPath, GridSpec
from .special import GaussianMarginal

__all__ = [
    "fmt",
    "write_csv",
    "write_path_csv",
    "read_path_csv",
    "read_table",
    "write_manifest",
    "write_study",
]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def coord_header(dim: int) -> list:
    return [f"t_{i + 1}" for i in range(dim)]


def write_path_csv(path, field: FieldPath) -> None:
    pts = field.grid.points
    write_csv(path, coord_header(field.grid.dim) + ["value"],
              (list(p) + [v] for p, v in zip(pts, field.values)))


def read_table(path):
    """Header and rows of a CSV file as lists of strings."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    return rows[0], rows[1:]


def coord_columns(header: Sequence[str]) -> list:
    cols = [i for i, h in enumerate(header) if h.startswith("t_")]
    if not cols or [header[i] for i in cols] != coord_header(len(cols)):
        raise ValueError("missing t_1..t_d coordinate columns")
    return cols


def infer_grid(points: np.ndarray, mesh: float = None) -> GridSpec:
    """Reconstruct the regular grid that produced ``points`` (lexicographic order)."""
    dim = points.shape[1]
    axes = [np.unique(points[:, k]) for k in range(dim)]
    if mesh is None:
        steps = np.concatenate([np.diff(a) for a in axes])
        if steps.size == 0:
            raise ValueError("cannot infer the mesh of a one-point grid")
        mesh = float(np.min(steps))
    bounds = []
    for a in axes:
        # a single coordinate still needs a non-empty window holding one point
        hi = a[-1] if a.size > 1 else a[0] + 0.5 * mesh
        bounds.append((a[0], hi))
    grid = GridSpec(Window(tuple(bounds)), mesh)
    if grid.size != len(points) or not np.allclose(grid.points, points, rtol=0,
                                                  atol=1e-9 * max(1.0, float(np.abs(points).max()))):
        raise ValueError("points do not form a regular grid in lexicographic order")
    return grid


def read_path_csv(path, mesh: float = None, marginal: GaussianMarginal = GaussianMarginal()) -> FieldPath:
    header, rows = read_table(path)
    cols = coord_columns(header)
    if "value" not in header:
        raise ValueError(f"{path}: missing 'value' column")
    vi = header.index("value")
    if not rows:
        raise ValueError(f"{path}: no data rows")
    pts = np.array([[float(r[i]) for i in cols] for r in rows])
    vals = np.array([float(r[vi]) for r in rows])
    return FieldPath(infer_grid(pts, mesh), vals, marginal=marginal)


def manifest(config: dict, command: str, extra: dict = None) -> dict:
    from . import __version__

    doc = {
        "tool_version": __version__,
        "command": command,
        "master_seed": config.get("seed"),
        "config": config,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        doc.update(extra)
    return doc


def write_manifest(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_study(report, out_dir) -> list:
    """raw.csv, summary.csv, variance.csv and mse.csv for a StudyReport."""
    out = Path(out_dir)
    cfg = report.config
    files = [out / n for n in ("raw.csv", "summary.csv", "variance.csv", "mse.csv")]
    write_csv(files[0], ["replication", "method", "level", "sym_diff"], report.raw)
    write_csv(files[1], ["method", "level", "mean", "q1", "median", "q3", "min", "max"],
              ([m, u] + [report.summaries[(m, u)][k] for k in ("mean", "q1", "median", "q3", "min", "max")]
               for m in cfg.methods for u in cfg.levels))
    write_csv(files[2], ["method", "replication", "var_hat"],
              ([label, r, v] for label, vals in report.variance_estimates.items() for r, v in enumerate(vals)))
    dim = report.eval_points.shape[1]
    write_csv(files[3], coord_header(dim) + ["method", "mse"],
              (list(p) + [m, report.mse_curve[m][i]]
               for m in cfg.methods for i, p in enumerate(report.eval_points)))
    return files
