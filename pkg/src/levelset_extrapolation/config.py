"""JSON run configuration: schema, parsing into library objects, resolution."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Dict

import jsonschema

from .covariance import KINDS, CovarianceModel, Window
from .excursion import PAPER_LEVELS, ExcursionLevels
from .predictors import METHODS
from .special import GaussianMarginal
from .study import StudyConfig

__all__ = ["CONFIG_SCHEMA", "ConfigError", "load_config", "parse_config", "study_config"]

_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["model", "window"],
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(KINDS)},
                "sigma2": _positive,
                "length_scale": _positive,
                "holder_K": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "holder_alpha": {"type": ["number", "null"], "exclusiveMinimum": 0, "maximum": 2},
                "table": {
                    "type": "array",
                    "minItems": 2,
                    "items": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                },
            },
        },
        "marginal": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"mu": _number, "sigma": _positive},
        },
        "window": {
            "type": "object",
            "required": ["bounds"],
            "additionalProperties": False,
            "properties": {
                "bounds": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                },
            },
        },
        "obs_mesh": _positive,
        "eval_mesh": _positive,
        "levels": {"type": "array", "minItems": 1, "items": _number},
        "methods": {"type": "array", "minItems": 1, "items": {"enum": list(METHODS)}},
        "replications": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1},
    },
}

DEFAULTS = {
    "marginal": {"mu": 0.0},
    "levels": list(PAPER_LEVELS),
    "methods": list(METHODS),
    "replications": 200,
    "seed": 0,
    "threads": 1,
}


class ConfigError(ValueError):
    pass


def load_config(path) -> Dict[str, Any]:
    """Read a config file; a run manifest is accepted and its config echo used."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if isinstance(doc, dict) and "config" in doc and "tool_version" in doc:
        doc = doc["config"]
    return parse_config(doc)


def parse_config(doc: Any) -> Dict[str, Any]:
    """Validate against the schema and return the fully resolved config dict."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config: {exc.message}") from exc
    cfg = {**DEFAULTS, **doc}
    try:
        model = CovarianceModel(**cfg["model"])
        window = Window(tuple(tuple(b) for b in cfg["window"]["bounds"]))
        marg = dict(cfg["marginal"])
        sigma = marg.get("sigma", math.sqrt(model.sigma2))
        if not math.isclose(sigma * sigma, model.sigma2, rel_tol=1e-9):
            raise ValueError("marginal sigma^2 must equal model sigma2")
        marginal = GaussianMarginal(float(marg.get("mu", 0.0)), float(sigma))
        levels = ExcursionLevels.of(cfg["levels"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from exc
    cfg["model"] = model.to_dict()
    cfg["marginal"] = {"mu": marginal.mu, "sigma": marginal.sigma}
    cfg["window"] = {"bounds": [list(b) for b in window.bounds]}
    cfg["levels"] = list(levels.levels)
    return cfg


def objects(cfg: Dict[str, Any]):
    """(model, marginal, window) from a resolved config."""
    m = dict(cfg["model"])
    if m.get("table") is not None:
        m.pop("sigma2", None)
    else:
        m.pop("table", None)
    return (CovarianceModel(**m), GaussianMarginal(**cfg["marginal"]),
            Window(tuple(tuple(b) for b in cfg["window"]["bounds"])))


def study_config(cfg: Dict[str, Any]) -> StudyConfig:
    model, marginal, window = objects(cfg)
    for key in ("obs_mesh", "eval_mesh"):
        if key not in cfg:
            raise ConfigError(f"config: study needs '{key}'")
    try:
        return StudyConfig(
            model=model,
            marginal=marginal,
            window=window,
            obs_mesh=float(cfg["obs_mesh"]),
            eval_mesh=float(cfg["eval_mesh"]),
            levels=ExcursionLevels(tuple(cfg["levels"])),
            methods=tuple(cfg["methods"]),
            replications=int(cfg["replications"]),
            master_seed=int(cfg["seed"]),
        )
    except ValueError as exc:
        raise ConfigError(f"config: {exc}") from exc
