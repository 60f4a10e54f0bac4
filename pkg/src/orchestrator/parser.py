"""
Run Parser - turns run files and command-line options into a ``RunConfig``.

Precedence, lowest first: built-in experiment defaults, environment
(``src.config``), TOML run file, command line.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import jsonschema
import toml

from ..config import get_default_penalty, get_default_poisson_ratio, get_newton_config, get_output_root, get_worker_count
from ..errors import ConfigError, PlateError
from ..models.run import EXPERIMENT_DEFAULTS, ExperimentKind, RunConfig, SolverConfig

logger = logging.getLogger(__name__)

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_POINT = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}

RUN_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": [k.value for k in ExperimentKind]},
            },
        },
        "mesh": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "h": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "path": {"type": "string"},
            },
        },
        "problem": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "beta": _POSITIVE,
                "gamma": _NUMBER,
                "nu": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 0.5},
                "alpha": _POSITIVE,
                "variants": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"enum": ["var", "bnrs17", "cmn18", "VAR", "BNRS17", "CMN18"]},
                },
                "load": _NUMBER,
                "y1": _POINT,
                "presets": {"type": "array", "items": {"type": "string"}},
                "disclinations": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["position", "angle"],
                        "properties": {"position": _POINT, "angle": _NUMBER},
                    },
                },
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "abs_tol": _POSITIVE,
                "rel_tol": _POSITIVE,
                "max_iters": {"type": "integer", "minimum": 1},
                "initial_damping": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "backtrack_factor": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "max_halvings": {"type": "integer", "minimum": 0},
                "continuation_steps": {"type": "integer", "minimum": 1},
                "continuation_parameter": {"enum": ["gamma", "beta"]},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"values": {"type": "array", "items": _POSITIVE, "minItems": 1}},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "workers": {"type": "integer", "minimum": 1},
                "profile_samples": {"type": "integer", "minimum": 2},
                "heatmap_resolution": {"type": "integer", "minimum": 2},
            },
        },
    },
}

# run-file section/key -> RunConfig field
_FIELD_MAP = {
    ("mesh", "h"): "mesh_h",
    ("mesh", "path"): "mesh_path",
    ("problem", "beta"): "beta",
    ("problem", "gamma"): "gamma",
    ("problem", "nu"): "nu",
    ("problem", "alpha"): "alpha",
    ("problem", "variants"): "variants",
    ("problem", "load"): "load",
    ("problem", "y1"): "y1",
    ("problem", "presets"): "presets",
    ("sweep", "values"): "sweep_values",
    ("output", "dir"): "output_dir",
    ("output", "workers"): "workers",
    ("output", "profile_samples"): "n_profile_samples",
    ("output", "heatmap_resolution"): "heatmap_resolution",
}


def validate_run_data(data: Dict[str, Any]) -> None:
    """Raise ``ConfigError`` listing every schema violation."""
    validator = jsonschema.Draft7Validator(RUN_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.path))
    if errors:
        details = "; ".join(f"{'.'.join(str(p) for p in e.path) or '<root>'}: {e.message}" for e in errors)
        raise ConfigError(f"invalid run file: {details}")


def load_run_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as f:
            data = toml.load(f)
    except FileNotFoundError:
        raise ConfigError(f"run file not found: {path}") from None
    except toml.TomlDecodeError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    validate_run_data(data)
    logger.debug("loaded run file %s", path)
    return data


def _flatten(data: Dict[str, Any]) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for (section, key), name in _FIELD_MAP.items():
        if key in data.get(section, {}):
            values[name] = data[section][key]
    problem = data.get("problem", {})
    if "disclinations" in problem:
        values["disclinations"] = [(tuple(d["position"]), float(d["angle"])) for d in problem["disclinations"]]
    if "y1" in values:
        values["y1"] = tuple(values["y1"])
    return values


def _environment_defaults() -> Dict[str, Any]:
    return {
        "alpha": get_default_penalty(),
        "nu": get_default_poisson_ratio(),
        "output_dir": get_output_root(),
        "workers": get_worker_count(),
    }


def build_run_config(
    kind: Optional[Union[str, ExperimentKind]] = None,
    run_file: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    Merge defaults, environment, run file and command-line ``overrides``.

    ``overrides`` uses ``RunConfig`` field names plus solver keys; ``None``
    values are ignored. The experiment kind comes from ``kind`` or the run file.
    """
    data = load_run_file(run_file) if run_file else {}
    file_kind = data.get("experiment", {}).get("kind")
    kind = kind or file_kind
    if kind is None:
        raise ConfigError("no experiment kind given")
    try:
        kind = ExperimentKind(kind.value if isinstance(kind, ExperimentKind) else kind)
    except ValueError:
        raise ConfigError(f"unknown experiment kind {kind!r}") from None

    values: Dict[str, Any] = {}
    values.update(_environment_defaults())
    values.update(EXPERIMENT_DEFAULTS.get(kind, {}))
    values.update(_flatten(data))

    solver_values: Dict[str, Any] = dict(get_newton_config())
    solver_values.update(data.get("solver", {}))

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in SolverConfig.__dataclass_fields__:
            solver_values[key] = value
        else:
            values[key] = value

    if kind in (ExperimentKind.SWEEP_BETA, ExperimentKind.SWEEP_GAMMA, ExperimentKind.DISCLINATIONS):
        values.setdefault("variants", ["var"])
    if (overrides or {}).get("mesh_h") is not None and (overrides or {}).get("mesh_path") is None:
        values.pop("mesh_path", None)

    try:
        solver = SolverConfig(**solver_values)
        return RunConfig(kind=kind, solver=solver, **values)
    except ConfigError:
        raise
    except (PlateError, TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e
