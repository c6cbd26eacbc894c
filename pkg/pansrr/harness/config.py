"""
Experiment configuration: model defaults < key=value file < CLI flags.

Config files are read with python-dotenv, so they follow ``.env`` syntax
(comments, quoting, blank lines). Two operational settings also come from
the environment: ``PANSRR_WORKERS`` and ``PANSRR_LOG_LEVEL``.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from dotenv import dotenv_values
from pydantic import ValidationError

from pansrr.errors import ConfigError
from pansrr.models import ExperimentConfig

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[2] / "config" / "experiment.env"

# file key -> ExperimentConfig field
_KEY_ALIASES = {
    "lambda": "lam",
    "max_iters": "max_iterations",
    "lsq_max_iters": "lsq_max_iterations",
}
_LIST_KEYS = {"ms", "pan", "baselines"}


def _parse_shifts(raw: str):
    shifts = []
    for item in raw.split(";"):
        item = item.strip()
        if not item:
            continue
        try:
            x, y = (float(v) for v in item.split(","))
        except ValueError as exc:
            raise ConfigError(f"shift {item!r} is not 'x,y'") from exc
        shifts.append((x, y))
    return shifts


def parse_config_values(values: Mapping[str, Optional[str]]) -> Dict[str, Any]:
    """Turn raw key=value strings into ExperimentConfig field values."""
    parsed: Dict[str, Any] = {}
    for key, raw in values.items():
        if raw is None or raw == "":
            continue
        field = _KEY_ALIASES.get(key.lower(), key.lower())
        if field not in ExperimentConfig.model_fields:
            raise ConfigError(f"unknown config key {key!r}")
        if field in _LIST_KEYS:
            parsed[field] = [v.strip() for v in raw.split(",") if v.strip()]
        elif field == "shifts":
            parsed[field] = _parse_shifts(raw)
        else:
            parsed[field] = raw
    return parsed


def load_experiment_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """Build the run configuration.

    Args:
        path: key=value file; ``None`` means no file (model defaults only).
        overrides: already-typed values, usually parsed CLI flags. ``None``
            values are ignored so unset flags never mask the file.

    Returns:
        A validated :class:`ExperimentConfig`.
    """
    merged: Dict[str, Any] = {}
    env_workers = os.getenv("PANSRR_WORKERS")
    if env_workers:
        merged["workers"] = env_workers
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        merged.update(parse_config_values(dotenv_values(path)))
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[_KEY_ALIASES.get(key, key)] = value
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in e['loc']) or 'config'}: {e['msg']}" for e in exc.errors()
        )
        raise ConfigError(problems) from exc
