"""JSON run-configuration loading and validation."""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import ConfigError
from ..kdcore import DistanceSpec, NormScheme


def load_config(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config root must be a JSON object in {path}")
    return cfg


def take(cfg: dict, key: str, kind, default):
    """Typed config lookup; bools are not accepted where numbers are wanted."""
    if key not in cfg:
        return default
    value = cfg[key]
    if kind in (int, float) and isinstance(value, bool):
        raise ConfigError(f"config key {key!r} must be {kind.__name__}, got bool")
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(
            f"config key {key!r} must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def norm_from_config(cfg) -> NormScheme:
    if cfg is None:
        return NormScheme("batch")
    if isinstance(cfg, str):
        cfg = {"kind": cfg}
    if not isinstance(cfg, dict):
        raise ConfigError("norm must be a string or object")
    try:
        return NormScheme(
            kind=cfg.get("kind", "batch"),
            epsilon=float(cfg.get("epsilon", 1e-4)),
            groups=int(cfg.get("groups", 4)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad norm config: {exc}") from exc


def distance_from_config(cfg) -> DistanceSpec:
    if cfg is None:
        return DistanceSpec("frobenius")
    if isinstance(cfg, str):
        cfg = {"kind": cfg}
    if not isinstance(cfg, dict):
        raise ConfigError("distance must be a string or object")
    try:
        return DistanceSpec(
            kind=cfg.get("kind", "frobenius"),
            alpha=float(cfg.get("alpha", 4.0)),
            tau=float(cfg.get("tau", 1.0)),
            floor=float(cfg.get("floor", 1e-12)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad distance config: {exc}") from exc
