"""YAML run-config loading with key-path-precise validation errors."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import yaml

_MISSING = object()


class ConfigError(ValueError):
    """Bad or missing configuration; message names the offending key or line."""


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"cannot parse {path}{where}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping, got {type(data).__name__}")
    return data


def get(cfg: dict, key_path: str, default: Any = _MISSING) -> Any:
    """Fetch a dotted key path; error (or default) when absent."""
    node: Any = cfg
    walked = []
    for key in key_path.split("."):
        walked.append(key)
        if not isinstance(node, dict) or key not in node:
            if default is not _MISSING:
                return default
            raise ConfigError(f"missing config key {'.'.join(walked)!r}")
        node = node[key]
    return node


def get_typed(cfg: dict, key_path: str, kind: type, default: Any = _MISSING) -> Any:
    value = get(cfg, key_path, default)
    if value is default and default is not _MISSING:
        return value
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ConfigError(
            f"config key {key_path!r} must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def get_pair(cfg: dict, key_path: str) -> tuple[int, int]:
    value = get(cfg, key_path)
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(f"config key {key_path!r} must be a [start, end] pair")
    return int(value[0]), int(value[1])


def resolved_yaml(cfg: dict) -> str:
    """Canonical dump of the fully resolved config, for provenance echoes."""
    return yaml.safe_dump(cfg, sort_keys=True, default_flow_style=False)
