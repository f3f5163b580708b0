"""Run-configuration plumbing: files, hashing, deterministic mode."""

from __future__ import annotations

import hashlib
import json
import os

import yaml

from .errors import InvalidArgumentError

DETERMINISTIC_ENV = "DINOISER_DETERMINISTIC"


def deterministic_mode() -> bool:
    return os.environ.get(DETERMINISTIC_ENV, "") == "1"


def load_config_file(path) -> dict:
    """Read a JSON or YAML config file into a dict."""
    with open(path) as fh:
        text = fh.read()
    if str(path).endswith((".yaml", ".yml")):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise InvalidArgumentError(f"config file {path} must hold a mapping")
    return data


def config_hash(config: dict) -> str:
    """Short stable hash of a resolved configuration."""
    canonical = json.dumps(config, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def dump_resolved_config(config: dict, path=None) -> str:
    """Serialize the fully resolved config (and persist it when asked)."""
    text = json.dumps(config, sort_keys=True, indent=2, default=str)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text
