"""Numeric defaults (tolerances, budgets, seeds) in one place.

Defaults ship in ``defaults.json``. A JSON file named by the environment
variable ``VBROADCAST_CONFIG`` (or passed explicitly) is deep-merged on top.
"""

from __future__ import annotations

import copy
import json
import os
from importlib import resources
from typing import Any

ENV_VAR = "VBROADCAST_CONFIG"


def _load_defaults() -> dict:
    text = resources.files("vbroadcast").joinpath("defaults.json").read_text()
    return json.loads(text)


DEFAULTS: dict = _load_defaults()


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path: str | None = None, overrides: dict | None = None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    path = path or os.environ.get(ENV_VAR)
    if path:
        with open(path) as fh:
            cfg = deep_merge(cfg, json.load(fh))
    if overrides:
        cfg = deep_merge(cfg, overrides)
    return cfg


def get(section: str, key: str) -> Any:
    return DEFAULTS[section][key]
