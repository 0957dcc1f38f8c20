"""Python access to the dode-walk core.

Functions that take a configuration accept a dict, a JSON string or a preset name.
"""

import json

from . import _dodewalk
from ._dodewalk import (
    BoundaryLossError,
    ConfigError,
    StabilityError,
    __version__,
    kernel,
    lattice_sum,
    markov_weight,
    preset_names,
    weights,
)


def preset(name):
    return json.loads(_dodewalk.preset(name))


def _config_text(config, **overrides):
    if isinstance(config, str) and not config.lstrip().startswith("{"):
        config = preset(config)
    elif isinstance(config, str):
        config = json.loads(config)
    config = dict(config)
    for key, value in overrides.items():
        if value is None:
            config.pop(key, None)
        else:
            config[key] = value
    return json.dumps(config)


def resolve(config, **overrides):
    return _dodewalk.resolve(_config_text(config, **overrides))


def walk(config, walker=0, **overrides):
    return _dodewalk.walk(_config_text(config, **overrides), walker)


def ensemble(config, threads=1, **overrides):
    return _dodewalk.ensemble(_config_text(config, **overrides), threads)


def fd(config, **overrides):
    return _dodewalk.fd(_config_text(config, **overrides))


def run(mode, config, out, threads=1, **overrides):
    """Run a CLI mode; returns (exit_code, report dict) and writes files under `out`."""
    code, report = _dodewalk.run(mode, _config_text(config, **overrides), str(out), threads)
    return code, json.loads(report)


__all__ = [
    "BoundaryLossError",
    "ConfigError",
    "StabilityError",
    "__version__",
    "ensemble",
    "fd",
    "kernel",
    "lattice_sum",
    "markov_weight",
    "preset",
    "preset_names",
    "resolve",
    "run",
    "walk",
    "weights",
]
