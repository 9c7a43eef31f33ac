"""Summary-mixing speech encoders: mixers, CTC and cost models.

Arrays are float64 numpy arrays shaped [batch, time, features]; `lengths`
gives the valid frames of each row. Encoder configs are plain dicts with the
same keys as the JSON config files.
"""

import json

from . import _core
from ._core import (
    CapacityError,
    ConfigError,
    DimensionError,
    Error,
    NumericError,
    ctc_brute_force,
    ctc_feasible,
    ctc_greedy_decode,
    ctc_loss,
    fit_exponent,
    gradcheck_suite,
    mixer_cost,
    mixer_forward,
    preset_names,
)

__all__ = [
    "CapacityError",
    "ConfigError",
    "DimensionError",
    "Error",
    "NumericError",
    "config",
    "ctc_brute_force",
    "ctc_feasible",
    "ctc_greedy_decode",
    "ctc_loss",
    "encoder_cost",
    "encoder_logits",
    "fit_exponent",
    "gradcheck_suite",
    "mixer_cost",
    "mixer_forward",
    "preset",
    "preset_names",
    "train_toy",
]


def preset(name):
    return json.loads(_core.preset_json(name))


def config(cfg):
    """Fills defaults and validates; accepts a dict or a preset name."""
    if isinstance(cfg, str):
        return preset(cfg)
    return json.loads(_core.normalize_config_json(json.dumps(cfg)))


def _config_json(cfg):
    return json.dumps(config(cfg))


def encoder_logits(cfg, features, lengths, seed=0):
    return _core.encoder_logits(_config_json(cfg), features, lengths, seed)


def encoder_cost(cfg, time):
    return _core.encoder_cost(_config_json(cfg), time)


def train_toy(cfg, steps=500, batch=16, learning_rate=0.1, optimizer="sgd", seed=0, precision="f64"):
    return _core.train_toy(_config_json(cfg), steps, batch, learning_rate, optimizer, seed, precision)
