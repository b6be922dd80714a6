"""Python bindings for the mvts C++ core.

Configurations are passed as JSON strings with the same fields as the CLI
config files; dicts are accepted and serialized.
"""

import json as _json

from . import _core
from ._core import (
    Checkpoint,
    ConfigError,
    DataError,
    Dataset,
    DimensionError,
    Error,
    FormatError,
    UsageError,
    balanced_accuracy,
    cocoa,
    gradcheck,
    nt_xent,
    read_cts,
    split_dataset,
    standardize_window,
    ts2vec,
    write_cts,
)

__all__ = [
    "Checkpoint",
    "ConfigError",
    "DataError",
    "Dataset",
    "DimensionError",
    "Error",
    "FormatError",
    "UsageError",
    "balanced_accuracy",
    "cocoa",
    "encoder_output_len",
    "finetune",
    "generate_synthetic",
    "gradcheck",
    "nt_xent",
    "pretrain",
    "read_cts",
    "split_dataset",
    "standardize_window",
    "ts2vec",
    "write_cts",
]


def _as_json(config):
    if config is None:
        return "{}"
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def generate_synthetic(config=None):
    return _core.generate_synthetic(_as_json(config))


def pretrain(config, train, val):
    return _core.pretrain(_as_json(config), train, val)


def finetune(config, checkpoint, labeled, val, test):
    """checkpoint=None requires "from_scratch": true in config."""
    return _core.finetune(_as_json(config), checkpoint, labeled, val, test)


def encoder_output_len(t_in, config=None):
    """config is a pretraining config; only its encoder block is used."""
    return _core.encoder_output_len(t_in, _as_json(config))
