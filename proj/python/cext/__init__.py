"""Multipath-assisted CSI extrapolation (C++ core)."""

from ._cext import (
    ConfigError,
    Dataset,
    DimensionError,
    EmptyProfileError,
    Error,
    IoError,
    Model,
    effective_paths,
    extract_features,
    generate,
    load_model,
    lr_at,
    mask_plan,
    nmse_db,
    read_dataset,
    train_ce,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "DimensionError",
    "EmptyProfileError",
    "Error",
    "IoError",
    "Model",
    "effective_paths",
    "extract_features",
    "generate",
    "load_model",
    "lr_at",
    "mask_plan",
    "nmse_db",
    "read_dataset",
    "train_ce",
]
