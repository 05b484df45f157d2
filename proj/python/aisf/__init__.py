"""AIS trajectory forecasting: synthetic data, models, training and metrics."""

from ._core import (
    ConfigError,
    DataError,
    DimensionError,
    FormatError,
    Network,
    NumericalError,
    StateError,
    evaluate,
    generate,
    gradcheck,
    hte,
    huber,
    load_csv,
    mae,
    metric_report,
    regime,
    rmse,
    rpd,
    train,
    train_seeds,
)

VARIABLES = ("lat", "lon", "delta_t", "cog", "sog")

__all__ = [
    "ConfigError",
    "DataError",
    "DimensionError",
    "FormatError",
    "Network",
    "NumericalError",
    "StateError",
    "VARIABLES",
    "evaluate",
    "generate",
    "gradcheck",
    "hte",
    "huber",
    "load_csv",
    "mae",
    "metric_report",
    "regime",
    "rmse",
    "rpd",
    "train",
    "train_seeds",
]
