"""Robust, bounded, smooth regression loss with a numpy MLP forecasting toolkit."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DataError,
    DimensionMismatchError,
    DivergenceError,
    InvalidParameterError,
    NonFiniteInputError,
    RobosError,
    TrialError,
)
from .loss import LossKind, LossSpec, loss_grad, loss_profile, loss_value  # noqa: E402

__all__ = [
    "DataError",
    "DimensionMismatchError",
    "DivergenceError",
    "InvalidParameterError",
    "LossKind",
    "LossSpec",
    "NonFiniteInputError",
    "RobosError",
    "TrialError",
    "loss_grad",
    "loss_profile",
    "loss_value",
]
