"""Point-forecast accuracy metrics, evaluated in original units."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError, DimensionMismatchError


@dataclass(frozen=True)
class MetricReport:
    mae: float
    rmse: float
    mase: float
    n_test: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> str:
        return f"{self.mae!r},{self.rmse!r},{self.mase!r},{self.n_test}"

    CSV_HEADER = "mae,rmse,mase,n_test"


def _pair(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float).reshape(-1)
    yhat = np.asarray(yhat, dtype=float).reshape(-1)
    if y.shape != yhat.shape:
        raise DimensionMismatchError(f"length mismatch: {y.shape[0]} vs {yhat.shape[0]}")
    if y.size == 0:
        raise DataError("metrics need at least one observation")
    return y, yhat


def mae(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    return float(np.mean(np.abs(y - yhat)))


def rmse(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def naive_scale(y_train) -> float:
    """In-sample MAE of the lag-1 naive forecaster."""
    y_train = np.asarray(y_train, dtype=float).reshape(-1)
    if y_train.size < 2:
        raise DataError("MASE needs at least two training observations")
    scale = float(np.mean(np.abs(np.diff(y_train))))
    if scale == 0.0:
        raise DataError("constant training series: MASE scale is zero")
    return scale


def mase(y_test, yhat_test, y_train) -> float:
    """Test MAE divided by the lag-1 naive in-sample MAE on ``y_train``."""
    return mae(y_test, yhat_test) / naive_scale(y_train)


def report(y_test, yhat_test, y_train) -> MetricReport:
    y_test, yhat_test = _pair(y_test, yhat_test)
    return MetricReport(
        mae=mae(y_test, yhat_test),
        rmse=rmse(y_test, yhat_test),
        mase=mase(y_test, yhat_test, y_train),
        n_test=int(y_test.size),
    )
