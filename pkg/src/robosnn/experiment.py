"""End-to-end forecasting runs: contaminate, window, train, score.

This is the layer the command line drives. It is also usable directly:

>>> from robosnn.data import ar1_series
>>> from robosnn.loss import LossSpec
>>> cfg = ModelConfig(seq_size=8, dense_layers=1, units=8, batch_size=32, max_epochs=3)
>>> res = run_single(ar1_series(300, seed=1), cfg, LossSpec.robos(), level=0.1, seed=0)
>>> res.report.n_test
59
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import nn
from .data import (
    ContaminationSpec,
    DEFAULT_TRAIN_FRAC,
    Series,
    WindowedDataset,
    denormalize,
    inject_outliers,
    train_region_length,
    validation_split,
    window_and_split,
)
from .loss import LossSpec
from .metrics import MetricReport, mae, report
from .optim import TrainConfig, TrainingHistory, predict, train


@dataclass(frozen=True)
class ModelConfig:
    seq_size: int
    dense_layers: int
    units: int
    batch_size: int
    learning_rate: float = 1e-3
    patience: int = 5
    max_epochs: int = 200
    l2_coeff: float = 0.0

    @property
    def dims(self) -> list[int]:
        return nn.architecture(self.seq_size, self.dense_layers, self.units)

    def to_dict(self) -> dict:
        return asdict(self)


# Architecture and training hyperparameters per dataset.
PRESETS: dict[str, ModelConfig] = {
    "Daily_Min_Temperature": ModelConfig(seq_size=30, dense_layers=2, batch_size=32, units=64,
                                         learning_rate=0.001, patience=5),
    "Electricity_Load": ModelConfig(seq_size=96, dense_layers=3, batch_size=256, units=64,
                                    learning_rate=0.001, patience=5),
    "Monthly_Sunspots": ModelConfig(seq_size=132, dense_layers=3, batch_size=32, units=64,
                                    learning_rate=0.001, patience=5),
    "Daily_Gold_Price": ModelConfig(seq_size=30, dense_layers=2, batch_size=16, units=32,
                                    learning_rate=0.001, patience=5),
}


@dataclass(frozen=True)
class Contamination:
    """Outlier level plus magnitude range, shared by every loss in a comparison."""

    level: float = 0.0
    magnitude_lo: float = 3.0
    magnitude_hi: float = 5.0

    def spec(self, seed: int) -> ContaminationSpec:
        return ContaminationSpec(self.level, self.magnitude_lo, self.magnitude_hi, seed)


@dataclass
class RunResult:
    report: MetricReport
    val_mae: float
    net: nn.Network
    history: TrainingHistory
    dataset: WindowedDataset
    series: Series = field(repr=False)


def prepare(series: Series, seq_size: int, contamination: Contamination, seed: int,
            train_frac: float = DEFAULT_TRAIN_FRAC) -> tuple[Series, WindowedDataset]:
    """Contaminate the training region of ``series`` and window it."""
    n_train = train_region_length(len(series), seq_size, train_frac)
    dirty = inject_outliers(series, contamination.spec(seed), n_train) if contamination.level else series
    return dirty, window_and_split(dirty, seq_size, train_frac)


def run_on_dataset(data: WindowedDataset, model: ModelConfig, loss: LossSpec, seed: int,
                   series: Series | None = None) -> RunResult:
    net0 = nn.init(model.dims, seed)
    cfg = TrainConfig(loss=loss, max_epochs=model.max_epochs, batch_size=model.batch_size,
                      patience=model.patience, learning_rate=model.learning_rate,
                      l2_coeff=model.l2_coeff, seed=seed)
    net, history = train(net0, data, cfg)

    fit_end = validation_split(data.split_index, cfg.val_frac)
    val_pred = denormalize(data, predict(net, data.inputs[fit_end:data.split_index]))
    val_true = denormalize(data, data.targets[fit_end:data.split_index])
    test_pred = denormalize(data, predict(net, data.x_test))
    test_true = denormalize(data, data.y_test)
    rep = report(test_true, test_pred, data.train_values)
    return RunResult(rep, mae(val_true, val_pred), net, history, data, series)


def run_single(series: Series, model: ModelConfig, loss: LossSpec, level: float = 0.0, seed: int = 0,
               magnitude: tuple[float, float] = (3.0, 5.0)) -> RunResult:
    """Contaminate at ``level``, train with ``loss`` and score on the clean test region."""
    dirty, data = prepare(series, model.seq_size, Contamination(level, *magnitude), seed)
    return run_on_dataset(data, model, loss, seed, dirty)


def predict_test_region(result: RunResult) -> np.ndarray:
    return denormalize(result.dataset, predict(result.net, result.dataset.x_test))
