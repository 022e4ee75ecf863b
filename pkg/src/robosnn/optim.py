"""Adam and the mini-batch training loop with early stopping."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .data import WindowedDataset, validation_split
from .errors import DataError, DimensionMismatchError, DivergenceError, InvalidParameterError, NonFiniteInputError
from .loss import LossSpec, loss_grad, loss_value


@dataclass
class AdamState:
    m: nn.GradientBuffer
    v: nn.GradientBuffer
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eta: float = 1e-3
    num_delta: float = 1e-8

    @classmethod
    def for_network(cls, net: nn.Network, eta: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                    num_delta: float = 1e-8) -> AdamState:
        for name, b in (("beta1", beta1), ("beta2", beta2)):
            if not 0.0 <= b < 1.0:
                raise InvalidParameterError(f"{name} must be in [0, 1), got {b}")
        if eta <= 0 or num_delta <= 0:
            raise InvalidParameterError("eta and num_delta must be positive")
        return cls(nn.GradientBuffer.zeros_like(net), nn.GradientBuffer.zeros_like(net), 0,
                   beta1, beta2, eta, num_delta)


def adam_step(state: AdamState, net: nn.Network, grad: nn.GradientBuffer) -> tuple[AdamState, nn.Network]:
    """Apply one bias-corrected Adam update in place and return ``(state, net)``.

    The step counter is incremented before the bias corrections, so the first
    call uses t = 1.
    """
    grad.check_congruent(net)
    state.m.check_congruent(net)
    g_arrays = grad.arrays()
    if not all(np.all(np.isfinite(g)) for g in g_arrays):
        raise NonFiniteInputError("gradient contains NaN or Inf")

    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(net.parameters(), g_arrays, state.m.arrays(), state.v.arrays()):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= state.eta * (m / bc1) / (np.sqrt(v / bc2) + state.num_delta)
    return state, net


@dataclass(frozen=True)
class TrainConfig:
    loss: LossSpec = field(default_factory=LossSpec.square)
    max_epochs: int = 200
    batch_size: int = 32
    patience: int = 5
    learning_rate: float = 1e-3
    l2_coeff: float = 0.0
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    num_delta: float = 1e-8
    val_frac: float = 0.1

    def __post_init__(self):
        for name in ("max_epochs", "batch_size", "patience"):
            if int(getattr(self, name)) < 1:
                raise InvalidParameterError(f"{name} must be a positive integer")
        if self.l2_coeff < 0:
            raise InvalidParameterError("l2_coeff must be nonnegative")
        if not 0.0 < self.val_frac < 1.0:
            raise InvalidParameterError("val_frac must be in (0, 1)")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float


@dataclass
class TrainingHistory:
    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    @property
    def epochs_run(self) -> int:
        return len(self.records)

    @property
    def best_val_loss(self) -> float:
        return self.records[self.best_epoch - 1].val_loss

    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            for line in header.splitlines():
                buf.write(f"# {line}\n")
        buf.write("epoch,train_loss,val_loss,stopped_early\n")
        last = self.epochs_run
        for rec in self.records:
            flag = int(self.stopped_early and rec.epoch == last)
            buf.write(f"{rec.epoch},{rec.train_loss!r},{rec.val_loss!r},{flag}\n")
        return buf.getvalue()


def empirical_risk(net: nn.Network, batch, spec: LossSpec, l2_coeff: float = 0.0) -> float:
    """Mean per-sample loss over ``batch = (X, y)`` plus ``l2_coeff / 2 * ||theta||^2``."""
    X, y = batch
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size == 0:
        raise DataError("empty batch")
    yhat = nn.forward_batch(net, X)
    if yhat.shape != y.shape:
        raise DimensionMismatchError(f"{yhat.shape[0]} inputs but {y.shape[0]} targets")
    nn.record_loss_evals(y.size)
    risk = float(np.mean(loss_value(spec, y - yhat)))
    if l2_coeff:
        risk += 0.5 * l2_coeff * nn.squared_norm(net)
    return risk


def risk_gradient(net: nn.Network, X, y, spec: LossSpec, l2_coeff: float = 0.0) -> tuple[float, nn.GradientBuffer]:
    """Empirical risk on one batch and its gradient with respect to every parameter."""
    n = y.shape[0]
    box = {}

    def upstream(yhat):
        r = y - yhat
        if not np.all(np.isfinite(r)):
            raise DivergenceError("non-finite predictions during training")
        nn.record_loss_evals(n)
        box["risk"] = float(np.mean(loss_value(spec, r)))
        # r = y - yhat, so dL/dyhat = -dL/dr
        return -loss_grad(spec, r) / n

    _, grads = nn.forward_and_backward(net, X, upstream)
    risk = box["risk"]
    if l2_coeff:
        risk += 0.5 * l2_coeff * nn.squared_norm(net)
        for g, p in zip(grads.arrays(), net.parameters()):
            g += l2_coeff * p
    return risk, grads


def train(net: nn.Network, data: WindowedDataset, cfg: TrainConfig) -> tuple[nn.Network, TrainingHistory]:
    """Fit ``net`` to the training windows of ``data`` with Adam.

    The last ``val_frac`` of the training windows (chronological) is held out
    for early stopping. Training stops after ``patience`` consecutive epochs
    without a strict improvement in validation loss, or at ``max_epochs``.
    The returned network is a copy holding the best-validation parameters;
    the input network is left untouched.
    """
    n_train = data.split_index
    if n_train < 2:
        raise DataError(f"need at least 2 training windows, got {n_train}")
    fit_end = validation_split(n_train, cfg.val_frac)
    if cfg.batch_size > fit_end:
        raise DataError(f"batch size {cfg.batch_size} exceeds the {fit_end} fitting windows")
    X_fit, y_fit = data.inputs[:fit_end], data.targets[:fit_end]
    X_val, y_val = data.inputs[fit_end:n_train], data.targets[fit_end:n_train]

    net = net.copy()
    state = AdamState.for_network(net, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.num_delta)
    rng = np.random.default_rng([cfg.seed, 0x5EED])
    history = TrainingHistory()
    best_net = net.copy()
    best_val = math.inf
    stale = 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(fit_end)
        total = 0.0
        for start in range(0, fit_end, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            risk, grads = risk_gradient(net, X_fit[idx], y_fit[idx], cfg.loss, cfg.l2_coeff)
            if not math.isfinite(risk):
                raise DivergenceError(f"empirical risk became non-finite in epoch {epoch}")
            try:
                adam_step(state, net, grads)
            except NonFiniteInputError as exc:
                raise DivergenceError(f"non-finite gradient in epoch {epoch}") from exc
            total += risk * idx.size
        train_loss = total / fit_end
        val_loss = empirical_risk(net, (X_val, y_val), cfg.loss)
        if not math.isfinite(val_loss):
            raise DivergenceError(f"validation loss became non-finite in epoch {epoch}")
        history.records.append(EpochRecord(epoch, train_loss, val_loss))

        if val_loss < best_val:
            best_val = val_loss
            best_net = net.copy()
            history.best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                history.stopped_early = True
                break
    return best_net, history


def predict(net: nn.Network, X) -> np.ndarray:
    return nn.forward_batch(net, X)
