"""Hyperparameter search over the robos loss parameters (a, eps, lambda).

Two strategies share one sampling stream so that, for the same seed, the first
``n_warmup`` TPE trials are exactly the random-search trials.

The TPE variant is a deliberately small univariate-product estimator: per
dimension, Gaussian kernel densities are fitted to the best ``gamma`` fraction
of trials (l) and to the rest (g), 24 candidates are drawn from l, and the one
maximising sum_d log l_d(x_d) - log g_d(x_d) is evaluated next.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, TrialError

N_WARMUP = 10
N_CANDIDATES = 24


@dataclass(frozen=True)
class Dimension:
    lo: float
    hi: float
    log: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidParameterError(f"need lo < hi, got ({self.lo}, {self.hi})")
        if self.log and self.lo <= 0:
            raise InvalidParameterError("log-scaled dimensions need lo > 0")

    # internal coordinates: log space for log dimensions
    def to_internal(self, x):
        return np.log(x) if self.log else np.asarray(x, dtype=float)

    def from_internal(self, z):
        return np.exp(z) if self.log else z

    @property
    def internal_bounds(self) -> tuple[float, float]:
        if self.log:
            return math.log(self.lo), math.log(self.hi)
        return self.lo, self.hi

    def clip(self, x: float) -> float:
        return float(min(max(x, self.lo), self.hi))


@dataclass(frozen=True)
class SearchSpace:
    dims: dict[str, Dimension] = field(default_factory=lambda: {
        "a": Dimension(1.0, 10.0),
        "eps": Dimension(math.exp(-4.0), 0.05, log=True),
        "lambda": Dimension(0.1, 1.0),
    })

    @property
    def names(self) -> list[str]:
        return list(self.dims)

    def contains(self, params: dict[str, float]) -> bool:
        return all(d.lo <= params[k] <= d.hi for k, d in self.dims.items())

    def sample(self, rng: np.random.Generator) -> dict[str, float]:
        out = {}
        for name, dim in self.dims.items():
            lo, hi = dim.internal_bounds
            out[name] = dim.clip(float(dim.from_internal(rng.uniform(lo, hi))))
        return out


@dataclass(frozen=True)
class TrialResult:
    trial: int
    params: dict[str, float]
    val_metric: float
    seed: int
    epochs_run: int = 0


Objective = Callable[[dict, int], "float | tuple[float, int]"]


def _evaluate(objective: Objective, trial: int, params: dict, seed: int) -> TrialResult:
    try:
        out = objective(dict(params), seed)
    except Exception as exc:
        raise TrialError(trial, f"objective failed for {params}: {exc}") from exc
    value, epochs = (out if isinstance(out, tuple) else (out, 0))
    value = float(value)
    if not math.isfinite(value):
        raise TrialError(trial, f"objective returned non-finite value {value!r}")
    return TrialResult(trial, dict(params), value, seed, int(epochs))


def _best(trials: list[TrialResult]) -> TrialResult:
    # min() keeps the first of equal values, i.e. the earliest trial
    return min(trials, key=lambda t: t.val_metric)


def random_search(space: SearchSpace, n_trials: int, objective: Objective, seed: int = 0):
    """Evaluate ``n_trials`` seeded uniform draws; return ``(best, trials)``."""
    if n_trials < 1:
        raise InvalidParameterError("n_trials must be at least 1")
    rng = np.random.default_rng(seed)
    trials = [_evaluate(objective, i, space.sample(rng), seed) for i in range(n_trials)]
    return _best(trials), trials


def _kde_logpdf(z: np.ndarray, centers: np.ndarray, bw: float) -> np.ndarray:
    diff = (z[:, None] - centers[None, :]) / bw
    log_k = -0.5 * diff * diff - math.log(bw * math.sqrt(2.0 * math.pi))
    top = log_k.max(axis=1, keepdims=True)
    return (top + np.log(np.mean(np.exp(log_k - top), axis=1, keepdims=True)))[:, 0]


def _propose(space: SearchSpace, trials: list[TrialResult], gamma: float, rng: np.random.Generator) -> dict:
    ranked = sorted(trials, key=lambda t: (t.val_metric, t.trial))
    n_good = max(1, int(math.ceil(gamma * len(ranked))))
    good, bad = ranked[:n_good], ranked[n_good:]
    score = np.zeros(N_CANDIDATES)
    columns = {}
    for name, dim in space.dims.items():
        lo, hi = dim.internal_bounds
        width = hi - lo
        zg = dim.to_internal(np.array([t.params[name] for t in good]))
        zb = dim.to_internal(np.array([t.params[name] for t in bad]))
        bw_g = width / math.sqrt(len(zg))
        bw_b = width / math.sqrt(len(zb))
        picks = zg[rng.integers(0, len(zg), size=N_CANDIDATES)]
        cand = np.clip(picks + bw_g * rng.standard_normal(N_CANDIDATES), lo, hi)
        score += _kde_logpdf(cand, zg, bw_g) - _kde_logpdf(cand, zb, bw_b)
        columns[name] = cand
    best = int(np.argmax(score))
    return {name: dim.clip(float(dim.from_internal(columns[name][best]))) for name, dim in space.dims.items()}


def tpe_search(space: SearchSpace, n_trials: int, objective: Objective, seed: int = 0, gamma: float = 0.25,
               n_warmup: int = N_WARMUP):
    """Tree-structured Parzen estimator search; return ``(best, trials)``."""
    if n_trials < n_warmup:
        raise InvalidParameterError(f"tpe_search needs n_trials >= {n_warmup}")
    if not 0.0 < gamma < 1.0:
        raise InvalidParameterError("gamma must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    trials = [_evaluate(objective, i, space.sample(rng), seed) for i in range(n_warmup)]
    for i in range(n_warmup, n_trials):
        trials.append(_evaluate(objective, i, _propose(space, trials, gamma, rng), seed))
    return _best(trials), trials


def running_best(trials: list[TrialResult]) -> list[float]:
    out, best = [], math.inf
    for t in trials:
        best = min(best, t.val_metric)
        out.append(best)
    return out


def trials_to_csv(trials: list[TrialResult], header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        for line in header.splitlines():
            buf.write(f"# {line}\n")
    buf.write("trial,a,eps,lambda,val_mae,seed,epochs\n")
    for t in trials:
        p = t.params
        buf.write(f"{t.trial},{p['a']!r},{p['eps']!r},{p['lambda']!r},{t.val_metric!r},{t.seed},{t.epochs_run}\n")
    return buf.getvalue()
