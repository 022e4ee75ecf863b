"""Generalization-gap bound for depth-d networks trained with the bounded loss.

With probability at least 1 - eps_conf over the draw of n training samples::

    R(f) - R_n(f) <= 2 L B (sqrt(2 log(2) d) + 1) prod_j M_F(j) / sqrt(n)
                     + sqrt(8 ln(1 / eps_conf) / n)

where B bounds the input norm, M_F(j) bounds the Frobenius norm of layer j and
L is the Lipschitz constant of the loss. The usual statement takes L = a / e;
the derivative of the loss as implemented is bounded by lam * a / e, which is
reported next to it as ``lipschitz_adjusted_bound``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import nn
from .data import WindowedDataset
from .errors import InvalidParameterError
from .loss import LossKind, LossSpec

# Base of the logarithm inside sqrt(2 log(2) d). Natural log by default;
# set to 2.0 for the base-2 reading.
LOG_BASE = math.e


@dataclass(frozen=True)
class BoundInputs:
    a: float
    B: float
    d: int
    m_f: tuple[float, ...]
    n: int
    eps_conf: float

    def __post_init__(self):
        object.__setattr__(self, "m_f", tuple(float(x) for x in self.m_f))
        if not 0.0 < self.eps_conf < 1.0:
            raise InvalidParameterError(f"eps_conf must lie in (0, 1), got {self.eps_conf!r}")
        if self.a <= 0 or self.B < 0 or self.d < 1 or self.n < 1:
            raise InvalidParameterError("need a > 0, B >= 0, d >= 1, n >= 1")
        if len(self.m_f) != self.d:
            raise InvalidParameterError(f"{len(self.m_f)} Frobenius norms for depth {self.d}")
        if any(x < 0 or not math.isfinite(x) for x in self.m_f):
            raise InvalidParameterError("Frobenius norms must be finite and nonnegative")


def capacity_term(inp: BoundInputs, lipschitz: float | None = None, log_base: float = LOG_BASE) -> float:
    """The Rademacher part of the bound. ``lipschitz`` defaults to a / e."""
    if lipschitz is None:
        lipschitz = inp.a / math.e
    depth_factor = math.sqrt(2.0 * math.log(2.0, log_base) * inp.d) + 1.0
    return 2.0 * lipschitz * inp.B * depth_factor * math.prod(inp.m_f) / math.sqrt(inp.n)


def concentration_term(inp: BoundInputs) -> float:
    return math.sqrt(8.0 * math.log(1.0 / inp.eps_conf) / inp.n)


def generalization_bound(inp: BoundInputs, log_base: float = LOG_BASE) -> float:
    return capacity_term(inp, log_base=log_base) + concentration_term(inp)


@dataclass(frozen=True)
class BoundReport:
    inputs: BoundInputs
    lam: float
    bound: float
    lipschitz_adjusted_bound: float

    def to_dict(self) -> dict:
        doc = asdict(self.inputs)
        doc["m_f"] = list(self.inputs.m_f)
        doc["lambda"] = self.lam
        doc["bound"] = self.bound
        doc["lipschitz_adjusted_bound"] = self.lipschitz_adjusted_bound
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def bound_report(net: nn.Network, data: WindowedDataset, spec: LossSpec, eps_conf: float) -> BoundReport:
    """Bound for ``net`` using its own layer norms and the training inputs of ``data``."""
    if spec.kind is not LossKind.ROBOS:
        raise InvalidParameterError("the bound is defined for the robos loss only")
    x_train = data.x_train
    if x_train.shape[0] == 0:
        raise InvalidParameterError("no training windows")
    inp = BoundInputs(
        a=spec.a,
        B=float(np.max(np.linalg.norm(x_train, axis=1))),
        d=len(net.layers),
        m_f=tuple(nn.frobenius_norms(net)),
        n=int(x_train.shape[0]),
        eps_conf=eps_conf,
    )
    adjusted = capacity_term(inp, lipschitz=spec.lam * spec.a / math.e) + concentration_term(inp)
    return BoundReport(inp, spec.lam, generalization_bound(inp), adjusted)
