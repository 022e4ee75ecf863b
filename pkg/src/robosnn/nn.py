"""Dense feedforward regression network in plain numpy.

Hidden layers use ReLU and the output layer is linear. Gradients are computed
by hand-written reverse mode; :func:`backward` returns d(upstream * yhat)/dtheta
so callers pass ``upstream = dL/dyhat``.
"""

from __future__ import annotations

import contextlib
import contextvars
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError

RELU = "relu"
IDENTITY = "identity"
_ACTIVATIONS = (RELU, IDENTITY)

CHECKPOINT_FORMAT = "robosnn-network"
CHECKPOINT_VERSION = 1


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    activation: str = RELU

    def __post_init__(self):
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=float))
        self.bias = np.atleast_1d(np.asarray(self.bias, dtype=float))
        if self.activation not in _ACTIVATIONS:
            raise InvalidParameterError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise DimensionMismatchError(
                f"weights {self.weights.shape} and bias {self.bias.shape} are inconsistent"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise InvalidParameterError("layer parameters must be finite")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class Network:
    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise InvalidParameterError("a network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise DimensionMismatchError(
                    f"layer output {prev.out_dim} does not feed layer input {nxt.in_dim}"
                )
        if self.layers[-1].out_dim != 1:
            raise DimensionMismatchError("the output layer must have a single unit")

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def dims(self) -> list[int]:
        return [self.input_dim] + [layer.out_dim for layer in self.layers]

    @property
    def n_params(self) -> int:
        return sum(layer.weights.size + layer.bias.size for layer in self.layers)

    def copy(self) -> Network:
        return Network([DenseLayer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers])

    def parameters(self) -> list[np.ndarray]:
        """Flat list [W0, b0, W1, b1, ...] of the live parameter arrays."""
        out = []
        for layer in self.layers:
            out.extend((layer.weights, layer.bias))
        return out


@dataclass
class GradientBuffer:
    """Per-layer gradients, shaped like the network's weights and biases."""

    weights: list[np.ndarray] = field(default_factory=list)
    biases: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros_like(cls, net: Network) -> GradientBuffer:
        return cls(
            [np.zeros_like(l.weights) for l in net.layers],
            [np.zeros_like(l.bias) for l in net.layers],
        )

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def check_congruent(self, net: Network) -> None:
        if len(self.weights) != len(net.layers) or len(self.biases) != len(net.layers):
            raise DimensionMismatchError("gradient buffer has the wrong number of layers")
        for g, p in zip(self.arrays(), net.parameters()):
            if g.shape != p.shape:
                raise DimensionMismatchError(f"gradient shape {g.shape} != parameter shape {p.shape}")


# ---------------------------------------------------------------------------
# operation counting

@dataclass
class OpCounter:
    """Multiply-add and loss-evaluation tallies, for checking cost scaling."""

    forward_macs: int = 0
    backward_macs: int = 0
    loss_evals: int = 0

    @property
    def total_macs(self) -> int:
        return self.forward_macs + self.backward_macs


_COUNTER: contextvars.ContextVar[OpCounter | None] = contextvars.ContextVar("op_counter", default=None)


@contextlib.contextmanager
def count_ops():
    """Tally work done by forward/backward passes inside the ``with`` block."""
    counter = OpCounter()
    token = _COUNTER.set(counter)
    try:
        yield counter
    finally:
        _COUNTER.reset(token)


def _tally(attr: str, amount: int) -> None:
    counter = _COUNTER.get()
    if counter is not None:
        setattr(counter, attr, getattr(counter, attr) + amount)


def record_loss_evals(n: int) -> None:
    _tally("loss_evals", n)


# ---------------------------------------------------------------------------
# forward / backward

def relu(z):
    return np.maximum(z, 0.0)


def _check_input(net: Network, X: np.ndarray) -> np.ndarray:
    if X.shape[-1] != net.input_dim:
        raise DimensionMismatchError(f"expected inputs of length {net.input_dim}, got {X.shape[-1]}")
    return X


def _forward_cache(net: Network, X: np.ndarray) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
    acts = [X]
    pre = []
    h = X
    macs = 0
    for layer in net.layers:
        z = h @ layer.weights.T + layer.bias
        macs += layer.weights.size
        pre.append(z)
        h = relu(z) if layer.activation == RELU else z
        acts.append(h)
    _tally("forward_macs", macs * X.shape[0])
    return h[:, 0], pre, acts


def forward_batch(net: Network, X) -> np.ndarray:
    """Predictions for every row of ``X`` (shape (n, input_dim))."""
    X = _check_input(net, np.atleast_2d(np.asarray(X, dtype=float)))
    return _forward_cache(net, X)[0]


def forward(net: Network, x) -> float:
    """Prediction for a single input vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatchError(f"expected a vector, got shape {x.shape}")
    return float(forward_batch(net, x[None, :])[0])


def backward_batch(net: Network, X, upstream) -> GradientBuffer:
    """Sum over rows of d(upstream_i * f(x_i))/dtheta.

    ``upstream`` has one entry per row of ``X``. ReLU has derivative 0 at 0.
    """
    upstream = np.asarray(upstream, dtype=float).reshape(-1)
    return forward_and_backward(net, X, lambda _: upstream)[1]


def forward_and_backward(net: Network, X, upstream_fn) -> tuple[np.ndarray, GradientBuffer]:
    """One forward pass, then backprop of ``upstream_fn(yhat)``.

    Returns the predictions and the gradient buffer, sharing the activations
    between both passes.
    """
    X = _check_input(net, np.atleast_2d(np.asarray(X, dtype=float)))
    yhat, pre, acts = _forward_cache(net, X)
    upstream = np.asarray(upstream_fn(yhat), dtype=float).reshape(-1)
    if upstream.shape[0] != X.shape[0]:
        raise DimensionMismatchError(f"{upstream.shape[0]} upstream values for {X.shape[0]} inputs")
    grads = GradientBuffer([None] * len(net.layers), [None] * len(net.layers))
    delta = upstream[:, None]  # dL/d(output of current layer)
    macs = 0
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        if layer.activation == RELU:
            delta = delta * (pre[i] > 0.0)
        grads.weights[i] = delta.T @ acts[i]
        grads.biases[i] = delta.sum(axis=0)
        macs += layer.weights.size
        if i > 0:
            delta = delta @ layer.weights
            macs += layer.weights.size
    _tally("backward_macs", macs * X.shape[0])
    return yhat, grads


def backward(net: Network, x, upstream: float) -> GradientBuffer:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatchError(f"expected a vector, got shape {x.shape}")
    return backward_batch(net, x[None, :], [upstream])


# ---------------------------------------------------------------------------
# construction and inspection

def init(dims, seed: int) -> Network:
    """He-uniform weights with bound sqrt(6 / fan_in), zero biases.

    ``dims`` lists layer widths from input to output, e.g. ``[30, 64, 64, 1]``.
    """
    dims = list(dims)
    if len(dims) < 2 or any(int(d) != d or d < 1 for d in dims):
        raise InvalidParameterError(f"dims must list at least two positive integers, got {dims!r}")
    rng = np.random.default_rng(seed)
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        bound = math.sqrt(6.0 / fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        act = IDENTITY if i == len(dims) - 2 else RELU
        layers.append(DenseLayer(w, np.zeros(fan_out), act))
    return Network(layers)


def architecture(seq_size: int, dense_layers: int, units: int) -> list[int]:
    """Layer widths for ``dense_layers`` hidden layers of ``units`` each."""
    return [seq_size] + [units] * dense_layers + [1]


def frobenius_norms(net: Network) -> list[float]:
    return [float(np.linalg.norm(layer.weights, "fro")) for layer in net.layers]


def squared_norm(net: Network) -> float:
    """||theta||^2 over all weights and biases."""
    return float(sum(np.sum(p * p) for p in net.parameters()))


# ---------------------------------------------------------------------------
# serialization

def to_dict(net: Network, meta: dict | None = None) -> dict:
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "dims": net.dims,
        "activations": [l.activation for l in net.layers],
        "weights": [l.weights.tolist() for l in net.layers],
        "biases": [l.bias.tolist() for l in net.layers],
    }
    if meta is not None:
        doc["meta"] = meta
    return doc


def from_dict(doc: dict) -> Network:
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise InvalidParameterError("not a network checkpoint")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise InvalidParameterError(f"unsupported checkpoint version {doc.get('version')!r}")
    layers = [
        DenseLayer(np.array(w, dtype=float).reshape(out_d, in_d), np.array(b, dtype=float), act)
        for w, b, act, in_d, out_d in zip(
            doc["weights"], doc["biases"], doc["activations"], doc["dims"], doc["dims"][1:]
        )
    ]
    net = Network(layers)
    if net.dims != list(doc["dims"]):
        raise DimensionMismatchError("checkpoint dims do not match its weight arrays")
    return net


def dumps(net: Network, meta: dict | None = None) -> str:
    return json.dumps(to_dict(net, meta), indent=1, sort_keys=True) + "\n"


def loads(text: str) -> Network:
    return from_dict(json.loads(text))
