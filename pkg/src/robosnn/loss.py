"""Per-sample regression losses and their derivatives with respect to the residual.

All functions take the signed residual ``r = y - yhat`` and accept either a
Python float or a numpy array. Scalars in give floats out.

Five kinds are supported::

    square    r**2
    absolute  |r|
    huber     r**2 / 2                       if |r| <= delta
              delta * (|r| - delta / 2)      otherwise
    logcosh   log(cosh(r))
    robos     lam * (1 - (g + 1) * exp(-g)),  g = a * sqrt(r**2 + eps) - a * sqrt(eps)

``robos`` is bounded above by ``lam``, smooth at the origin thanks to ``eps``
and non-convex. Its derivative is bounded by ``lam * a / e``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NonFiniteInputError

__all__ = [
    "LossKind",
    "LossSpec",
    "loss_value",
    "loss_grad",
    "loss_profile",
    "profile_to_csv",
]

# (g + 1) * exp(-g) underflows long before this; treat it as exactly zero.
_EXP_CUTOFF = 700.0
# Below this g the closed form loses digits to cancellation; use the series.
_SERIES_CUTOFF = 1e-2
_LOG2 = math.log(2.0)


class LossKind(str, enum.Enum):
    SQUARE = "square"
    ABSOLUTE = "absolute"
    HUBER = "huber"
    LOGCOSH = "logcosh"
    ROBOS = "robos"


_ALIASES = {
    "mse": LossKind.SQUARE,
    "square": LossKind.SQUARE,
    "mae": LossKind.ABSOLUTE,
    "absolute": LossKind.ABSOLUTE,
    "huber": LossKind.HUBER,
    "logcosh": LossKind.LOGCOSH,
    "log-cosh": LossKind.LOGCOSH,
    "robos": LossKind.ROBOS,
    "robos-nn": LossKind.ROBOS,
}

ROBOS_DEFAULTS = {"a": 1.0, "lam": 0.253, "eps": 0.028}
HUBER_DEFAULT_DELTA = 1.0


def _positive(name: str, value) -> float:
    if value is None:
        raise InvalidParameterError(f"{name} is required")
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise InvalidParameterError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class LossSpec:
    """Which loss to use plus the parameters that kind needs.

    Parameters that do not apply to ``kind`` are dropped to ``None`` so two
    specs compare equal exactly when they evaluate identically.
    """

    kind: LossKind
    a: float | None = None
    lam: float | None = None
    eps: float | None = None
    delta: float | None = None

    def __post_init__(self):
        kind = self.kind
        if not isinstance(kind, LossKind):
            try:
                kind = _ALIASES[str(kind).lower()]
            except KeyError:
                raise InvalidParameterError(f"unknown loss kind {self.kind!r}") from None
            object.__setattr__(self, "kind", kind)
        if kind is LossKind.ROBOS:
            object.__setattr__(self, "a", _positive("a", self.a))
            object.__setattr__(self, "lam", _positive("lambda", self.lam))
            object.__setattr__(self, "eps", _positive("eps", self.eps))
            object.__setattr__(self, "delta", None)
        elif kind is LossKind.HUBER:
            object.__setattr__(self, "delta", _positive("delta", self.delta))
            for name in ("a", "lam", "eps"):
                object.__setattr__(self, name, None)
        else:
            for name in ("a", "lam", "eps", "delta"):
                object.__setattr__(self, name, None)

    @classmethod
    def square(cls) -> LossSpec:
        return cls(LossKind.SQUARE)

    @classmethod
    def absolute(cls) -> LossSpec:
        return cls(LossKind.ABSOLUTE)

    @classmethod
    def huber(cls, delta: float = HUBER_DEFAULT_DELTA) -> LossSpec:
        return cls(LossKind.HUBER, delta=delta)

    @classmethod
    def logcosh(cls) -> LossSpec:
        return cls(LossKind.LOGCOSH)

    @classmethod
    def robos(cls, a: float = ROBOS_DEFAULTS["a"], lam: float = ROBOS_DEFAULTS["lam"],
              eps: float = ROBOS_DEFAULTS["eps"]) -> LossSpec:
        return cls(LossKind.ROBOS, a=a, lam=lam, eps=eps)

    @classmethod
    def parse(cls, text: str) -> LossSpec:
        """Parse ``"kind"`` or ``"kind:key=value,key=value"``.

        >>> LossSpec.parse("robos:a=2,lambda=0.5,eps=0.02").a
        2.0
        >>> LossSpec.parse("mse").kind.value
        'square'
        """
        name, _, rest = text.strip().partition(":")
        try:
            kind = _ALIASES[name.strip().lower()]
        except KeyError:
            raise InvalidParameterError(f"unknown loss kind {name!r}") from None
        params: dict[str, float] = {}
        if kind is LossKind.ROBOS:
            params.update(ROBOS_DEFAULTS)
        elif kind is LossKind.HUBER:
            params["delta"] = HUBER_DEFAULT_DELTA
        for item in filter(None, (p.strip() for p in rest.split(","))):
            key, sep, value = item.partition("=")
            key = key.strip().lower()
            if key == "lambda":
                key = "lam"
            if not sep or key not in params:
                raise InvalidParameterError(f"bad parameter {item!r} for loss {kind.value}")
            try:
                params[key] = float(value)
            except ValueError:
                raise InvalidParameterError(f"bad value in {item!r}") from None
        return cls(kind, **params)

    def to_string(self) -> str:
        if self.kind is LossKind.ROBOS:
            return f"robos:a={self.a!r},lambda={self.lam!r},eps={self.eps!r}"
        if self.kind is LossKind.HUBER:
            return f"huber:delta={self.delta!r}"
        return self.kind.value

    @property
    def name(self) -> str:
        """Short column label used in result tables."""
        return {
            LossKind.SQUARE: "MSE",
            LossKind.ABSOLUTE: "MAE",
            LossKind.HUBER: "Huber",
            LossKind.LOGCOSH: "Logcosh",
            LossKind.ROBOS: "RoBoS",
        }[self.kind]

    def __str__(self) -> str:
        return self.to_string()


def _as_residual(r):
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError("residual contains NaN or Inf")
    return arr


def _robos_g(spec: LossSpec, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (g, sqrt(r**2 + eps)).

    sqrt(r^2+eps) - sqrt(eps) is rewritten as r^2 / (sqrt(r^2+eps) + sqrt(eps))
    to avoid cancellation near the origin.
    """
    root = np.hypot(r, math.sqrt(spec.eps))
    with np.errstate(over="ignore"):
        g = spec.a * r * (r / (root + math.sqrt(spec.eps)))
    return g, root


def _one_minus_g1_expg(g: np.ndarray) -> np.ndarray:
    """1 - (g + 1) * exp(-g) for g >= 0, accurate at both ends."""
    out = np.empty_like(g)
    small = g < _SERIES_CUTOFF
    big = g > _EXP_CUTOFF
    mid = ~(small | big)
    gs = g[small]
    # sum_{n>=2} (-1)^n (n-1)/n! g^n, truncated at n=6
    out[small] = gs * gs * (0.5 + gs * (-1.0 / 3.0 + gs * (1.0 / 8.0 + gs * (-1.0 / 30.0 + gs / 144.0))))
    gm = g[mid]
    out[mid] = -np.expm1(-gm) - gm * np.exp(-gm)
    out[big] = 1.0
    return out


def _unwrap(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def loss_value(spec: LossSpec, r):
    """Per-sample loss at residual ``r`` (no averaging)."""
    arr = _as_residual(r)
    kind = spec.kind
    if kind is LossKind.SQUARE:
        out = arr * arr
    elif kind is LossKind.ABSOLUTE:
        out = np.abs(arr)
    elif kind is LossKind.HUBER:
        u = np.abs(arr)
        d = spec.delta
        out = np.where(u <= d, 0.5 * arr * arr, d * (u - 0.5 * d))
    elif kind is LossKind.LOGCOSH:
        u = np.abs(arr)
        # log cosh u = u + log1p(exp(-2u)) - log 2, overflow-free
        out = u + np.log1p(np.exp(-2.0 * u)) - _LOG2
        out = np.maximum(out, 0.0)
    else:
        g, _ = _robos_g(spec, np.atleast_1d(arr))
        # the exact value is always below lam; round toward zero when it rounds up to lam
        out = np.minimum(spec.lam * _one_minus_g1_expg(g), np.nextafter(spec.lam, 0.0))
        out = out.reshape(arr.shape)
    return _unwrap(np.asarray(out, dtype=float), r)


def loss_grad(spec: LossSpec, r):
    """Derivative of :func:`loss_value` with respect to the signed residual.

    The absolute loss uses the subgradient 0 at r = 0.
    """
    arr = _as_residual(r)
    kind = spec.kind
    if kind is LossKind.SQUARE:
        out = 2.0 * arr
    elif kind is LossKind.ABSOLUTE:
        out = np.sign(arr)
    elif kind is LossKind.HUBER:
        out = np.clip(arr, -spec.delta, spec.delta)
    elif kind is LossKind.LOGCOSH:
        out = np.tanh(arr)
    else:
        g, root = _robos_g(spec, arr)
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            out = spec.lam * spec.a * arr * g * np.exp(-np.minimum(g, _EXP_CUTOFF)) / root
        out = np.where(g > _EXP_CUTOFF, 0.0, out)
    return _unwrap(np.asarray(out, dtype=float), r)


def loss_profile(spec: LossSpec, r_min: float, r_max: float, n_points: int) -> list[tuple[float, float, float]]:
    """Evaluate (r, value, grad) on an evenly spaced grid including both endpoints."""
    if not (math.isfinite(r_min) and math.isfinite(r_max)) or not r_min < r_max:
        raise InvalidParameterError(f"invalid range [{r_min}, {r_max}]")
    if int(n_points) != n_points or n_points < 2:
        raise InvalidParameterError(f"n_points must be an integer >= 2, got {n_points!r}")
    grid = np.linspace(r_min, r_max, int(n_points))
    values = loss_value(spec, grid)
    grads = loss_grad(spec, grid)
    return [(float(r), float(v), float(g)) for r, v, g in zip(grid, values, grads)]


def profile_to_csv(profile, header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    lines.append("r,value,grad")
    lines.extend(f"{r!r},{v!r},{g!r}" for r, v, g in profile)
    return "\n".join(lines) + "\n"
