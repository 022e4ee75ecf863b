"""Series ingestion, outlier injection and sliding-window datasets.

The pipeline is ``ingest_csv -> inject_outliers -> window_and_split``. Outliers
are added to the raw series, so a corrupted point shows up both as a target and
inside later input windows. Only the part of the series that training windows
touch is ever modified, and normalization statistics come from that part alone.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, InvalidParameterError

log = logging.getLogger(__name__)

STD_FLOOR = 1e-8
DEFAULT_TRAIN_FRAC = 0.8
CONTAMINATION_LEVELS = (0.0, 0.05, 0.10, 0.20, 0.30)


@dataclass
class Series:
    values: np.ndarray
    name: str = "series"
    dropped_count: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass
class WindowedDataset:
    """Normalized input windows and next-step targets, split chronologically.

    Rows ``[:split_index]`` are training windows and the rest are test windows.
    ``train_values`` keeps the raw (possibly contaminated) training region in
    original units for the MASE scale.
    """

    inputs: np.ndarray
    targets: np.ndarray
    split_index: int
    norm_mean: float = 0.0
    norm_std: float = 1.0
    train_values: np.ndarray | None = None
    name: str = "series"

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.targets = np.asarray(self.targets, dtype=float).reshape(-1)
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise DataError(f"{self.inputs.shape[0]} inputs but {self.targets.shape[0]} targets")
        if not 0 <= self.split_index <= len(self.targets):
            raise DataError(f"split index {self.split_index} out of range")

    def __len__(self) -> int:
        return self.targets.shape[0]

    @property
    def seq_size(self) -> int:
        return self.inputs.shape[1]

    @property
    def x_train(self) -> np.ndarray:
        return self.inputs[: self.split_index]

    @property
    def y_train(self) -> np.ndarray:
        return self.targets[: self.split_index]

    @property
    def x_test(self) -> np.ndarray:
        return self.inputs[self.split_index:]

    @property
    def y_test(self) -> np.ndarray:
        return self.targets[self.split_index:]


@dataclass(frozen=True)
class ContaminationSpec:
    """Fraction of training-region points to corrupt and how hard.

    Magnitudes are in units of the clean training-region standard deviation.
    """

    fraction: float = 0.0
    magnitude_lo: float = 3.0
    magnitude_hi: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.fraction < 0.5):
            raise InvalidParameterError(f"contamination fraction must be in [0, 0.5), got {self.fraction!r}")
        if not (0.0 < self.magnitude_lo <= self.magnitude_hi) or not math.isfinite(self.magnitude_hi):
            raise InvalidParameterError(
                f"need 0 < magnitude_lo <= magnitude_hi, got {self.magnitude_lo!r}, {self.magnitude_hi!r}"
            )


# ---------------------------------------------------------------------------
# ingestion

def _to_float(text: str) -> float | None:
    try:
        v = float(text.strip())
    except (ValueError, AttributeError):
        return None
    return v if math.isfinite(v) else None


def ingest_csv(path, value_column: str | int | None = None, min_length: int = 2, name: str | None = None) -> Series:
    """Read one numeric column from a CSV file, in file order.

    ``value_column`` is a header name or a 0-based index; by default the last
    column is used, which covers both single-column and (timestamp, value)
    layouts. A header row is detected when the first row's value cell is not
    numeric. Rows whose value is blank or unparseable are dropped and counted.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [row for row in csv.reader(fh)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    # Trailing fully-empty lines are not data rows.
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise DataError(f"{path} is empty")

    first = rows[0]
    if isinstance(value_column, str) and not value_column.lstrip("-").isdigit():
        header = [c.strip() for c in first]
        if value_column not in header:
            raise DataError(f"column {value_column!r} not found in {path} (columns: {header})")
        col = header.index(value_column)
        body = rows[1:]
    else:
        col = -1 if value_column is None else int(value_column)
        try:
            has_header = _to_float(first[col]) is None
        except IndexError:
            has_header = True
        if has_header and first and not any(c.strip() for c in first):
            has_header = False  # leading blank row, not a header
        body = rows[1:] if has_header else rows

    values = []
    dropped = 0
    for row in body:
        try:
            v = _to_float(row[col])
        except IndexError:
            v = None
        if v is None:
            dropped += 1
        else:
            values.append(v)
    if dropped:
        log.info("dropped %d unusable rows from %s", dropped, path)
    if len(values) < min_length:
        raise DataError(f"{path} has {len(values)} usable values, need at least {min_length}")
    return Series(np.array(values), name=name or path.stem, dropped_count=dropped)


def write_series_csv(series: Series, path, header: str | None = None) -> None:
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    lines.append("value")
    lines.extend(repr(float(v)) for v in series.values)
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# splitting geometry

def n_windows(n_values: int, seq_size: int) -> int:
    return n_values - seq_size


def split_point(n_values: int, seq_size: int, train_frac: float = DEFAULT_TRAIN_FRAC) -> int:
    """Number of training windows: floor(train_frac * #windows)."""
    return int(math.floor(train_frac * n_windows(n_values, seq_size)))


def train_region_length(n_values: int, seq_size: int, train_frac: float = DEFAULT_TRAIN_FRAC) -> int:
    """How many leading series points the training windows read (inputs and targets)."""
    return seq_size + split_point(n_values, seq_size, train_frac)


# ---------------------------------------------------------------------------
# contamination

def outlier_indices(n_train: int, spec: ContaminationSpec) -> tuple[np.ndarray, np.ndarray]:
    """Positions in ``[0, n_train)`` to corrupt and the signed sigma-multipliers to add."""
    count = int(math.floor(spec.fraction * n_train))
    rng = np.random.default_rng(spec.seed)
    idx = np.sort(rng.choice(n_train, size=count, replace=False)) if count else np.empty(0, dtype=int)
    signs = rng.choice(np.array([-1.0, 1.0]), size=count)
    mags = rng.uniform(spec.magnitude_lo, spec.magnitude_hi, size=count)
    return idx, signs * mags


def inject_outliers(series: Series, spec: ContaminationSpec, n_train: int) -> Series:
    """Add sign-symmetric spikes to ``floor(fraction * n_train)`` distinct points.

    ``n_train`` is the length of the leading region that will become training
    data (see :func:`train_region_length`); points after it are never touched.
    Each chosen point moves by ``s * k * sigma`` with ``s`` = +/-1, ``k`` drawn
    uniformly from the magnitude range and ``sigma`` the standard deviation of
    the clean training region.
    """
    if not 0 < n_train <= len(series):
        raise InvalidParameterError(f"n_train must be in [1, {len(series)}], got {n_train}")
    values = series.values.copy()
    idx, shifts = outlier_indices(n_train, spec)
    if idx.size:
        sigma = float(np.std(series.values[:n_train]))
        values[idx] += shifts * sigma
    return Series(values, name=series.name, dropped_count=series.dropped_count)


# ---------------------------------------------------------------------------
# windowing

def window_and_split(series: Series, seq_size: int, train_frac: float = DEFAULT_TRAIN_FRAC) -> WindowedDataset:
    """Sliding windows of ``seq_size`` inputs with the next value as target.

    The first ``floor(train_frac * #windows)`` windows are training data. The
    z-score statistics are fitted on the series points those windows cover.
    """
    values = series.values
    if seq_size < 1:
        raise InvalidParameterError(f"seq_size must be positive, got {seq_size}")
    if len(values) <= seq_size + 1:
        raise DataError(f"series of length {len(values)} is too short for seq_size={seq_size}")
    if not 0.0 < train_frac < 1.0:
        raise InvalidParameterError(f"train_frac must be in (0, 1), got {train_frac}")
    split = split_point(len(values), seq_size, train_frac)
    if split < 1:
        raise DataError("no training windows; the series is too short")
    region = values[: seq_size + split]
    mean = float(np.mean(region))
    std = max(float(np.std(region)), STD_FLOOR)
    z = (values - mean) / std
    inputs = np.lib.stride_tricks.sliding_window_view(z[:-1], seq_size).copy()
    targets = z[seq_size:].copy()
    return WindowedDataset(inputs, targets, split, mean, std, region.copy(), series.name)


def normalize(d: WindowedDataset, y):
    return (np.asarray(y, dtype=float) - d.norm_mean) / d.norm_std


def denormalize(d: WindowedDataset, yhat):
    out = np.asarray(yhat, dtype=float) * d.norm_std + d.norm_mean
    return float(out) if out.ndim == 0 else out


def validation_split(n_train: int, val_frac: float = 0.1) -> int:
    """Index where the chronological validation tail of the training windows starts."""
    n_val = max(1, int(math.floor(val_frac * n_train)))
    if n_train - n_val < 1:
        raise DataError(f"{n_train} training windows cannot spare a validation tail")
    return n_train - n_val


# ---------------------------------------------------------------------------
# synthetic data

def ar1_series(n: int, phi: float = 0.8, sigma: float = 1.0, mean: float = 0.0, seed: int = 0,
               burn_in: int = 100) -> Series:
    """Stationary AR(1) process ``x_t = mean + phi (x_{t-1} - mean) + N(0, sigma^2)``."""
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=n + burn_in)
    x = np.empty(n + burn_in)
    x[0] = noise[0] / math.sqrt(max(1e-12, 1.0 - phi * phi))
    for t in range(1, n + burn_in):
        x[t] = phi * x[t - 1] + noise[t]
    return Series(x[burn_in:] + mean, name=f"ar1_phi{phi}")
