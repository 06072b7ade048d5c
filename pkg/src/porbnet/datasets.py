"""Dataset loading, normalization, and train/test splitting.

Inputs are two-column numeric CSV files (x, y), header optional. Normalization
maps x onto [0, 1] and y onto a zero-mean series with max |y| <= 1; the affine
statistics are retained so predictions can be mapped back.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np


class DataFormatError(ValueError):
    """Raised when a CSV file cannot be parsed into two numeric columns."""


@dataclass(frozen=True)
class Normalization:
    x_min: float
    x_max: float
    y_mean: float
    y_scale: float


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray
    normalization: Normalization | None = None
    train_idx: np.ndarray | None = None
    test_idx: np.ndarray | None = None
    name: str = "data"

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.shape != self.y.shape or self.x.ndim != 1 or self.x.size == 0:
            raise ValueError("x and y must be matching nonempty 1-D arrays")

    def __len__(self) -> int:
        return self.x.size

    @property
    def x_train(self) -> np.ndarray:
        return self.x if self.train_idx is None else self.x[self.train_idx]

    @property
    def y_train(self) -> np.ndarray:
        return self.y if self.train_idx is None else self.y[self.train_idx]

    @property
    def x_test(self) -> np.ndarray:
        return np.zeros(0) if self.test_idx is None else self.x[self.test_idx]

    @property
    def y_test(self) -> np.ndarray:
        return np.zeros(0) if self.test_idx is None else self.y[self.test_idx]


def load_csv(path, name: str | None = None) -> Dataset:
    """Parse a two-column numeric CSV; a single header row is skipped."""
    xs, ys = [], []
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    start = 0
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        start = 1  # header row
    if start == len(rows):
        raise DataFormatError(f"{path}: no data rows")
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        if len(row) < 2:
            raise DataFormatError(f"{path}: line {lineno}: expected two columns, got {len(row)}")
        try:
            xs.append(float(row[0]))
            ys.append(float(row[1]))
        except ValueError:
            raise DataFormatError(f"{path}: line {lineno}: non-numeric value in {row[:2]}")
    if not xs:
        raise DataFormatError(f"{path}: no data rows")
    return Dataset(np.array(xs), np.array(ys), name=name or str(path))


def normalize(data: Dataset, train_only_stats: bool = False) -> Dataset:
    """Affine-map x to [0, 1] and y to zero mean with max |y| <= 1.

    Statistics default to the full dataset; with train_only_stats=True and a
    split present, they come from the training portion only.
    """
    ref_x = data.x_train if (train_only_stats and data.train_idx is not None) else data.x
    ref_y = data.y_train if (train_only_stats and data.train_idx is not None) else data.y
    x_min, x_max = float(ref_x.min()), float(ref_x.max())
    if x_max <= x_min:
        raise ValueError("cannot normalize: degenerate x range")
    y_mean = float(ref_y.mean())
    y_scale = float(np.max(np.abs(ref_y - y_mean)))
    if y_scale == 0.0:
        y_scale = 1.0  # constant y: keep it centered, scale is arbitrary
    norm = Normalization(x_min, x_max, y_mean, y_scale)
    return replace(
        data,
        x=(data.x - x_min) / (x_max - x_min),
        y=(data.y - y_mean) / y_scale,
        normalization=norm,
    )


def denormalize(data: Dataset) -> Dataset:
    """Invert normalize(); a no-op error if no record is attached."""
    norm = data.normalization
    if norm is None:
        raise ValueError("dataset carries no normalization record")
    return replace(
        data,
        x=data.x * (norm.x_max - norm.x_min) + norm.x_min,
        y=data.y * norm.y_scale + norm.y_mean,
        normalization=None,
    )


def split(data: Dataset, train_fraction: float, seed: int) -> Dataset:
    """Uniformly random disjoint-exhaustive train/test index partition."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(data))
    n_train = int(round(train_fraction * len(data)))
    n_train = min(max(n_train, 1), len(data) - 1)
    return replace(
        data,
        train_idx=np.sort(perm[:n_train]),
        test_idx=np.sort(perm[n_train:]),
    )
