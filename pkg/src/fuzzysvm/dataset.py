"""Loading, feature pruning and fold assignment for the WDBC data."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IngestionError

MALIGNANT = 1
BENIGN = -1

_BASE_FEATURES = (
    "radius",
    "texture",
    "perimeter",
    "area",
    "smoothness",
    "compactness",
    "concavity",
    "concave_points",
    "symmetry",
    "fractal_dimension",
)
WDBC_FEATURE_NAMES = tuple(
    f"{name}_{suffix}" for suffix in ("mean", "se", "worst") for name in _BASE_FEATURES
)

_DIAGNOSIS = {"M": MALIGNANT, "B": BENIGN}


@dataclass(frozen=True)
class Dataset:
    """Labelled feature matrix.

    ``X`` has shape (N, p), ``y`` holds +1 (malignant) / -1 (benign), and
    ``selected_feature_indices`` maps each column of ``X`` back to the
    feature columns of the original file.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    selected_feature_indices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=int)
        if X.ndim != 2:
            raise ValueError("feature matrix must be two-dimensional")
        if X.shape[1] < 1:
            raise ValueError("at least one feature is required")
        if y.shape != (X.shape[0],):
            raise ValueError("one label per instance is required")
        if not np.all(np.isfinite(X)):
            raise ValueError("feature values must be finite")
        if not np.all((y == MALIGNANT) | (y == BENIGN)):
            raise ValueError("labels must be +1 or -1")
        names = tuple(self.feature_names)
        if len(names) != X.shape[1]:
            raise ValueError("one name per feature column is required")
        selected = tuple(int(i) for i in self.selected_feature_indices) or tuple(
            range(X.shape[1])
        )
        if len(selected) != X.shape[1]:
            raise ValueError("one source index per feature column is required")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "selected_feature_indices", selected)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.n_samples

    def subset(self, indices) -> Dataset:
        indices = np.asarray(indices)
        return Dataset(
            self.X[indices],
            self.y[indices],
            self.feature_names,
            self.selected_feature_indices,
        )

    def select_features(self, columns) -> Dataset:
        """Keep the given columns (indices into the current matrix)."""
        columns = list(columns)
        return Dataset(
            self.X[:, columns],
            self.y,
            tuple(self.feature_names[c] for c in columns),
            tuple(self.selected_feature_indices[c] for c in columns),
        )

    def to_csv(self) -> str:
        """Canonical CSV: header, then label followed by the selected features."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label", *self.feature_names])
        for row, label in zip(self.X, self.y):
            writer.writerow([int(label), *(repr(float(v)) for v in row)])
        return buf.getvalue()


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_wdbc(path) -> Dataset:
    """Read a WDBC file (``id, diagnosis, f1..f30`` per row).

    A single header row is skipped when its first field is not numeric.
    Diagnosis ``M`` maps to +1 and ``B`` to -1; the id column is dropped.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))

    n_cols = 2 + len(WDBC_FEATURE_NAMES)
    features, labels = [], []
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if lineno == 1 and not _is_number(row[0].strip()):
            continue
        if len(row) != n_cols:
            raise IngestionError(f"expected {n_cols} fields, found {len(row)}", lineno)
        diagnosis = row[1].strip().upper()
        if diagnosis not in _DIAGNOSIS:
            raise IngestionError(f"unknown diagnosis {row[1].strip()!r}", lineno)
        try:
            values = [float(cell) for cell in row[2:]]
        except ValueError as exc:
            raise IngestionError(f"unparseable number ({exc})", lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise IngestionError("non-finite feature value", lineno)
        features.append(values)
        labels.append(_DIAGNOSIS[diagnosis])

    if not features:
        raise IngestionError(f"no data rows in {path}")
    return Dataset(np.array(features), np.array(labels), WDBC_FEATURE_NAMES)


def correlation_matrix(X: np.ndarray) -> np.ndarray:
    """Pearson correlation of the columns of ``X``.

    Zero-variance columns correlate 1 with each other and 0 with everything
    else, so a constant column is kept only if it is the first one seen.
    """
    X = np.asarray(X, dtype=float)
    centered = X - X.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    constant = norms == 0
    safe = np.where(constant, 1.0, norms)
    corr = (centered.T @ centered) / np.outer(safe, safe)
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    corr[np.ix_(constant, constant)] = 1.0
    np.fill_diagonal(corr, 1.0)
    return np.clip(corr, -1.0, 1.0)


def prune_correlated(data: Dataset, threshold: float = 0.95) -> Dataset:
    """Greedy correlation pruning in column order.

    A column is dropped when its absolute correlation with any column
    already kept exceeds ``threshold``.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    if data.n_samples == 0:
        raise ValueError("cannot prune an empty dataset")
    corr = np.abs(correlation_matrix(data.X))
    kept: list[int] = []
    for j in range(data.n_features):
        if all(corr[j, k] <= threshold for k in kept):
            kept.append(j)
    return data.select_features(kept)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    fold_assignment: tuple[int, ...]

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.fold_assignment) == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.fold_assignment) != fold)

    def fold_sizes(self) -> list[int]:
        return np.bincount(self.fold_assignment, minlength=self.k).tolist()


def make_folds(data, k: int, seed: int) -> FoldPlan:
    """Deal a seeded random permutation round-robin into ``k`` folds.

    ``data`` may be a Dataset or a sample count.  Folds are not stratified.
    """
    n = data if isinstance(data, (int, np.integer)) else len(data)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of instances ({n})")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    perm = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=int)
    assignment[perm] = np.arange(n) % k
    return FoldPlan(k, int(seed), tuple(int(a) for a in assignment))
