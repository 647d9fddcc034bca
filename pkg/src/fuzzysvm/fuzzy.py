"""Gaussian class statistics, fuzzy sample weights and membership probabilities.

Every product of per-feature Gaussians is carried as the sum of its
exponents; with two dozen features a point a few sigma away from a class
centre already underflows double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import BENIGN, MALIGNANT, Dataset
from .errors import NormalizationError, ProbabilityError, StatsError

CLASS_LABELS = (MALIGNANT, BENIGN)

RELATIVE_SIGMA_FLOOR = 1e-6
ABSOLUTE_SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class ClassStats:
    """Per-class feature means and standard deviations.

    Rows follow ``labels``.  ``sigma_floor`` is a per-feature lower bound
    already applied to ``std``.
    """

    labels: tuple[int, ...]
    mean: np.ndarray
    std: np.ndarray
    count: np.ndarray
    sigma_floor: np.ndarray

    def __post_init__(self):
        floor = np.asarray(self.sigma_floor, dtype=float)
        if np.any(floor <= 0):
            raise ValueError("sigma floor must be positive")
        std = np.maximum(np.asarray(self.std, dtype=float), floor)
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "std", std)
        object.__setattr__(self, "count", np.asarray(self.count, dtype=int))
        object.__setattr__(self, "sigma_floor", np.broadcast_to(floor, std.shape[1:]).copy())
        object.__setattr__(self, "labels", tuple(int(k) for k in self.labels))

    @property
    def n_features(self) -> int:
        return self.mean.shape[1]

    def row(self, label: int) -> int:
        try:
            return self.labels.index(int(label))
        except ValueError:
            raise StatsError(int(label)) from None

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "count": self.count.tolist(),
            "sigma_floor": self.sigma_floor.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> ClassStats:
        return cls(
            labels=tuple(payload["labels"]),
            mean=np.asarray(payload["mean"], dtype=float),
            std=np.asarray(payload["std"], dtype=float),
            count=np.asarray(payload["count"], dtype=int),
            sigma_floor=np.asarray(payload["sigma_floor"], dtype=float),
        )


def default_sigma_floor(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    spread = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(X.shape[1])
    return np.maximum(RELATIVE_SIGMA_FLOOR * spread, ABSOLUTE_SIGMA_FLOOR)


def _column_stats(X: np.ndarray, floor: np.ndarray):
    mean = X.mean(axis=0)
    if X.shape[0] < 2:
        return mean, floor.copy()
    return mean, np.maximum(X.std(axis=0, ddof=1), floor)


def class_stats(data: Dataset, sigma_floor=None, labels=CLASS_LABELS) -> ClassStats:
    """Sample mean and (n-1) standard deviation of every feature per class.

    ``sigma_floor`` may be a scalar or per-feature array; by default it is
    1e-6 times each feature's spread over ``data`` (at least 1e-12).
    """
    floor = default_sigma_floor(data.X) if sigma_floor is None else sigma_floor
    floor = np.broadcast_to(np.asarray(floor, dtype=float), (data.n_features,)).copy()
    if np.any(floor <= 0):
        raise ValueError("sigma floor must be positive")
    means, stds, counts = [], [], []
    for label in labels:
        members = data.X[data.y == label]
        if members.shape[0] == 0:
            raise StatsError(label)
        mean, std = _column_stats(members, floor)
        means.append(mean)
        stds.append(std)
        counts.append(members.shape[0])
    return ClassStats(tuple(labels), np.array(means), np.array(stds), np.array(counts), floor)


def log_gaussian_weight(x, stats: ClassStats, k: int):
    """Exponent sum of the Gaussian product for class ``k``.

    ``x`` may be a single point or an (n, p) matrix.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != stats.n_features:
        raise ValueError(
            f"dimension mismatch: stats have {stats.n_features} features, got {x.shape[-1]}"
        )
    r = stats.row(k)
    if stats.count[r] == 0:
        raise StatsError(k)
    z = (x - stats.mean[r]) / stats.std[r]
    with np.errstate(over="ignore"):
        out = -0.5 * np.sum(z * z, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def gaussian_weight(x, stats: ClassStats, k: int):
    return np.exp(log_gaussian_weight(x, stats, k))


# Membership of a point against margin-interior statistics is the same
# Gaussian product; only the population behind the statistics differs.
log_membership = log_gaussian_weight
membership = gaussian_weight


@dataclass(frozen=True)
class WeightVector:
    raw: np.ndarray
    normalized: np.ndarray

    @property
    def total(self) -> float:
        return float(self.normalized.sum())


def normalize_weights(raw) -> WeightVector:
    """Rescale non-negative weights so they sum to their count."""
    raw = np.asarray(raw, dtype=float)
    if np.any(raw < 0) or not np.all(np.isfinite(raw)):
        raise NormalizationError("weights must be finite and non-negative")
    total = raw.sum()
    if total <= 0:
        raise NormalizationError("all weights are zero; class statistics are degenerate")
    return WeightVector(raw.copy(), raw.size * raw / total)


def normalize_log_weights(log_raw) -> WeightVector:
    """Same as ``normalize_weights`` but starting from log-weights.

    The normalised values are formed from log differences, so they stay
    meaningful even when every raw weight underflows.
    """
    log_raw = np.asarray(log_raw, dtype=float)
    if log_raw.size == 0 or not np.any(np.isfinite(log_raw)):
        raise NormalizationError("no finite log-weight to normalise against")
    top = np.max(log_raw)
    shifted = np.exp(log_raw - top)
    normalized = log_raw.size * shifted / shifted.sum()
    return WeightVector(np.exp(log_raw), normalized)


def sample_log_weights(data: Dataset, stats: ClassStats) -> np.ndarray:
    """Log of each sample's Gaussian weight under its own class's statistics."""
    out = np.empty(data.n_samples)
    for label in stats.labels:
        mask = data.y == label
        if np.any(mask):
            out[mask] = log_gaussian_weight(data.X[mask], stats, label)
    return out


def sample_weights(data: Dataset, stats: ClassStats) -> WeightVector:
    return normalize_log_weights(sample_log_weights(data, stats))


def membership_probability(log_a1: float, log_a2: float) -> tuple[float, float]:
    """Membership probabilities of two classes from their log-memberships.

    Only the difference of the logs enters, so simultaneous underflow of
    both memberships cannot turn the ratio into 0/0.
    """
    if math.isnan(log_a1) or math.isnan(log_a2):
        raise ProbabilityError("log-membership is NaN")
    if log_a1 == -math.inf and log_a2 == -math.inf:
        raise ProbabilityError("point is infinitely far from both class populations")
    p1 = float(membership_probabilities(log_a1, log_a2))
    return p1, 1.0 - p1


def membership_probabilities(log_a1, log_a2) -> np.ndarray:
    """Vectorised probability of the first class; NaN where both logs are -inf."""
    log_a1 = np.asarray(log_a1, dtype=float)
    log_a2 = np.asarray(log_a2, dtype=float)
    both_inf = np.isneginf(log_a1) & np.isneginf(log_a2)
    with np.errstate(invalid="ignore", over="ignore"):
        d = np.where(both_inf, 0.0, log_a2 - log_a1)
        e = np.exp(-np.abs(d))
        p1 = np.where(d > 0, e / (1.0 + e), 1.0 / (1.0 + e))
    return np.where(both_inf, np.nan, p1)
