"""Two-phase probabilistic fuzzy SVM with abstention, plus its baselines.

Phase one trains an SVM whose slack costs are the normalised Gaussian
weights of the training points, so that points far from their class centre
barely constrain the hyperplane and the margin widens around them.  Phase
two labels points that fall inside that margin by comparing Gaussian
memberships built from the margin-interior training points, and abstains
when neither class is probable enough.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import svm as svm_core
from .dataset import BENIGN, MALIGNANT, Dataset
from .errors import ModelFormatError
from .fuzzy import (
    CLASS_LABELS,
    ClassStats,
    WeightVector,
    class_stats,
    default_sigma_floor,
    log_membership,
    membership_probabilities,
    normalize_weights,
    sample_weights,
)

log = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
DEFAULT_THRESHOLD = 0.9

# Probabilities within this distance below the threshold still count as
# reaching it; odds of exactly 9:1 evaluate to 0.8999999999999999.
BOUNDARY_EPS = 1e-12

_MIN_COST = np.finfo(float).tiny


def meets_threshold(p, threshold):
    return p >= threshold - BOUNDARY_EPS


class Outcome(enum.Enum):
    DEFINITE = "definite"
    PROBABILISTIC = "probabilistic"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class Prediction:
    """Result of classifying one point.

    ``label`` is None for undetermined points.  ``probability`` is the
    probability of ``label`` (1.0 for definite outcomes); ``p_malignant`` is
    always filled in.
    """

    outcome: Outcome
    label: int | None
    probability: float
    p_malignant: float
    decision_value: float
    in_margin: bool
    diagnostic: str | None = None

    @property
    def is_undetermined(self) -> bool:
        return self.outcome is Outcome.UNDETERMINED


@dataclass(frozen=True)
class PfsvmModel:
    svm: svm_core.SvmModel
    marginal_stats: ClassStats
    fallback_stats: ClassStats
    threshold: float = DEFAULT_THRESHOLD
    malignant_cost_multiplier: float = 1.0
    base_cost: float = 1.0
    marginal_counts: tuple[int, ...] = ()
    weight_total: float = float("nan")
    warnings: tuple[str, ...] = ()
    feature_names: tuple[str, ...] = ()
    selected_feature_indices: tuple[int, ...] = ()
    weights: WeightVector | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not 0.5 < self.threshold <= 1:
            raise ValueError("threshold must lie in (0.5, 1]")
        if self.malignant_cost_multiplier < 1:
            raise ValueError("malignant cost multiplier must be at least 1")

    def to_dict(self) -> dict:
        return {
            "version": MODEL_FORMAT_VERSION,
            "threshold": self.threshold,
            "malignant_cost_multiplier": self.malignant_cost_multiplier,
            "base_cost": self.base_cost,
            "feature_names": list(self.feature_names),
            "selected_feature_indices": list(self.selected_feature_indices),
            "marginal_counts": list(self.marginal_counts),
            "weight_total": self.weight_total,
            "warnings": list(self.warnings),
            "svm": self.svm.to_dict(),
            "marginal_stats": self.marginal_stats.to_dict(),
            "fallback_stats": self.fallback_stats.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, payload: dict) -> PfsvmModel:
        if not isinstance(payload, dict) or "version" not in payload:
            raise ModelFormatError("model document has no version field")
        if payload["version"] != MODEL_FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model version {payload['version']!r}")
        try:
            return cls(
                svm=svm_core.SvmModel.from_dict(payload["svm"]),
                marginal_stats=ClassStats.from_dict(payload["marginal_stats"]),
                fallback_stats=ClassStats.from_dict(payload["fallback_stats"]),
                threshold=float(payload["threshold"]),
                malignant_cost_multiplier=float(payload["malignant_cost_multiplier"]),
                base_cost=float(payload.get("base_cost", 1.0)),
                marginal_counts=tuple(payload.get("marginal_counts", ())),
                weight_total=float(payload.get("weight_total", "nan")),
                warnings=tuple(payload.get("warnings", ())),
                feature_names=tuple(payload.get("feature_names", ())),
                selected_feature_indices=tuple(payload.get("selected_feature_indices", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed model document: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> PfsvmModel:
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"model is not valid JSON: {exc}") from None
        return cls.from_dict(payload)


def cost_vector(data: Dataset, weights: WeightVector, malignant_cost_multiplier=1.0, base_cost=1.0):
    """Per-sample slack costs: base cost times normalised weight, malignant
    samples scaled by the multiplier after normalisation."""
    scale = np.where(data.y == MALIGNANT, malignant_cost_multiplier, 1.0)
    return np.maximum(base_cost * weights.normalized * scale, _MIN_COST)


def _marginal_stats(train: Dataset, inside, whole: ClassStats):
    means, stds, counts, notes = [], [], [], []
    marginal_counts = []
    for label in CLASS_LABELS:
        members = train.X[inside & (train.y == label)]
        marginal_counts.append(members.shape[0])
        if members.shape[0] == 0:
            r = whole.row(label)
            means.append(whole.mean[r])
            stds.append(whole.std[r])
            counts.append(whole.count[r])
            notes.append(
                f"no margin-interior training points of class {label:+d}; "
                "using whole-training-set statistics"
            )
            continue
        means.append(members.mean(axis=0))
        if members.shape[0] < 2:
            stds.append(whole.sigma_floor.copy())
        else:
            stds.append(np.maximum(members.std(axis=0, ddof=1), whole.sigma_floor))
        counts.append(members.shape[0])
    stats = ClassStats(
        CLASS_LABELS, np.array(means), np.array(stds), np.array(counts), whole.sigma_floor
    )
    return stats, tuple(marginal_counts), tuple(notes)


def margin_interior(model: svm_core.SvmModel, train: Dataset, tolerance: float) -> np.ndarray:
    """Training points strictly inside the margin of ``model``.

    At the optimum a point whose dual is below its cost has y*f >= 1, so
    it can only look interior through solver slack; such points count as
    interior only when they are inside by more than ``tolerance``.
    """
    f = model.decision_function(train.X)
    at_cost = model.duals >= model.per_sample_cost
    return (np.abs(f) < 1) & (at_cost | (train.y * f < 1 - tolerance))


def fit(
    train: Dataset,
    threshold: float = DEFAULT_THRESHOLD,
    malignant_cost_multiplier: float = 1.0,
    base_cost: float = 1.0,
    *,
    weighting: str = "gaussian",
    tolerance: float = 1e-3,
    max_passes: int = 1000,
) -> PfsvmModel:
    """Fit both phases on ``train``.

    ``weighting="uniform"`` replaces the Gaussian weights by ones, which
    reduces phase one to a plain SVM with cost ``base_cost``.
    """
    if not 0.5 < threshold <= 1:
        raise ValueError("threshold must lie in (0.5, 1]")
    if malignant_cost_multiplier < 1:
        raise ValueError("malignant cost multiplier must be at least 1")
    if base_cost <= 0:
        raise ValueError("base cost must be positive")

    floor = default_sigma_floor(train.X)
    whole = class_stats(train, floor)
    if weighting == "gaussian":
        weights = sample_weights(train, whole)
    elif weighting == "uniform":
        weights = normalize_weights(np.ones(train.n_samples))
    else:
        raise ValueError(f"unknown weighting {weighting!r}")

    costs = cost_vector(train, weights, malignant_cost_multiplier, base_cost)
    model = svm_core.train(train, costs, tolerance=tolerance, max_passes=max_passes)

    inside = margin_interior(model, train, tolerance)
    marginal, marginal_counts, notes = _marginal_stats(train, inside, whole)
    for note in notes:
        log.warning(note)
    if not model.converged:
        notes += ("phase-one SVM did not reach its KKT tolerance",)

    return PfsvmModel(
        svm=model,
        marginal_stats=marginal,
        fallback_stats=whole,
        threshold=threshold,
        malignant_cost_multiplier=malignant_cost_multiplier,
        base_cost=base_cost,
        marginal_counts=marginal_counts,
        weight_total=weights.total,
        warnings=notes,
        feature_names=train.feature_names,
        selected_feature_indices=train.selected_feature_indices,
        weights=weights,
    )


def _as_matrix(model: PfsvmModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.svm.n_features:
        raise ValueError(
            f"expected points with {model.svm.n_features} features, got shape {X.shape}"
        )
    return X


def predict_many(model: PfsvmModel, X) -> list[Prediction]:
    X = _as_matrix(model, X)
    f = model.svm.decision_function(X)
    inside = np.abs(f) < 1
    p_m = np.full(X.shape[0], np.nan)
    if np.any(inside):
        l_m = log_membership(X[inside], model.marginal_stats, MALIGNANT)
        l_b = log_membership(X[inside], model.marginal_stats, BENIGN)
        p_m[inside] = membership_probabilities(l_m, l_b)

    out = []
    t = model.threshold
    for fx, is_in, pm in zip(f, inside, p_m):
        fx = float(fx)
        if not is_in:
            label = MALIGNANT if fx >= 0 else BENIGN
            out.append(
                Prediction(Outcome.DEFINITE, label, 1.0, float(label == MALIGNANT), fx, False)
            )
        elif np.isnan(pm):
            out.append(
                Prediction(
                    Outcome.UNDETERMINED, None, 0.5, 0.5, fx, True,
                    diagnostic="point is infinitely far from both marginal populations",
                )
            )
        elif meets_threshold(pm, t):
            out.append(Prediction(Outcome.PROBABILISTIC, MALIGNANT, float(pm), float(pm), fx, True))
        elif meets_threshold(1.0 - pm, t):
            out.append(
                Prediction(Outcome.PROBABILISTIC, BENIGN, float(1.0 - pm), float(pm), fx, True)
            )
        else:
            out.append(
                Prediction(Outcome.UNDETERMINED, None, float(max(pm, 1.0 - pm)), float(pm), fx, True)
            )
    return out


def predict(model: PfsvmModel, x) -> Prediction:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.svm.n_features,):
        raise ValueError(
            f"dimension mismatch: model has {model.svm.n_features} features, point has {x.shape}"
        )
    return predict_many(model, x[None, :])[0]


def predict_svm_baseline(model: svm_core.SvmModel, x) -> int:
    return svm_core.predict_sign(model, x)


def predict_fsvm_baseline(model: PfsvmModel, x) -> int:
    """Sign rule of the phase-one weighted SVM; phase two is ignored."""
    return svm_core.predict_sign(model.svm, x)


def fuzzy_baseline_labels(stats: ClassStats, X) -> np.ndarray:
    """Argmax membership over whole-training-set statistics, ties to malignant."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    p_m = membership_probabilities(
        log_membership(X, stats, MALIGNANT), log_membership(X, stats, BENIGN)
    )
    return np.where(np.nan_to_num(p_m, nan=0.5) >= 0.5, MALIGNANT, BENIGN)


def predict_fuzzy_baseline(train, x) -> int:
    """``train`` is the training Dataset or the ClassStats already built from it."""
    stats = train if isinstance(train, ClassStats) else class_stats(train)
    x = np.asarray(x, dtype=float)
    if x.shape != (stats.n_features,):
        raise ValueError(f"dimension mismatch: expected {stats.n_features} features")
    return int(fuzzy_baseline_labels(stats, x)[0])
