"""Cross-validated comparison of SVM, fuzzy SVM, fuzzy and PFSVM classifiers."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import svm as svm_core
from .classifier import (
    DEFAULT_THRESHOLD,
    Outcome,
    PfsvmModel,
    fit,
    fuzzy_baseline_labels,
    predict_many,
)
from .dataset import MALIGNANT, BENIGN, Dataset, make_folds
from .fuzzy import class_stats

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FoldResult:
    fold: int
    test_size: int
    svm_err: int = 0
    fsvm_err: int = 0
    fuzzy_err: int = 0
    pfsvm_definite_err: int = 0
    pfsvm_probabilistic_err: int = 0
    pfsvm_undetermined: int = 0
    pfsvm_definite: int = 0
    pfsvm_probabilistic: int = 0
    margin_width_svm: float = math.nan
    margin_width_fsvm: float = math.nan
    errors_inside_margin: int = 0
    errors_outside_margin: int = 0
    errors_in_margin_fraction: float = math.nan
    svm_converged: bool = True
    fsvm_converged: bool = True
    failed: bool = False
    error: str = ""

    @property
    def pfsvm_err(self) -> int:
        return self.pfsvm_definite_err + self.pfsvm_probabilistic_err


# Aggregated count columns, in report order.
METHODS = (
    ("svm", "SVM_err"),
    ("fsvm", "FSVM_err"),
    ("fuzzy", "FUZZY_err"),
    ("pfsvm", "PFSVM_err"),
    ("pfsvm_undetermined", "PFSVM_undet"),
)


def _count(row: FoldResult, method: str) -> int:
    if method == "pfsvm":
        return row.pfsvm_err
    if method == "pfsvm_undetermined":
        return row.pfsvm_undetermined
    return getattr(row, f"{method}_err")


@dataclass(frozen=True)
class RunReport:
    config: dict
    per_fold: tuple[FoldResult, ...]
    aggregate: dict = field(default_factory=dict)

    @property
    def ok_folds(self) -> list[FoldResult]:
        return [r for r in self.per_fold if not r.failed]

    def percent(self, method: str) -> float:
        return self.aggregate["percent"][method]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "per_fold": [_clean(asdict(r)) for r in self.per_fold],
            "aggregate": _clean(self.aggregate),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = [f.name for f in fields(FoldResult)]
        writer.writerow(names)
        for row in self.per_fold:
            writer.writerow([_csv_cell(getattr(row, name)) for name in names])
        return buf.getvalue()

    def to_text(self) -> str:
        return render_table(self)


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _csv_cell(value):
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return value


def aggregate(per_fold) -> dict:
    """Percentages over all test instances of the successful folds."""
    rows = [r for r in per_fold if not r.failed]
    if not rows:
        raise RuntimeError("no fold completed; nothing to aggregate")
    total = sum(r.test_size for r in rows)
    percent = {m: 100.0 * sum(_count(r, m) for r in rows) / total for m, _ in METHODS}
    percent["pfsvm_definite_err"] = 100.0 * sum(r.pfsvm_definite_err for r in rows) / total
    percent["pfsvm_probabilistic_err"] = (
        100.0 * sum(r.pfsvm_probabilistic_err for r in rows) / total
    )
    fractions = [r.errors_in_margin_fraction for r in rows if not math.isnan(r.errors_in_margin_fraction)]
    return {
        "folds_ok": len(rows),
        "folds_failed": len(per_fold) - len(rows),
        "test_instances": total,
        "percent": percent,
        "mean_margin_width_svm": float(np.mean([r.margin_width_svm for r in rows])),
        "mean_margin_width_fsvm": float(np.mean([r.margin_width_fsvm for r in rows])),
        "mean_errors_in_margin_fraction": float(np.mean(fractions)) if fractions else math.nan,
        "pooled_errors_in_margin_fraction": _pooled_fraction(rows),
    }


def _pooled_fraction(rows) -> float:
    inside = sum(r.errors_inside_margin for r in rows)
    total = inside + sum(r.errors_outside_margin for r in rows)
    return inside / total if total else math.nan


def errors_in_margin(model, test: Dataset) -> tuple[int, int]:
    """Split the FSVM sign-rule errors on ``test`` into (inside, outside) the margin.

    ``model`` is a PfsvmModel or a bare SvmModel.
    """
    svm = model.svm if isinstance(model, PfsvmModel) else model
    f = svm.decision_function(test.X)
    wrong = np.where(f >= 0, MALIGNANT, BENIGN) != test.y
    inside = np.abs(f) < 1
    return int(np.sum(wrong & inside)), int(np.sum(wrong & ~inside))


def evaluate_fold(
    train: Dataset,
    test: Dataset,
    fold: int,
    threshold: float = DEFAULT_THRESHOLD,
    malignant_cost_multiplier: float = 1.0,
    base_cost: float = 1.0,
) -> FoldResult:
    plain = svm_core.train(train, np.full(train.n_samples, base_cost))
    model = fit(train, threshold, malignant_cost_multiplier, base_cost)
    whole = class_stats(train)

    f_svm = plain.decision_function(test.X)
    f_fsvm = model.svm.decision_function(test.X)
    svm_err = int(np.sum(np.where(f_svm >= 0, MALIGNANT, BENIGN) != test.y))
    fsvm_err = int(np.sum(np.where(f_fsvm >= 0, MALIGNANT, BENIGN) != test.y))
    fuzzy_err = int(np.sum(fuzzy_baseline_labels(whole, test.X) != test.y))

    counts = {o: 0 for o in Outcome}
    wrong = {Outcome.DEFINITE: 0, Outcome.PROBABILISTIC: 0}
    for pred, truth in zip(predict_many(model, test.X), test.y):
        counts[pred.outcome] += 1
        if pred.outcome in wrong and pred.label != truth:
            wrong[pred.outcome] += 1

    inside, outside = errors_in_margin(model, test)
    return FoldResult(
        fold=fold,
        test_size=test.n_samples,
        svm_err=svm_err,
        fsvm_err=fsvm_err,
        fuzzy_err=fuzzy_err,
        pfsvm_definite_err=wrong[Outcome.DEFINITE],
        pfsvm_probabilistic_err=wrong[Outcome.PROBABILISTIC],
        pfsvm_undetermined=counts[Outcome.UNDETERMINED],
        pfsvm_definite=counts[Outcome.DEFINITE],
        pfsvm_probabilistic=counts[Outcome.PROBABILISTIC],
        margin_width_svm=plain.margin_width,
        margin_width_fsvm=model.svm.margin_width,
        errors_inside_margin=inside,
        errors_outside_margin=outside,
        errors_in_margin_fraction=inside / (inside + outside) if inside + outside else math.nan,
        svm_converged=plain.converged,
        fsvm_converged=model.svm.converged,
    )


def _run_fold(args) -> FoldResult:
    data, plan, fold, threshold, multiplier, base_cost = args
    try:
        return evaluate_fold(
            data.subset(plan.train_indices(fold)),
            data.subset(plan.test_indices(fold)),
            fold,
            threshold,
            multiplier,
            base_cost,
        )
    except Exception as exc:  # a failed fold is reported, not fatal
        log.error("fold %d failed: %s", fold, exc)
        return FoldResult(
            fold=fold,
            test_size=len(plan.test_indices(fold)),
            failed=True,
            error=f"{type(exc).__name__}: {exc}",
        )


def run_experiment(
    data: Dataset,
    k: int = 10,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    malignant_cost_multiplier: float = 1.0,
    base_cost: float = 1.0,
    n_jobs: int = 1,
) -> RunReport:
    """k-fold comparison of the four classifiers.

    Folds are independent; with ``n_jobs > 1`` they run in worker processes
    and are merged back in fold order.
    """
    plan = make_folds(data, k, seed)
    jobs = [(data, plan, f, threshold, malignant_cost_multiplier, base_cost) for f in range(k)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(_run_fold, jobs))
    else:
        rows = [_run_fold(job) for job in jobs]
    rows.sort(key=lambda r: r.fold)
    config = {
        "n_samples": data.n_samples,
        "n_features": data.n_features,
        "selected_feature_indices": list(data.selected_feature_indices),
        "k": k,
        "seed": seed,
        "threshold": threshold,
        "malignant_cost_multiplier": malignant_cost_multiplier,
        "base_cost": base_cost,
    }
    return RunReport(config, tuple(rows), aggregate(rows))


def _pfsvm_cell(row: FoldResult) -> str:
    if row.pfsvm_probabilistic_err:
        return f"{row.pfsvm_definite_err}+{row.pfsvm_probabilistic_err}"
    return str(row.pfsvm_definite_err)


def render_table(report: RunReport) -> str:
    """Aligned text table: one row per method, one column per fold.

    PFSVM errors read "definite+probabilistic" when the latter is non-zero.
    """
    header = ["Method \\ Run #"] + [str(r.fold + 1) for r in report.per_fold] + ["percent_ave"]
    lines = []
    for method, title in METHODS:
        cells = []
        for row in report.per_fold:
            if row.failed:
                cells.append("fail")
            elif method == "pfsvm":
                cells.append(_pfsvm_cell(row))
            else:
                cells.append(str(_count(row, method)))
        lines.append([title] + cells + [f"{report.percent(method):.2f}"])
    widths = [max(len(r[i]) for r in [header] + lines) for i in range(len(header))]

    def fmt(cells):
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return " | ".join([first] + rest)

    rule = "-+-".join("-" * w for w in widths)
    cfg = report.config
    agg = report.aggregate
    out = [
        f"k={cfg['k']} seed={cfg['seed']} threshold={cfg['threshold']} "
        f"malignant_cost_multiplier={cfg['malignant_cost_multiplier']} "
        f"base_cost={cfg['base_cost']} features={cfg['n_features']} N={cfg['n_samples']}",
        fmt(header),
        rule,
        *(fmt(line) for line in lines),
        "",
        f"mean margin width: SVM {agg['mean_margin_width_svm']:.4f}, "
        f"FSVM {agg['mean_margin_width_fsvm']:.4f}",
        f"FSVM errors inside margin: mean per fold {agg['mean_errors_in_margin_fraction']:.4f}, "
        f"pooled {agg['pooled_errors_in_margin_fraction']:.4f}",
    ]
    failed = [r for r in report.per_fold if r.failed]
    for r in failed:
        out.append(f"fold {r.fold + 1} failed: {r.error}")
    return "\n".join(out) + "\n"


PLOT_COLUMNS = (
    "index",
    "label",
    "decision_value_svm",
    "decision_value_fsvm",
    "in_margin_svm",
    "in_margin_fsvm",
    "margin_width_svm",
    "margin_width_fsvm",
)


def margin_plot_csv(model_svm, model_fsvm, data: Dataset) -> str:
    """Per-point decision values under both hyperplanes plus both margin widths."""
    f_svm = model_svm.decision_function(data.X)
    f_fsvm = model_fsvm.decision_function(data.X)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PLOT_COLUMNS)
    for i in range(data.n_samples):
        writer.writerow(
            [
                i,
                int(data.y[i]),
                repr(float(f_svm[i])),
                repr(float(f_fsvm[i])),
                int(abs(f_svm[i]) < 1),
                int(abs(f_fsvm[i]) < 1),
                repr(float(model_svm.margin_width)),
                repr(float(model_fsvm.margin_width)),
            ]
        )
    return buf.getvalue()


def export_margin_plot(model_svm, model_fsvm, data: Dataset, path) -> Path:
    if model_svm.n_features != model_fsvm.n_features:
        raise ValueError("both models must be trained on the same features")
    path = Path(path)
    atomic_write_text(path, margin_plot_csv(model_svm, model_fsvm, data))
    return path


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
