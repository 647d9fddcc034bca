"""Command-line interface: ``fuzzysvm {prune,train,predict,benchmark,plot-export}``.

Exit status is 0 on success, 1 on a usage error and 2 when a data or model
file cannot be used.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import svm as svm_core
from .classifier import DEFAULT_THRESHOLD, Outcome, PfsvmModel, fit, predict_many
from .dataset import MALIGNANT, load_wdbc, make_folds, prune_correlated
from .errors import FuzzySvmError, IngestionError
from .evaluation import atomic_write_text, export_margin_plot, run_experiment

DEFAULT_SEED = 0
DEFAULT_K = 10
DEFAULT_CORRELATION_THRESHOLD = 0.95

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

_CLASS_NAMES = {1: "MALIGNANT", -1: "BENIGN"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _threshold(text):
    value = float(text)
    if not 0.5 < value <= 1:
        raise argparse.ArgumentTypeError("must lie in (0.5, 1]")
    return value


def _unit_interval(text):
    value = float(text)
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1]")
    return value


def _multiplier(text):
    value = float(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _fold_count(text):
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("must be at least 2")
    return value


def _seed(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fuzzysvm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_opts(p):
        p.add_argument("--data", required=True, type=Path, help="WDBC CSV file")
        p.add_argument(
            "--correlation-threshold",
            type=_unit_interval,
            default=DEFAULT_CORRELATION_THRESHOLD,
            help="drop features correlated above this with an earlier one (default 0.95)",
        )

    def model_opts(p):
        p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
        p.add_argument("--multiplier", type=_multiplier, default=1.0,
                       help="cost multiplier for malignant samples")
        p.add_argument("--base-cost", type=_positive, default=1.0)

    def fmt_opt(p, default="text"):
        p.add_argument("--format", choices=("text", "json", "csv"), default=default)

    p = sub.add_parser("prune", help="select features and write the canonical CSV")
    data_opts(p)
    p.add_argument("--output", type=Path, help="write the pruned dataset here")
    fmt_opt(p)

    p = sub.add_parser("train", help="fit a PFSVM model on the whole file")
    data_opts(p)
    model_opts(p)
    p.add_argument("--model", required=True, type=Path, help="output model JSON")

    p = sub.add_parser("predict", help="classify points with a saved model")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--input", required=True, type=Path,
                   help="headerless CSV, one point per row, model's selected features")
    fmt_opt(p)

    p = sub.add_parser("benchmark", help="k-fold comparison of all four methods")
    data_opts(p)
    model_opts(p)
    p.add_argument("--k", type=_fold_count, default=DEFAULT_K)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for folds")
    p.add_argument("--output", type=Path, help="write the report here instead of stdout")
    fmt_opt(p)

    p = sub.add_parser("plot-export", help="decision values of SVM and FSVM per point")
    data_opts(p)
    model_opts(p)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--fold", type=int, help="train on this fold's training split only")
    p.add_argument("--k", type=_fold_count, default=DEFAULT_K)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    return parser


def _load(args):
    if not args.data.is_file():
        raise IngestionError(f"data file not found: {args.data}")
    return prune_correlated(load_wdbc(args.data), args.correlation_threshold)


def _emit(text: str, output: Path | None, stdout):
    if output is None:
        stdout.write(text)
    else:
        atomic_write_text(output, text)


def cmd_prune(args, stdout):
    data = _load(args)
    if args.output is not None:
        atomic_write_text(args.output, data.to_csv())
    if args.format == "json":
        payload = {
            "n_samples": data.n_samples,
            "selected_feature_indices": list(data.selected_feature_indices),
            "feature_names": list(data.feature_names),
        }
        stdout.write(json.dumps(payload, indent=2) + "\n")
    elif args.format == "csv":
        if args.output is None:
            stdout.write(data.to_csv())
    else:
        stdout.write(f"kept {data.n_features} features of the original columns\n")
        for idx, name in zip(data.selected_feature_indices, data.feature_names):
            stdout.write(f"{idx:3d}  {name}\n")


def cmd_train(args, stdout):
    data = _load(args)
    model = fit(data, args.threshold, args.multiplier, args.base_cost)
    atomic_write_text(args.model, model.to_json())
    stdout.write(
        f"trained on {data.n_samples} samples, {data.n_features} features; "
        f"margin width {model.svm.margin_width:.4f}; "
        f"converged={model.svm.converged}; model written to {args.model}\n"
    )
    for note in model.warnings:
        stdout.write(f"warning: {note}\n")


def _read_points(path: Path, n_features: int) -> np.ndarray:
    if not path.is_file():
        raise IngestionError(f"input file not found: {path}")
    rows = []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != n_features:
                raise IngestionError(f"expected {n_features} values, found {len(row)}", lineno)
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise IngestionError(f"unparseable number ({exc})", lineno) from None
    if not rows:
        raise IngestionError(f"no points in {path}")
    return np.array(rows)


def _prediction_record(i, pred):
    return {
        "index": i,
        "outcome": pred.outcome.value,
        "label": None if pred.label is None else _CLASS_NAMES[pred.label],
        "probability": pred.probability,
        "p_malignant": pred.p_malignant,
        "p_benign": 1.0 - pred.p_malignant,
        "decision_value": pred.decision_value,
        "in_margin": pred.in_margin,
    }


def cmd_predict(args, stdout):
    if not args.model.is_file():
        raise IngestionError(f"model file not found: {args.model}")
    model = PfsvmModel.from_json(args.model.read_text())
    points = _read_points(args.input, model.svm.n_features)
    preds = predict_many(model, points)
    records = [_prediction_record(i, p) for i, p in enumerate(preds)]
    if args.format == "json":
        stdout.write(json.dumps(records, indent=2) + "\n")
        return
    if args.format == "csv":
        writer = csv.writer(stdout, lineterminator="\n")
        writer.writerow(records[0].keys())
        for rec in records:
            writer.writerow(rec.values())
        return
    for rec, pred in zip(records, preds):
        if pred.outcome is Outcome.UNDETERMINED:
            line = (
                f"{rec['index']}: UNDETERMINED p_malignant={rec['p_malignant']:.6f} "
                f"p_benign={rec['p_benign']:.6f}"
            )
        else:
            line = f"{rec['index']}: {rec['label']} probability={pred.probability!r} ({rec['outcome']})"
        if pred.diagnostic:
            line += f" [{pred.diagnostic}]"
        stdout.write(line + "\n")


def cmd_benchmark(args, stdout):
    data = _load(args)
    report = run_experiment(
        data,
        k=args.k,
        seed=args.seed,
        threshold=args.threshold,
        malignant_cost_multiplier=args.multiplier,
        base_cost=args.base_cost,
        n_jobs=args.jobs,
    )
    text = {"text": report.to_text, "json": report.to_json, "csv": report.to_csv}[args.format]()
    _emit(text, args.output, stdout)
    if report.aggregate["folds_failed"]:
        logging.getLogger(__name__).warning("%d folds failed", report.aggregate["folds_failed"])


def cmd_plot_export(args, stdout):
    data = _load(args)
    if args.fold is not None:
        if not 0 <= args.fold < args.k:
            raise UsageError(f"--fold must lie in 0..{args.k - 1}")
        data = data.subset(make_folds(data, args.k, args.seed).train_indices(args.fold))
    plain = svm_core.train(data, np.full(data.n_samples, args.base_cost))
    model = fit(data, args.threshold, args.multiplier, args.base_cost)
    export_margin_plot(plain, model.svm, data, args.output)
    stdout.write(
        f"wrote {data.n_samples} rows to {args.output}; margin width "
        f"SVM {plain.margin_width:.4f}, FSVM {model.svm.margin_width:.4f}\n"
    )


COMMANDS = {
    "prune": cmd_prune,
    "train": cmd_train,
    "predict": cmd_predict,
    "benchmark": cmd_benchmark,
    "plot-export": cmd_plot_export,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
        stream=stderr,
    )
    try:
        COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        stderr.write(f"fuzzysvm: {exc}\n")
        return EXIT_USAGE
    except (FuzzySvmError, OSError, ValueError) as exc:
        stderr.write(f"fuzzysvm {args.command}: {exc}\n")
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
