"""Probabilistic fuzzy SVM: a Gaussian-weighted linear SVM whose margin
points are classified by fuzzy membership probabilities, with abstention."""

from .classifier import Outcome, PfsvmModel, Prediction, fit, predict, predict_many
from .dataset import BENIGN, MALIGNANT, Dataset, load_wdbc, make_folds, prune_correlated
from .evaluation import RunReport, run_experiment
from .svm import SvmModel, train

__all__ = [
    "BENIGN",
    "MALIGNANT",
    "Dataset",
    "Outcome",
    "PfsvmModel",
    "Prediction",
    "RunReport",
    "SvmModel",
    "fit",
    "load_wdbc",
    "make_folds",
    "predict",
    "predict_many",
    "prune_correlated",
    "run_experiment",
    "train",
]

__version__ = "0.1.0"
