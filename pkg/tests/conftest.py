import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fuzzysvm.dataset import Dataset, load_wdbc, prune_correlated  # noqa: E402

DATA_DIR = Path(__file__).parent / "data"
WDBC_PATH = DATA_DIR / "wdbc.data"


@pytest.fixture(scope="session")
def wdbc_path():
    return WDBC_PATH


@pytest.fixture(scope="session")
def wdbc():
    return load_wdbc(WDBC_PATH)


@pytest.fixture(scope="session")
def wdbc_pruned(wdbc):
    return prune_correlated(wdbc, 0.95)


def make_dataset(X, y):
    X = np.asarray(X, dtype=float)
    return Dataset(X, np.asarray(y), tuple(f"f{j}" for j in range(X.shape[1])))


@pytest.fixture
def square():
    """(0,0),(0,1) benign and (2,0),(2,1) malignant."""
    return make_dataset([[0, 0], [0, 1], [2, 0], [2, 1]], [-1, -1, 1, 1])


def blobs(n_per_class=30, separation=40.0, seed=0, n_features=2):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n_per_class, n_features)) + separation / 2
    b = rng.normal(size=(n_per_class, n_features)) - separation / 2
    return make_dataset(np.vstack([a, b]), [1] * n_per_class + [-1] * n_per_class)


def overlapping(n=80, seed=0, n_features=3, shift=1.5):
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) % 2 == 0, 1, -1)
    X = rng.normal(size=(n, n_features)) + shift * y[:, None] * np.linspace(1, 0.2, n_features)
    return make_dataset(X, y)


# Criterion number -> (passed, detail), filled by test_acceptance.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
