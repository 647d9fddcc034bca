import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import blobs, make_dataset, overlapping
from fuzzysvm import svm
from fuzzysvm.errors import TrainingError
from helpers import kkt_violations
from oracles import primal_objective, projected_gradient_dual, random_instance

TOL = 1e-3


@pytest.fixture(params=[False, True], ids=["cold", "warm"])
def warm(request):
    return request.param


def _check_invariants(model, data):
    a, c = model.duals, model.per_sample_cost
    assert np.all(a >= 0) and np.all(a <= c)
    assert abs(a @ data.y) <= 1e-8 * a.sum() + 1e-12
    np.testing.assert_allclose(model.normal, (a * data.y) @ data.X)
    assert model.margin_width == pytest.approx(2 / np.linalg.norm(model.normal))
    assert model.margin_width > 0


def test_square_max_margin(square, warm):
    model = svm.train(square, np.full(4, 10.0), warm_start=warm)
    assert model.converged
    direction = model.normal / np.linalg.norm(model.normal)
    np.testing.assert_allclose(direction, [1.0, 0.0], atol=1e-6)
    assert model.margin_width == pytest.approx(2.0, rel=1e-6)
    assert svm.decision_value(model, [1.0, 0.3]) == pytest.approx(0.0, abs=1e-6)
    assert svm.decision_value(model, [0.0, 0.0]) == pytest.approx(-1.0, abs=1e-6)
    assert svm.decision_value(model, [2.0, 0.5]) == pytest.approx(1.0, abs=1e-6)
    _check_invariants(model, square)


def test_hard_margin_limit(warm):
    data = blobs(n_per_class=6, separation=6.0, seed=3)
    model = svm.train(data, np.full(12, 1e6), warm_start=warm)
    np.testing.assert_allclose(svm.slack_of(model, data), 0.0, atol=TOL)
    alpha, _ = projected_gradient_dual(data.X, data.y, np.full(12, 1e6))
    w_ref = (alpha * data.y) @ data.X
    np.testing.assert_allclose(model.normal, w_ref, rtol=1e-3)


def test_random_eight_points_match_oracle(warm):
    rng = np.random.default_rng(8)
    y = np.array([1, 1, 1, 1, -1, -1, -1, -1])
    X = rng.normal(size=(8, 2)) + 0.8 * y[:, None]
    cost = np.array([0.3, 5.0, 1.0, 2.5, 9.0, 0.1, 1.7, 4.2])
    data = make_dataset(X, y)
    model = svm.train(data, cost, warm_start=warm)
    _, ref = projected_gradient_dual(X, y, cost)
    assert svm.dual_objective(model.duals, X, y) == pytest.approx(ref, rel=1e-4)
    # Strong duality: primal value at the returned hyperplane is close as well.
    primal = primal_objective(model.normal, model.offset, X, y, cost)
    assert primal == pytest.approx(ref, rel=1e-2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_oracle_agreement_and_kkt(seed, warm_start):
    X, y, cost = random_instance(np.random.default_rng(seed))
    data = make_dataset(X, y)
    model = svm.train(data, cost, tolerance=TOL, warm_start=warm_start)
    assert model.converged
    _, ref = projected_gradient_dual(X, y, cost)
    assert svm.dual_objective(model.duals, X, y) == pytest.approx(ref, rel=1e-4)
    assert kkt_violations(model, data, TOL + 1e-9) == []
    _check_invariants(model, data)


def test_dual_objective_monotone_across_pair_updates():
    data = overlapping(n=40, seed=2)
    cost = np.random.default_rng(0).uniform(0.1, 10.0, size=40)
    values = []
    svm.train(
        data,
        cost,
        warm_start=False,
        callback=lambda a: values.append(svm.dual_objective(a, data.X, data.y)),
    )
    assert len(values) > 5
    steps = np.diff([0.0] + values)
    assert np.all(steps >= -1e-12 * max(1.0, abs(values[-1])))


@pytest.mark.parametrize("gamma", [1.0, 2.0, 10.0])
def test_scaling_costs_never_increases_total_slack(gamma):
    data = overlapping(n=50, seed=4)
    cost = np.random.default_rng(1).uniform(0.2, 3.0, size=50)
    base = svm.slack_of(svm.train(data, cost), data).sum()
    scaled = svm.slack_of(svm.train(data, gamma * cost), data).sum()
    assert scaled <= base + 1e-3 * data.n_samples


def test_equal_costs_invariants_on_larger_problem():
    data = overlapping(n=120, seed=7, n_features=4)
    model = svm.train(data, np.ones(120))
    assert model.converged
    _check_invariants(model, data)
    assert kkt_violations(model, data, TOL + 1e-9) == []


def test_warm_and_cold_agree():
    data = overlapping(n=60, seed=9)
    cost = np.random.default_rng(2).uniform(0.1, 10.0, size=60)
    cold = svm.train(data, cost, warm_start=False)
    warm = svm.train(data, cost, warm_start=True)
    assert svm.dual_objective(cold.duals, data.X, data.y) == pytest.approx(
        svm.dual_objective(warm.duals, data.X, data.y), rel=1e-4
    )


def test_single_class_rejected():
    data = make_dataset([[0, 0], [1, 1]], [1, 1])
    with pytest.raises(TrainingError):
        svm.train(data, np.ones(2))


@pytest.mark.parametrize("cost", [[1.0, 0.0, 1.0, 1.0], [1.0, -1.0, 1.0, 1.0], [1.0, 1.0]])
def test_invalid_costs_rejected(square, cost):
    with pytest.raises(ValueError):
        svm.train(square, np.array(cost))


def test_budget_exhaustion_is_flagged(caplog):
    data = overlapping(n=60, seed=11)
    model = svm.train(data, np.full(60, 5.0), warm_start=False, max_passes=0)
    assert model.n_iter == 0
    assert not model.converged
    assert "without meeting tolerance" in caplog.text


def _fixed_model():
    return svm.SvmModel(
        normal=np.array([1.0, 0.0]),
        offset=-1.0,
        duals=np.zeros(0),
        per_sample_cost=np.zeros(0),
        margin_width=2.0,
    )


@pytest.mark.parametrize(
    "x, expected", [([4.2, 0.0], 1), ([0.99, 7.0], -1), ([1.0, -3.0], 1)]
)
def test_predict_sign_and_tie(x, expected):
    assert svm.predict_sign(_fixed_model(), x) == expected


@pytest.mark.parametrize("x, expected", [([1.5, 0], True), ([2.0, 0], False), ([-2.0, 0], False)])
def test_in_margin(x, expected):
    # decision values 0.5, 1.0 and -3.0
    assert svm.in_margin(_fixed_model(), x) is expected


def test_slack_of_examples():
    data = make_dataset([[3.0, 0.0], [0.0, 0.0], [0.5, 0.0]], [1, -1, 1])
    # f = 2 (outside margin), f = -1 (on own margin), f = -0.5 misclassified
    np.testing.assert_allclose(svm.slack_of(_fixed_model(), data), [0.0, 0.0, 1.5])


def test_dimension_mismatch():
    model = _fixed_model()
    with pytest.raises(ValueError):
        svm.decision_value(model, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        svm.slack_of(model, make_dataset([[1.0], [2.0]], [1, -1]))


def test_serialization_roundtrip(square):
    model = svm.train(square, np.full(4, 10.0))
    payload = json.loads(json.dumps(model.to_dict()))
    for key in ("normal", "offset", "margin_width", "converged"):
        assert key in payload
    restored = svm.SvmModel.from_dict(payload)
    np.testing.assert_array_equal(restored.normal, model.normal)
    assert restored.offset == model.offset
    assert restored.converged == model.converged
