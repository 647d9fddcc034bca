"""Linear soft-margin SVM with an individual slack cost per sample.

The dual

    max  sum(a) - 1/2 * ||sum_i a_i y_i x_i||^2
    s.t. 0 <= a_i <= c_i,  sum_i a_i y_i = 0

is solved by sequential minimal optimization: each step picks the maximal
violating pair using second-order information and solves the two-variable
subproblem in closed form.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import cvxopt
import numpy as np

from .dataset import BENIGN, MALIGNANT, Dataset
from .errors import ModelFormatError, TrainingError

log = logging.getLogger(__name__)

_TAU = 1e-12
_SNAP = 1e-7


@dataclass(frozen=True)
class SvmModel:
    normal: np.ndarray
    offset: float
    duals: np.ndarray
    per_sample_cost: np.ndarray
    margin_width: float
    converged: bool = True
    n_iter: int = 0

    @property
    def n_features(self) -> int:
        return self.normal.shape[0]

    def decision_function(self, X) -> np.ndarray:
        """Vectorised ``decision_value`` for a (n, p) matrix."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected points with {self.n_features} features, got shape {X.shape}"
            )
        return X @ self.normal + self.offset

    def to_dict(self) -> dict:
        return {
            "normal": self.normal.tolist(),
            "offset": float(self.offset),
            "margin_width": float(self.margin_width),
            "converged": bool(self.converged),
            "n_iter": int(self.n_iter),
            "duals": self.duals.tolist(),
            "per_sample_cost": self.per_sample_cost.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> SvmModel:
        try:
            normal = np.asarray(payload["normal"], dtype=float)
            return cls(
                normal=normal,
                offset=float(payload["offset"]),
                duals=np.asarray(payload.get("duals", []), dtype=float),
                per_sample_cost=np.asarray(payload.get("per_sample_cost", []), dtype=float),
                margin_width=float(payload["margin_width"]),
                converged=bool(payload.get("converged", True)),
                n_iter=int(payload.get("n_iter", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed SVM model: {exc}") from None


def dual_objective(duals, X, y) -> float:
    """Value of the (maximised) dual objective at ``duals``."""
    w = (np.asarray(duals) * y) @ np.asarray(X, dtype=float)
    return float(np.sum(duals) - 0.5 * w @ w)


def _check_point(model: SvmModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_features,):
        raise ValueError(
            f"dimension mismatch: model has {model.n_features} features, point has {x.shape}"
        )
    return x


def decision_value(model: SvmModel, x) -> float:
    x = _check_point(model, x)
    return float(x @ model.normal + model.offset)


def predict_sign(model: SvmModel, x) -> int:
    """Sign of the decision value; an exact zero goes to the malignant class."""
    return MALIGNANT if decision_value(model, x) >= 0 else BENIGN


def in_margin(model: SvmModel, x) -> bool:
    return abs(decision_value(model, x)) < 1


def slack_of(model: SvmModel, data: Dataset) -> np.ndarray:
    f = model.decision_function(data.X)
    return np.maximum(0.0, 1.0 - data.y * f)


def _offset(alpha, cost, y, grad) -> float:
    # -y_t * G_t equals y_t - x_t . w, the offset each support vector implies.
    implied = -y * grad
    free = (alpha > 0) & (alpha < cost)
    if np.any(free):
        return float(implied[free].mean())
    at_upper = alpha >= cost
    # Lower bounds come from (y=+1, at bound 0) and (y=-1, at cost); the
    # remaining bounded samples give upper bounds.
    lower_mask = ((y == 1) & ~at_upper) | ((y == -1) & at_upper)
    upper_mask = ~lower_mask
    lo = implied[lower_mask].max() if np.any(lower_mask) else -np.inf
    hi = implied[upper_mask].min() if np.any(upper_mask) else np.inf
    if np.isfinite(lo) and np.isfinite(hi):
        return float(0.5 * (lo + hi))
    return float(lo if np.isfinite(lo) else hi)


def _interior_point_start(K, y, cost):
    """Approximate dual solution from an interior-point QP solve.

    Solved in the scaled variable u = alpha / cost so that samples with a
    vanishing cost do not pinch the feasible box.  Returns a feasible
    (alpha, grad) pair, or None when the solver fails.
    """
    n = y.shape[0]
    Q = np.outer(y, y) * K
    P = Q * np.outer(cost, cost)
    G = np.vstack([np.eye(n), -np.eye(n)])
    h = np.concatenate([np.ones(n), np.zeros(n)])
    try:
        sol = cvxopt.solvers.qp(
            cvxopt.matrix(P),
            cvxopt.matrix(-cost),
            cvxopt.matrix(G),
            cvxopt.matrix(h),
            cvxopt.matrix((y * cost)[None, :]),
            cvxopt.matrix(0.0),
            options={"show_progress": False, "maxiters": 100},
        )
    except (ValueError, ArithmeticError) as exc:
        log.debug("interior-point start failed: %s", exc)
        return None
    u = np.clip(np.asarray(sol["x"]).ravel(), 0.0, 1.0)
    u[u < _SNAP] = 0.0
    u[u > 1.0 - _SNAP] = 1.0
    alpha = u * cost
    # Push the equality residual onto the free variables.
    for _ in range(20):
        residual = alpha @ y
        free = (alpha > 0) & (alpha < cost)
        if abs(residual) <= 1e-13 * max(alpha.sum(), 1e-300) or not np.any(free):
            break
        alpha[free] -= residual * y[free] / free.sum()
        np.clip(alpha, 0.0, cost, out=alpha)
    if abs(alpha @ y) > 1e-12 * max(alpha.sum(), 1e-300):
        return None
    return alpha, Q @ alpha - 1.0


def train(
    data: Dataset,
    per_sample_cost,
    tolerance: float = 1e-3,
    max_passes: int = 1000,
    warm_start: bool = True,
    callback=None,
) -> SvmModel:
    """Fit the weighted soft-margin SVM.

    Parameters
    ----------
    data : Dataset
        Training points; both classes must be present.
    per_sample_cost : array-like
        Upper bound c_i on each dual variable, i.e. the slack penalty of
        sample i.  All entries must be positive.
    tolerance : float
        Stop once the maximal KKT violation (on the y*f scale) is below this.
    max_passes : int
        Budget of ``max_passes * N`` pair updates.  If it runs out the model
        is returned with ``converged=False``.
    warm_start : bool
        Start the pair updates from an interior-point solution of the same
        dual instead of from zero.  Unscaled features make the dual badly
        conditioned and a cold start can need millions of updates; the
        pair updates still decide convergence either way.
    callback : callable, optional
        Called as ``callback(alpha)`` after every pair update.
    """
    X = data.X
    y = data.y.astype(float)
    n = data.n_samples
    cost = np.asarray(per_sample_cost, dtype=float)
    if cost.shape != (n,):
        raise ValueError(f"expected {n} per-sample costs, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)) or np.any(cost <= 0):
        raise ValueError("per-sample costs must be positive and finite")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise TrainingError("training data must contain both classes")

    K = X @ X.T
    diag = np.diag(K).copy()
    start = _interior_point_start(K, y, cost) if warm_start else None
    if start is None:
        alpha = np.zeros(n)
        grad = -np.ones(n)  # gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij
    else:
        alpha, grad = start

    max_iter = max_passes * n
    converged = False
    it = 0
    while it < max_iter:
        # Index sets of the standard working-set selection.
        up = ((y > 0) & (alpha < cost)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < cost))
        score = -y * grad
        score_up = np.where(up, score, -np.inf)
        i = int(np.argmax(score_up))
        m_up = score_up[i]
        m_low = np.min(np.where(low, score, np.inf))
        if m_up - m_low < tolerance:
            converged = True
            break

        b = m_up - score
        cand = low & (b > 0)
        quad = diag[i] + diag - 2.0 * K[i]
        quad = np.where(quad > 0, quad, _TAU)
        gain = np.where(cand, -(b * b) / quad, np.inf)
        j = int(np.argmin(gain))

        ai_old, aj_old = alpha[i], alpha[j]
        ci, cj = cost[i], cost[j]
        yi, yj = y[i], y[j]
        q = diag[i] + diag[j] - 2.0 * K[i, j]
        if q <= 0:
            q = _TAU
        if yi != yj:
            delta = (-grad[i] - grad[j]) / q
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > ci - cj:
                if ai > ci:
                    ai, aj = ci, ci - diff
            elif aj > cj:
                aj, ai = cj, cj + diff
        else:
            delta = (grad[i] - grad[j]) / q
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > ci:
                if ai > ci:
                    ai, aj = ci, total - ci
            elif aj < 0:
                aj, ai = 0.0, total
            if total > cj:
                if aj > cj:
                    aj, ai = cj, total - cj
            elif ai < 0:
                ai, aj = 0.0, total

        d_i, d_j = ai - ai_old, aj - aj_old
        alpha[i], alpha[j] = ai, aj
        grad += y * (K[:, i] * (yi * d_i) + K[:, j] * (yj * d_j))
        it += 1
        if callback is not None:
            callback(alpha.copy())

    if not converged:
        log.warning("SMO stopped after %d pair updates without meeting tolerance %g", it, tolerance)

    normal = (alpha * y) @ X
    norm = float(np.linalg.norm(normal))
    if norm == 0:
        log.warning("hyperplane normal is zero; every point lies inside the margin")
    alpha.setflags(write=False)
    cost = cost.copy()
    cost.setflags(write=False)
    normal.setflags(write=False)
    return SvmModel(
        normal=normal,
        offset=_offset(alpha, cost, y, grad),
        duals=alpha,
        per_sample_cost=cost,
        margin_width=2.0 / norm if norm > 0 else math.inf,
        converged=converged,
        n_iter=it,
    )
