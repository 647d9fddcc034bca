"""Independent reference computations used to freeze and cross-check results.

Nothing here imports the package's solver or statistics code.
"""

import math

import numpy as np


def pearson(a, b):
    """Plain double-loop Pearson correlation; constant columns give None."""
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    sab = saa = sbb = 0.0
    for x, y in zip(a, b):
        sab += (x - ma) * (y - mb)
        saa += (x - ma) ** 2
        sbb += (y - mb) ** 2
    if saa == 0 or sbb == 0:
        return None
    return sab / math.sqrt(saa * sbb)


def greedy_prune(X, threshold):
    """Column-order greedy pruning applied to a correlation matrix built by hand."""
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    cols = [list(X[:, j]) for j in range(p)]
    corr = [[None] * p for _ in range(p)]
    for i in range(p):
        for j in range(p):
            r = pearson(cols[i], cols[j])
            if r is None:
                const_i = len(set(cols[i])) == 1
                const_j = len(set(cols[j])) == 1
                r = 1.0 if (const_i and const_j) else 0.0
            corr[i][j] = r
    kept = []
    for j in range(p):
        if all(abs(corr[j][k]) <= threshold for k in kept):
            kept.append(j)
    return kept


def _project(v, y, c):
    """Euclidean projection onto {0 <= a <= c, y.a = 0} via the exact
    piecewise-linear root of the multiplier equation."""

    def h(lam):
        return float(np.dot(y, np.clip(v - lam * y, 0.0, c)))

    breaks = np.unique(np.concatenate([y * v, y * (v - c)]))
    values = np.array([h(b) for b in breaks])
    # h is non-increasing in lam.
    if values[0] < 0:
        lam = breaks[0]
    elif values[-1] > 0:
        lam = breaks[-1]
    else:
        k = int(np.searchsorted(-values, 0.0))
        if values[k] == 0:
            lam = breaks[k]
        else:
            lo, hi = breaks[k - 1], breaks[k]
            flo, fhi = values[k - 1], values[k]
            lam = lo + (hi - lo) * flo / (flo - fhi)
    return np.clip(v - lam * y, 0.0, c)


def projected_gradient_dual(X, y, cost, iterations=20000):
    """Maximise the SVM dual with accelerated projected gradient.

    Returns (alpha, objective).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.asarray(cost, dtype=float)
    Q = np.outer(y, y) * (X @ X.T)
    L = max(np.linalg.eigvalsh(Q).max(), 1e-12)
    step = 1.0 / L

    def objective(a):
        return float(a.sum() - 0.5 * a @ Q @ a)

    a = _project(np.zeros_like(y), y, c)
    obj = objective(a)
    z = a.copy()
    t = 1.0
    stalled = 0
    for _ in range(iterations):
        a_next = _project(z + step * (1.0 - Q @ z), y, c)
        obj_next = objective(a_next)
        stalled = stalled + 1 if obj_next - obj <= 1e-15 * max(1.0, abs(obj)) else 0
        if stalled >= 200:
            break
        if obj_next < obj:  # restart momentum
            z = a.copy()
            t = 1.0
            continue
        t_next = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        z = a_next + ((t - 1) / t_next) * (a_next - a)
        a, obj, t = a_next, obj_next, t_next
    return a, obj


def primal_objective(w, b, X, y, cost):
    f = X @ w + b
    return 0.5 * float(w @ w) + float(np.sum(cost * np.maximum(0.0, 1.0 - y * f)))


def random_instance(rng, n_max=12):
    """Small 2-D problem with both classes and costs in [0.1, 10]."""
    n = int(rng.integers(4, n_max + 1))
    y = np.where(rng.random(n) < 0.5, 1, -1)
    y[0], y[1] = 1, -1
    X = rng.normal(size=(n, 2)) + 1.2 * y[:, None] * rng.normal(size=2)
    cost = rng.uniform(0.1, 10.0, size=n)
    return X, y, cost
