import numpy as np


def kkt_violations(model, data, tol):
    """Indices breaking the box/complementarity conditions by more than ``tol``."""
    a = model.duals
    c = model.per_sample_cost
    margin = data.y * model.decision_function(data.X)
    bad = []
    for i in range(data.n_samples):
        if a[i] <= 0:
            ok = margin[i] >= 1 - tol
        elif a[i] >= c[i]:
            ok = margin[i] <= 1 + tol
        else:
            ok = abs(margin[i] - 1) <= tol
        if not ok or a[i] < 0 or a[i] > c[i]:
            bad.append(i)
    return bad
