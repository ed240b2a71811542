import numpy as np
import pytest

from infuse.basepool.svm import (
    SvmModel,
    fit_platt,
    smo_solve,
    stratified_subsample,
    train_svm,
)
from infuse.exceptions import TrainingError


# --- independent oracle: projected gradient on the dense dual QP -------------

def rbf_matrix(X, gamma):
    sq = (X**2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


def project_feasible(v, y, C):
    """Exact projection onto {0 <= a <= C, y.a = 0} via breakpoint search.

    The balance g(mu) = y . clip(v - mu y, 0, C) is piecewise linear and
    non-increasing; its root lies between two of the 2n clip breakpoints.
    """
    bps = np.unique(np.concatenate([(v - C) * y, v * y]))
    A = np.clip(v[None, :] - bps[:, None] * y[None, :], 0.0, C)
    g = A @ y
    k = int(np.searchsorted(-g, 0.0))  # first breakpoint with g <= 0
    if k == 0:
        mu = bps[0]
    elif k == len(bps):
        mu = bps[-1]
    else:
        g_lo, g_hi = g[k - 1], g[k]
        lo, hi = bps[k - 1], bps[k]
        mu = lo if g_lo == g_hi else lo + g_lo * (hi - lo) / (g_lo - g_hi)
    return np.clip(v - mu * y, 0.0, C)


def qp_oracle(X, y_pm, C, gamma, block=2000, max_blocks=200, rtol=1e-10):
    """Brute-force projected-gradient minimizer of the SVM dual."""
    K = rbf_matrix(X, gamma)
    Q = (y_pm[:, None] * y_pm[None, :]) * K
    step = 1.0 / (np.linalg.eigvalsh(Q).max() + 1e-9)
    a = np.zeros(len(y_pm))
    prev = np.inf
    for _ in range(max_blocks):
        for _ in range(block):
            a = project_feasible(a - step * (Q @ a - 1.0), y_pm, C)
        obj = float(0.5 * a @ Q @ a - a.sum())
        if abs(obj - prev) <= rtol * max(1.0, abs(obj)):
            break
        prev = obj
    return obj, a


def xor_layout(n_per_cluster=10, noise=0.08, seed=0):
    rng = np.random.default_rng(seed)
    centers = [(0, 0, -1), (1, 1, -1), (0, 1, 1), (1, 0, 1)]
    X, y = [], []
    for cx, cy, label in centers:
        X.append(rng.normal((cx, cy), noise, size=(n_per_cluster, 2)))
        y.extend([label] * n_per_cluster)
    return np.vstack(X), np.array(y, dtype=float)


def blobs(n, d=3, sep=2.0, seed=0):
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([
        rng.normal(0.0, 1.0, size=(half, d)),
        rng.normal(sep, 1.0, size=(n - half, d)),
    ])
    y01 = np.array([0] * half + [1] * (n - half))
    return X, y01


# --- SMO vs oracle ------------------------------------------------------------

def test_dual_objective_matches_qp_oracle_on_xor():
    X, y_pm = xor_layout()
    for C in (1.0, 10.0, 100.0):
        res = smo_solve(X, y_pm, C=C, gamma=0.5)
        assert res.converged
        ref, _ = qp_oracle(X, y_pm, C, gamma=0.5)
        assert res.objective == pytest.approx(ref, rel=1e-3, abs=1e-6)


@pytest.mark.parametrize("seed", [1, 2, 3, 4])
def test_dual_objective_matches_qp_oracle_on_blobs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 51))
    X, y01 = blobs(n, d=3, sep=1.5, seed=seed)
    y_pm = np.where(y01 == 1, 1.0, -1.0)
    res = smo_solve(X, y_pm, C=10.0, gamma=0.2)
    ref, _ = qp_oracle(X, y_pm, 10.0, gamma=0.2)
    assert res.converged
    assert res.objective == pytest.approx(ref, rel=1e-3, abs=1e-6)


def test_alpha_feasibility():
    X, y_pm = xor_layout(seed=3)
    res = smo_solve(X, y_pm, C=100.0, gamma=0.5)
    assert np.all(res.alpha >= -1e-12)
    assert np.all(res.alpha <= 100.0 + 1e-12)
    assert abs(res.alpha @ y_pm) < 1e-6


def test_kkt_conditions_at_tolerance():
    tol = 1e-3
    for seed in (0, 5, 9):
        X, y01 = blobs(60, d=4, sep=1.2, seed=seed)
        y_pm = np.where(y01 == 1, 1.0, -1.0)
        res = smo_solve(X, y_pm, C=10.0, gamma=0.3, tol=tol)
        K = rbf_matrix(X, 0.3)
        f = K @ (res.alpha * y_pm) + res.bias
        yf = y_pm * f
        slack = 1e-9
        at_zero = res.alpha <= 1e-12
        at_c = res.alpha >= 10.0 - 1e-12
        free = ~at_zero & ~at_c
        assert np.all(yf[at_zero] >= 1.0 - tol - slack)
        assert np.all(np.abs(yf[free] - 1.0) <= tol + slack)
        assert np.all(yf[at_c] <= 1.0 + tol + slack)


# --- the trained, calibrated model --------------------------------------------

def test_two_point_separable():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1])
    model = train_svm(X, y, C=100.0, gamma=0.5, cap=100, seed=0)
    assert len(model.sv_alpha) == 2  # both points support the margin
    f = model.decision_function(X)
    assert f[0] < 0 < f[1]


def test_scores_are_calibrated_probabilities():
    X, y = blobs(400, d=2, sep=3.0, seed=7)
    model = train_svm(X, y, C=10.0, gamma=0.5, cap=1000, seed=1)
    p = model.predict_scores(X)
    assert np.all((p > 0) & (p < 1))
    # strong separation: calibrated scores land on the right side
    assert p[y == 1].mean() > 0.9
    assert p[y == 0].mean() < 0.1


def test_deterministic_given_seed():
    X, y = blobs(120, d=3, sep=2.0, seed=11)
    a = train_svm(X, y, C=10.0, gamma=0.2, cap=80, seed=5)
    b = train_svm(X, y, C=10.0, gamma=0.2, cap=80, seed=5)
    np.testing.assert_array_equal(a.support_vectors, b.support_vectors)
    np.testing.assert_array_equal(a.dual_coef, b.dual_coef)
    assert a.bias == b.bias
    assert (a.platt_a, a.platt_b) == (b.platt_a, b.platt_b)


def test_cap_subsamples_stratified():
    y = np.array([0] * 900 + [1] * 100)
    rng = np.random.default_rng(0)
    keep = stratified_subsample(y, 100, rng)
    assert len(keep) == 100
    assert (y[keep] == 1).sum() == 10


def test_single_class_rejected():
    X = np.zeros((5, 2))
    with pytest.raises(TrainingError):
        train_svm(X, np.ones(5, dtype=int), cap=100)


def test_tiny_cap_rejected():
    X, y = blobs(10, seed=0)
    with pytest.raises(TrainingError):
        train_svm(X, y, cap=1)


def test_platt_recovers_direction():
    rng = np.random.default_rng(3)
    f = rng.normal(0, 2, 500)
    y = (f + rng.normal(0, 0.5, 500) > 0).astype(int)
    a, b = fit_platt(f, y)
    assert a < 0  # positive margins must map to high attack probability
    p = 1.0 / (1.0 + np.exp(a * f + b))
    assert p[y == 1].mean() > 0.7
    assert p[y == 0].mean() < 0.3


def test_model_rejects_wrong_width():
    X, y = blobs(40, d=3, seed=2)
    model = train_svm(X, y, C=10.0, gamma=0.2, cap=100, seed=0)
    from infuse.exceptions import ShapeError

    with pytest.raises(ShapeError):
        model.predict_scores(np.zeros((4, 5)))
