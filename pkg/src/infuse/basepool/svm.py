"""Soft-margin RBF SVM trained by sequential minimal optimization.

The dual problem

    min_a  0.5 a'Qa - sum(a)   s.t.  0 <= a_i <= C,  sum(a_i y_i) = 0,
    Q_ij = y_i y_j K(x_i, x_j),  K(x, z) = exp(-gamma ||x - z||^2)

is solved by repeatedly optimizing one maximal-violating pair chosen with
second-order gain, updating the cached gradient after each step. The
stopping rule bounds the duality-gap surrogate m(a) - M(a) by ``tol``,
which guarantees every KKT condition holds within ``tol`` for the reported
bias. Kernel rows are recomputed on demand through a small LRU cache.

Decision values are calibrated to probabilities with a logistic sigmoid fit
on margins of a held-out fold (fallback: the training margins themselves
when the data is too small to carve a stratified fold).
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ..exceptions import ShapeError, TrainingError

_TAU = 1e-12


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # rows of X with alpha > 0
    dual_coef: np.ndarray        # alpha_i * y_i per support vector
    sv_alpha: np.ndarray         # alpha_i per support vector
    sv_index: np.ndarray         # row ids into the fitted matrix
    bias: float
    gamma: float
    C: float
    platt_a: float
    platt_b: float
    n_features: int = 0

    def __post_init__(self):
        if self.n_features == 0:
            self.n_features = self.support_vectors.shape[1]

    def decision_function(self, X: np.ndarray, chunk_size: int = 2048) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_features:
            raise ShapeError(f"expected width {self.n_features}, got {X.shape[1]}")
        sv = self.support_vectors
        sv_sq = np.einsum("ij,ij->i", sv, sv)
        out = np.empty(X.shape[0])
        for lo in range(0, X.shape[0], chunk_size):
            q = X[lo : lo + chunk_size]
            q_sq = np.einsum("ij,ij->i", q, q)
            d2 = q_sq[:, None] + sv_sq[None, :] - 2.0 * (q @ sv.T)
            np.maximum(d2, 0.0, out=d2)
            out[lo : lo + q.shape[0]] = np.exp(-self.gamma * d2) @ self.dual_coef
        return out + self.bias

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        """Attack probability via the fitted sigmoid on decision values."""
        f = self.decision_function(X)
        return 1.0 / (1.0 + np.exp(self.platt_a * f + self.platt_b))


class _KernelCache:
    """LRU cache of RBF kernel rows against a fixed training matrix."""

    def __init__(self, X: np.ndarray, gamma: float, max_rows: int = 2048):
        self.X = X
        self.gamma = gamma
        self.sq = np.einsum("ij,ij->i", X, X)
        self.max_rows = max(8, max_rows)
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self.hits = 0
        self.misses = 0

    def row(self, i: int) -> np.ndarray:
        cached = self._rows.get(i)
        if cached is not None:
            self.hits += 1
            self._rows.move_to_end(i)
            return cached
        self.misses += 1
        d2 = self.sq + self.sq[i] - 2.0 * (self.X @ self.X[i])
        np.maximum(d2, 0.0, out=d2)
        row = np.exp(-self.gamma * d2)
        self._rows[i] = row
        if len(self._rows) > self.max_rows:
            self._rows.popitem(last=False)
        return row


@dataclass
class SmoResult:
    alpha: np.ndarray
    bias: float
    objective: float  # 0.5 a'Qa - sum(a), the minimized dual value
    iterations: int
    converged: bool


def smo_solve(
    X: np.ndarray,
    y_pm: np.ndarray,
    C: float,
    gamma: float,
    tol: float = 1e-3,
    max_iter: int = 500_000,
    cache_rows: int = 2048,
) -> SmoResult:
    """Run SMO to the maximal-violating-pair stopping rule.

    ``y_pm`` must be in {-1, +1}. Returns the full alpha vector, the bias
    (mean over free vectors, else the violating-pair midpoint), and the
    final dual objective value.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y_pm, dtype=float)
    n = X.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective at alpha = 0
    cache = _KernelCache(X, gamma, max_rows=cache_rows)
    pos = y > 0
    snap = 1e-12 * max(1.0, C)

    it = 0
    converged = False
    m_val = M_val = 0.0
    while it < max_iter:
        it += 1
        yg = -y * grad
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        yg_up = np.where(up, yg, -np.inf)
        i = int(np.argmax(yg_up))
        m_val = yg_up[i]
        yg_low = np.where(low, yg, np.inf)
        M_val = float(yg_low.min())
        if m_val - M_val <= tol:
            converged = True
            break

        K_i = cache.row(i)
        # second-order selection of the partner index
        diff = m_val - yg
        quad = np.maximum(2.0 - 2.0 * K_i, _TAU)  # K_tt = K_ii = 1 for RBF
        gain = np.where(low & (yg < m_val), diff * diff / quad, -np.inf)
        j = int(np.argmax(gain))

        K_j = cache.row(j)
        eta = max(2.0 - 2.0 * K_i[j], _TAU)
        s = y[i] * y[j]
        # errors E = f(x) - y expressed through the cached gradient
        e_i = y[i] * grad[i]
        e_j = y[j] * grad[j]
        a_j_old, a_i_old = alpha[j], alpha[i]
        if s < 0:
            L = max(0.0, a_j_old - a_i_old)
            H = min(C, C + a_j_old - a_i_old)
        else:
            L = max(0.0, a_i_old + a_j_old - C)
            H = min(C, a_i_old + a_j_old)
        a_j = float(np.clip(a_j_old + y[j] * (e_i - e_j) / eta, L, H))
        # snap to exact bounds so rounding dust never masquerades as a
        # movable variable in later working-set selections
        if a_j - L < snap:
            a_j = L
        elif H - a_j < snap:
            a_j = H
        a_i = a_i_old + s * (a_j_old - a_j)
        if a_i < snap:
            a_i = 0.0
        elif a_i > C - snap:
            a_i = C
        d_i, d_j = a_i - a_i_old, a_j - a_j_old
        if d_i == 0.0 and d_j == 0.0:
            # the selected pair cannot move at double precision; report
            # honestly whether the gap criterion was met
            converged = m_val - M_val <= tol
            break
        alpha[i], alpha[j] = a_i, a_j
        grad += (y[i] * d_i) * (y * K_i) + (y[j] * d_j) * (y * K_j)

    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(np.mean((-y * grad)[free]))
    else:
        bias = float((m_val + M_val) / 2.0)
    objective = float(0.5 * (alpha @ grad) - 0.5 * alpha.sum())
    return SmoResult(alpha=alpha, bias=bias, objective=objective, iterations=it,
                     converged=converged)


def fit_platt(decision: np.ndarray, y01: np.ndarray, max_iter: int = 200) -> tuple[float, float]:
    """Newton fit of P(attack | f) = 1 / (1 + exp(A f + B)).

    Regularized target probabilities keep the fit defined for tiny or
    one-sided folds.
    """
    f = np.asarray(decision, dtype=float)
    y01 = np.asarray(y01)
    prior1 = float((y01 == 1).sum())
    prior0 = float(len(y01) - prior1)
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(y01 == 1, hi, lo)
    a, b = 0.0, np.log((prior0 + 1.0) / (prior1 + 1.0))
    sigma_min = 1e-12
    for _ in range(max_iter):
        fab = a * f + b
        p = np.where(fab >= 0, np.exp(-fab) / (1.0 + np.exp(-fab)), 1.0 / (1.0 + np.exp(fab)))
        w = np.maximum(p * (1.0 - p), sigma_min)
        d = p - t
        g1 = float(np.dot(d, f))
        g0 = float(d.sum())
        if abs(g1) < 1e-10 and abs(g0) < 1e-10:
            break
        h11 = float(np.dot(w, f * f)) + 1e-12
        h01 = float(np.dot(w, f))
        h00 = float(w.sum()) + 1e-12
        det = h11 * h00 - h01 * h01
        if det <= 0:
            break
        # Newton step -H^-1 grad, written out for the 2x2 system
        da = (h00 * g1 - h01 * g0) / det
        db = (h11 * g0 - h01 * g1) / det
        # backtracking line search on the cross-entropy objective
        step = 1.0
        base = _platt_loss(a, b, f, t)
        while step >= 1e-10:
            na, nb = a + step * da, b + step * db
            if _platt_loss(na, nb, f, t) < base + 1e-12:
                a, b = na, nb
                break
            step /= 2.0
        else:
            break
    return a, b


def _platt_loss(a: float, b: float, f: np.ndarray, t: np.ndarray) -> float:
    fab = a * f + b
    # t*fab + log(1 + exp(-fab)) computed stably on both tails
    return float(np.sum(np.where(fab >= 0, t * fab + np.log1p(np.exp(-fab)),
                                 (t - 1.0) * fab + np.log1p(np.exp(fab)))))


def stratified_subsample(y: np.ndarray, cap: int, rng: np.random.Generator) -> np.ndarray:
    """Class-proportional row subset of size <= cap (largest remainder)."""
    n = len(y)
    if n <= cap:
        return np.arange(n)
    classes, counts = np.unique(y, return_counts=True)
    exact = counts * (cap / n)
    take = np.floor(exact).astype(int)
    rest = cap - take.sum()
    order = np.argsort(-(exact - take))
    take[order[:rest]] += 1
    picked = []
    for cls, k in zip(classes, take):
        idx = np.flatnonzero(y == cls)
        picked.append(rng.permutation(idx)[:k])
    return np.sort(np.concatenate(picked))


def train_svm(
    X: np.ndarray,
    y: np.ndarray,
    C: float = 100.0,
    gamma: float = 0.01,
    cap: int = 20_000,
    seed: int = 0,
    tol: float = 1e-3,
    max_iter: int = 500_000,
    calibration_fraction: float = 0.2,
) -> SvmModel:
    """Train the calibrated RBF SVM on at most ``cap`` stratified rows.

    The capped sample is split 80/20 (stratified, seeded): SMO runs on the
    80% side and the sigmoid calibration is fit on held-out decision values
    from the 20% side. Data too small to split that way is trained whole and
    calibrated on its own margins.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ShapeError("X and y row counts differ")
    if cap < 2:
        raise TrainingError(f"cap={cap} leaves nothing to train on")
    if np.unique(y).size < 2:
        raise TrainingError("SVM training needs both classes present")
    rng = np.random.default_rng(seed)
    keep = stratified_subsample(y, cap, rng)
    Xs, ys = X[keep], y[keep]

    fit_idx, cal_idx = _calibration_split(ys, calibration_fraction, rng)
    y_pm = np.where(ys == 1, 1.0, -1.0)
    result = smo_solve(Xs[fit_idx], y_pm[fit_idx], C=C, gamma=gamma, tol=tol,
                       max_iter=max_iter)
    sv = np.flatnonzero(result.alpha > 0)
    model = SvmModel(
        support_vectors=Xs[fit_idx][sv],
        dual_coef=result.alpha[sv] * y_pm[fit_idx][sv],
        sv_alpha=result.alpha[sv],
        sv_index=keep[fit_idx][sv],
        bias=result.bias,
        gamma=gamma,
        C=C,
        platt_a=0.0,
        platt_b=0.0,
        n_features=X.shape[1],
    )
    cal_rows = cal_idx if cal_idx.size else fit_idx
    a, b = fit_platt(model.decision_function(Xs[cal_rows]), ys[cal_rows])
    model.platt_a, model.platt_b = a, b
    return model


def _calibration_split(
    y: np.ndarray, fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Stratified (fit, calibration) split; empty calibration when infeasible."""
    n = len(y)
    if n < 10:
        return np.arange(n), np.array([], dtype=np.int64)
    cal_parts, fit_parts = [], []
    for cls in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == cls))
        k = int(round(fraction * len(idx)))
        if k < 1 or len(idx) - k < 1:
            return np.arange(n), np.array([], dtype=np.int64)
        cal_parts.append(idx[:k])
        fit_parts.append(idx[k:])
    return np.sort(np.concatenate(fit_parts)), np.sort(np.concatenate(cal_parts))
