"""Discrete AdaBoost over depth-1 decision stumps.

Stumps predict a sign for ``x[feature] <= threshold`` and its negation on
the other side; candidate thresholds are the midpoints between consecutive
distinct values plus a below-minimum sentinel (a constant predictor), so a
weighted error <= 0.5 always exists. Misclassified samples are up-weighted
by exp(stage weight) and the weight vector renormalized each round. A round
with zero error keeps its (clamped-weight) stump and stops; a round that
cannot beat 0.5 stops without adding a stage. The final score is the
logistic of the aggregated margin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import ShapeError, TrainingError

_EPS = 1e-10


@dataclass
class Stump:
    feature: int
    threshold: float
    left_sign: int  # prediction in {-1, +1} where x[feature] <= threshold

    def predict(self, X: np.ndarray) -> np.ndarray:
        side = X[:, self.feature] <= self.threshold
        return np.where(side, self.left_sign, -self.left_sign)


@dataclass
class AdaboostModel:
    stumps: list[Stump]
    betas: list[float]
    n_features: int

    def margin(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_features:
            raise ShapeError(f"expected width {self.n_features}, got {X.shape[1]}")
        m = np.zeros(X.shape[0])
        for stump, beta in zip(self.stumps, self.betas):
            m += beta * stump.predict(X)
        return m

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-self.margin(X)))


def best_stump(X: np.ndarray, y_pm: np.ndarray, w: np.ndarray) -> tuple[Stump, float]:
    """Minimum weighted-error stump; ties break toward the lowest feature
    index, then lowest threshold, then left_sign=+1."""
    n, d = X.shape
    best_err = np.inf
    best = None
    w_pos_total = float(w[y_pm == 1].sum())
    w_total = float(w.sum())
    for f in range(d):
        v = X[:, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        cuts = np.flatnonzero(vs[:-1] < vs[1:])
        # position p means left block = sorted rows [0..p]; -1 = empty left
        positions = np.concatenate([[-1], cuts])
        left_pos = np.concatenate([[0.0], np.cumsum((w * (y_pm == 1))[order])[cuts]])
        left_neg = (np.concatenate([[0.0], np.cumsum(w[order])[cuts]])) - left_pos
        # err(left predicts +1) = (left weight of -1) + (right weight of +1)
        err_plus = left_neg + (w_pos_total - left_pos)
        err_minus = w_total - err_plus
        for sign, errs in ((1, err_plus), (-1, err_minus)):
            pos = int(np.argmin(errs))
            err = float(errs[pos])
            if err < best_err:
                if positions[pos] < 0:
                    thr = float(vs[0]) - 1.0  # empty left side: constant stump
                else:
                    lo, hi = vs[positions[pos]], vs[positions[pos] + 1]
                    thr = float(lo + (hi - lo) / 2.0)
                    if thr >= hi:
                        thr = float(lo)
                best_err = err
                best = Stump(feature=f, threshold=thr, left_sign=sign)
    return best, best_err


def train_adaboost(
    X: np.ndarray, y: np.ndarray, estimators: int = 12, seed: int = 0
) -> AdaboostModel:
    """Boost stumps for up to ``estimators`` rounds.

    ``seed`` is accepted for interface symmetry; the algorithm itself is
    deterministic (no sampling).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ShapeError("X and y row counts differ")
    if X.shape[0] == 0:
        raise TrainingError("cannot boost on zero samples")
    if estimators < 1:
        raise TrainingError("need at least one boosting round")
    y_pm = np.where(y == 1, 1, -1)
    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    stumps: list[Stump] = []
    betas: list[float] = []
    for _ in range(estimators):
        stump, err = best_stump(X, y_pm, w)
        if err >= 0.5:
            break
        beta = 0.5 * np.log((1.0 - err) / max(err, _EPS))
        stumps.append(stump)
        betas.append(float(beta))
        if err == 0.0:
            break
        wrong = stump.predict(X) != y_pm
        w = w * np.exp(beta * wrong)
        w /= w.sum()
    return AdaboostModel(stumps=stumps, betas=betas, n_features=X.shape[1])
