"""Binary decision tree with entropy splits and random feature subsets.

Nodes are stored as parallel arrays (feature, threshold, children, class
counts) rather than linked objects: prediction routes whole index blocks
down the tree with boolean masks, and serialization is a plain array dump.

Split search at a node sorts each candidate feature once and evaluates all
midpoint thresholds from prefix class counts. Ties in information gain break
deterministically toward the lowest feature index, then lowest threshold.
Growth stops when a node is pure, has fewer than ``min_split`` samples, or
no split has strictly positive gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import ShapeError, TrainingError

#: feature value for leaf slots in the node arrays
LEAF = -1


@dataclass
class TreeModel:
    feature: np.ndarray    # int, LEAF marks a leaf
    threshold: np.ndarray  # float, 0.0 at leaves
    left: np.ndarray       # int child ids, -1 at leaves
    right: np.ndarray
    counts: np.ndarray     # (n_nodes, 2) class counts of training rows
    n_features: int
    max_features: int
    seed: int

    def node_count(self) -> int:
        return len(self.feature)

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        """Attack probability = class-1 frequency of the reached leaf."""
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_features:
            raise ShapeError(f"expected width {self.n_features}, got {X.shape[1]}")
        out = np.empty(X.shape[0])
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if self.feature[node] == LEAF:
                c0, c1 = self.counts[node]
                out[idx] = c1 / (c0 + c1)
                continue
            goes_left = X[idx, self.feature[node]] <= self.threshold[node]
            stack.append((int(self.left[node]), idx[goes_left]))
            stack.append((int(self.right[node]), idx[~goes_left]))
        return out


def _entropy_from_counts(n1, n):
    """H of a binary distribution given positive count(s) and total(s)."""
    n1 = np.asarray(n1, dtype=float)
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = n1 / n
        q = 1.0 - p
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return h


def best_split(X, y, idx, feature_ids):
    """Best (gain, feature, threshold) over the given features; gain may be 0.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values. Returns (0.0, None, None) when no split strictly separates.
    """
    n = idx.size
    parent_h = float(_entropy_from_counts(y[idx].sum(), n))
    best = (0.0, None, None)
    for f in feature_ids:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        ys = y[idx][order]
        cuts = np.flatnonzero(vs[:-1] < vs[1:])
        if cuts.size == 0:
            continue
        c1 = np.cumsum(ys)
        total1 = c1[-1]
        nl = cuts + 1.0
        nr = n - nl
        l1 = c1[cuts]
        child_h = (nl * _entropy_from_counts(l1, nl) + nr * _entropy_from_counts(total1 - l1, nr)) / n
        gains = parent_h - child_h
        pos = int(np.argmax(gains))  # first max = lowest threshold
        gain = float(gains[pos])
        if gain > best[0]:
            lo, hi = vs[cuts[pos]], vs[cuts[pos] + 1]
            thr = lo + (hi - lo) / 2.0
            if thr >= hi:  # midpoint rounded onto the upper value
                thr = lo
            best = (gain, int(f), float(thr))
    return best


def train_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_features: int = 94,
    seed: int | np.random.Generator = 0,
    min_split: int = 2,
) -> TreeModel:
    """Grow a tree by greedy information gain until pure (or unsplittable)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ShapeError("X and y row counts differ")
    if X.shape[0] == 0:
        raise TrainingError("cannot grow a tree on zero samples")
    if max_features > X.shape[1]:
        raise TrainingError(f"max_features={max_features} exceeds width {X.shape[1]}")
    rng = np.random.default_rng(seed)
    d = X.shape[1]

    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node():
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append((0, 0))
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        n1 = int(y[idx].sum())
        counts[node] = (idx.size - n1, n1)
        if n1 in (0, idx.size) or idx.size < min_split:
            continue
        if max_features < d:
            cand = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            cand = np.arange(d)
        gain, f, thr = best_split(X, y, idx, cand)
        if f is None or gain <= 0.0:
            continue
        goes_left = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        lid, rid = new_node(), new_node()
        left[node] = lid
        right[node] = rid
        # right pushed first so the left branch is built first (stable ids)
        stack.append((rid, idx[~goes_left]))
        stack.append((lid, idx[goes_left]))

    return TreeModel(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        counts=np.asarray(counts, dtype=np.int64),
        n_features=d,
        max_features=max_features,
        seed=seed if isinstance(seed, int) else -1,
    )
