"""Random forest: bagged entropy trees over random feature subsets.

Each tree gets its own RNG stream derived from (forest seed, tree index),
drives its bootstrap draw and per-node feature sampling from that stream,
and is therefore reproducible bit-for-bit regardless of training order.
The forest score is the mean of per-tree leaf probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import ShapeError, TrainingError
from .tree import TreeModel, train_tree


@dataclass
class ForestModel:
    trees: list[TreeModel]
    max_features: int
    seed: int

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_features:
            raise ShapeError(f"expected width {self.n_features}, got {X.shape[1]}")
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict_scores(X)
        return acc / len(self.trees)


def train_forest(
    X: np.ndarray,
    y: np.ndarray,
    estimators: int = 39,
    max_features: int = 12,
    seed: int = 0,
) -> ForestModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if estimators < 1:
        raise TrainingError("a forest needs at least one tree")
    trees = []
    for t in range(estimators):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        boot = rng.integers(0, X.shape[0], size=X.shape[0])
        tree = train_tree(X[boot], y[boot], max_features=max_features, seed=rng)
        tree.seed = t
        trees.append(tree)
    return ForestModel(trees=trees, max_features=max_features, seed=seed)
