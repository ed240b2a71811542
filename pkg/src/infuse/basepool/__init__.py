"""Five heterogeneous base classifiers and their stacked decision pool.

Every model exposes ``predict_scores(X) -> p_attack`` on a common [0, 1]
probability scale and records the feature width it was trained on.
:func:`pool_scores` stacks the five score pairs into the 10-column decision
matrix consumed by the meta-learner, in fixed column order
(SVM, kNN, tree, forest, AdaBoost) x (normal, attack).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import ShapeError
from .adaboost import AdaboostModel, train_adaboost
from .forest import ForestModel, train_forest
from .knn import KnnModel, train_knn
from .svm import SvmModel, train_svm
from .tree import TreeModel, train_tree

#: Pool column order; column 2i is z_normal, 2i+1 is z_attack.
POOL_ORDER = ("svm", "knn", "tree", "forest", "adaboost")


@dataclass
class BasePool:
    """The trained base classifiers, in pool column order."""

    svm: SvmModel
    knn: KnnModel
    tree: TreeModel
    forest: ForestModel
    adaboost: AdaboostModel

    def models(self):
        return [getattr(self, name) for name in POOL_ORDER]


def pool_scores(pool: BasePool, X: np.ndarray) -> np.ndarray:
    """Stack the five (normal, attack) score pairs into an n x 10 matrix."""
    X = np.asarray(X, dtype=float)
    models = pool.models()
    widths = {m.n_features for m in models}
    if len(widths) != 1:
        raise ShapeError(f"base models disagree on feature width: {sorted(widths)}")
    if X.shape[1] not in widths:
        raise ShapeError(f"expected width {widths.pop()}, got {X.shape[1]}")
    Z = np.empty((X.shape[0], 2 * len(models)))
    for i, model in enumerate(models):
        p_attack = model.predict_scores(X)
        Z[:, 2 * i] = 1.0 - p_attack
        Z[:, 2 * i + 1] = p_attack
    return Z


__all__ = [
    "AdaboostModel",
    "BasePool",
    "ForestModel",
    "KnnModel",
    "POOL_ORDER",
    "SvmModel",
    "TreeModel",
    "pool_scores",
    "train_adaboost",
    "train_forest",
    "train_knn",
    "train_svm",
    "train_tree",
]
