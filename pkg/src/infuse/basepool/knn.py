"""k-nearest-neighbour scoring with inverse-distance weighting.

Fitting just stores the reference set. Scoring is the hot path: squared
distances are computed chunk by chunk through a BLAS matmul identity, and
chunks run on a thread pool (the matmul releases the GIL) with results
gathered in query order, so output is deterministic.

Neighbour selection is set-based: every reference tied with the k-th
distance is included, which makes predictions invariant under any
permutation of the reference rows. An exact match (distance 0) wins
outright: only zero-distance references vote in that case.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ShapeError, TrainingError


@dataclass
class KnnModel:
    X_ref: np.ndarray
    y_ref: np.ndarray
    k: int = 3
    _ref_sq: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.X_ref.shape[0] == 0:
            raise TrainingError("kNN needs at least one reference sample")
        if not 1 <= self.k <= self.X_ref.shape[0]:
            raise TrainingError(f"k={self.k} outside [1, {self.X_ref.shape[0]}]")
        self._ref_sq = np.einsum("ij,ij->i", self.X_ref, self.X_ref)

    @property
    def n_features(self) -> int:
        return self.X_ref.shape[1]

    def predict_scores(
        self, X: np.ndarray, chunk_size: int = 256, workers: int | None = None
    ) -> np.ndarray:
        """Attack probability per query row."""
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_features:
            raise ShapeError(f"query width {X.shape[1]} != reference width {self.n_features}")
        if workers is None:
            workers = min(4, os.cpu_count() or 1)
        chunks = [X[i : i + chunk_size] for i in range(0, X.shape[0], chunk_size)]
        if not chunks:
            return np.empty(0)
        if workers <= 1 or len(chunks) == 1:
            parts = [self._score_chunk(c) for c in chunks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(self._score_chunk, chunks))
        return np.concatenate(parts)

    def _score_chunk(self, Q: np.ndarray) -> np.ndarray:
        # ||q - r||^2 = ||q||^2 + ||r||^2 - 2 q.r  (approximate under rounding;
        # the small candidate set is re-measured exactly below)
        q_sq = np.einsum("ij,ij->i", Q, Q)
        d2 = q_sq[:, None] + self._ref_sq[None, :] - 2.0 * (Q @ self.X_ref.T)
        np.maximum(d2, 0.0, out=d2)
        kth = np.partition(d2, self.k - 1, axis=1)[:, self.k - 1]
        out = np.empty(Q.shape[0])
        for i in range(Q.shape[0]):
            cand = np.flatnonzero(d2[i] <= kth[i] * (1.0 + 1e-9) + 1e-12)
            exact = np.einsum("ij,ij->i", self.X_ref[cand] - Q[i], self.X_ref[cand] - Q[i])
            cut = np.partition(exact, self.k - 1)[self.k - 1] if exact.size > self.k else exact.max()
            keep = exact <= cut  # includes every reference tied at the k-th distance
            dist2 = exact[keep]
            labels = self.y_ref[cand[keep]]
            zero = dist2 == 0.0
            if zero.any():
                out[i] = labels[zero].mean()
            else:
                w = 1.0 / np.sqrt(dist2)
                out[i] = float(w[labels == 1].sum() / w.sum())
        return out


def train_knn(X: np.ndarray, y: np.ndarray, k: int = 3) -> KnnModel:
    """Store the reference set (lazy learner: all work happens at query time)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ShapeError("X and y row counts differ")
    return KnnModel(X_ref=X, y_ref=y, k=k)
