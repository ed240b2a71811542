"""Train/test dataset-shift statistics.

The two-sample Kolmogorov-Smirnov statistic is the supremum gap between the
empirical distribution functions of the two samples; its p-value comes from
the asymptotic Kolmogorov distribution, which is adequate at the sample
sizes seen here (10^4 and up). A scalar headline statistic for multivariate
data is computed on the first principal-component projection (fit on the
training set), alongside per-feature statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, ShapeError


@dataclass
class KsResult:
    D: float
    n: int
    m: int
    p_value: float


def ecdf(sample: np.ndarray, x: float) -> float:
    """Right-continuous empirical CDF of a sorted sample at ``x``."""
    sample = np.asarray(sample)
    if sample.size == 0:
        raise DomainError("ecdf of an empty sample")
    return np.searchsorted(sample, x, side="right") / sample.size


def _kolmogorov_sf(lam: float, tol: float = 1e-12, max_terms: int = 100000) -> float:
    """Asymptotic two-sided tail: 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lam^2)."""
    if lam <= 0.0:
        return 1.0
    total = 0.0
    for k in range(1, max_terms + 1):
        term = 2.0 * math.exp(-2.0 * k * k * lam * lam)
        if term < tol:
            break
        total += term if k % 2 == 1 else -term
    return min(1.0, max(0.0, total))


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> KsResult:
    """Two-sample KS statistic and asymptotic p-value.

    The statistic is evaluated at every pooled sample point on both sides of
    each step, which covers every constant piece of the ECDF difference.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError("ks_two_sample requires two non-empty samples")
    n, m = a.size, b.size
    pooled = np.concatenate([a, b])
    ca_r = np.searchsorted(a, pooled, side="right")
    cb_r = np.searchsorted(b, pooled, side="right")
    ca_l = np.searchsorted(a, pooled, side="left")
    cb_l = np.searchsorted(b, pooled, side="left")
    gaps_r = np.abs(ca_r / n - cb_r / m)
    gaps_l = np.abs(ca_l / n - cb_l / m)
    d = float(max(gaps_r.max(), gaps_l.max()))
    lam = d * math.sqrt(n * m / (n + m))
    return KsResult(D=d, n=n, m=m, p_value=_kolmogorov_sf(lam))


@dataclass
class ShiftReport:
    """Per-feature KS results plus a scalar summary on the first PC."""

    per_feature: list[tuple[int, KsResult]]
    scalar: KsResult


def shift_report(
    train_X: np.ndarray,
    test_X: np.ndarray,
    numeric_cols: list[int] | None = None,
    seed: int = 0,
) -> ShiftReport:
    """KS per numeric column plus a headline KS on the first PC projection.

    The principal component is fit on the training matrix only, then both
    sets are projected onto it. ``numeric_cols`` restricts the per-feature
    table to min-max scaled columns (one-hot indicators are skipped); by
    default every column is tested.
    """
    train_X = np.asarray(train_X, dtype=float)
    test_X = np.asarray(test_X, dtype=float)
    if train_X.shape[1] != test_X.shape[1]:
        raise ShapeError(
            f"column mismatch: train has {train_X.shape[1]}, test has {test_X.shape[1]}"
        )
    cols = list(range(train_X.shape[1])) if numeric_cols is None else list(numeric_cols)
    per_feature = [(c, ks_two_sample(train_X[:, c], test_X[:, c])) for c in cols]
    components, mean = principal_components(train_X, n_components=1, seed=seed)
    scalar = ks_two_sample((train_X - mean) @ components[:, 0], (test_X - mean) @ components[:, 0])
    return ShiftReport(per_feature=per_feature, scalar=scalar)


def project_2d(matrix: np.ndarray, fit_on: np.ndarray, seed: int = 0) -> np.ndarray:
    """Project rows onto the top-2 principal components of ``fit_on``."""
    matrix = np.asarray(matrix, dtype=float)
    fit_on = np.asarray(fit_on, dtype=float)
    if fit_on.shape[0] < 2:
        raise DomainError("need at least 2 samples to fit a projection")
    if fit_on.shape[1] < 2:
        raise DomainError("need at least 2 columns to project to 2-D")
    components, mean = principal_components(fit_on, n_components=2, seed=seed)
    return (matrix - mean) @ components


def principal_components(
    X: np.ndarray, n_components: int, seed: int, tol: float = 1e-12, max_iter: int = 10000
) -> tuple[np.ndarray, np.ndarray]:
    """Top eigenvectors of the sample covariance, by deflated power iteration.

    Returns (components as columns, column mean of X). Signs are fixed so
    each component's largest-magnitude entry is positive, making the result
    deterministic for a given seed.
    """
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = (Xc.T @ Xc) / max(1, X.shape[0] - 1)
    rng = np.random.default_rng(seed)
    d = cov.shape[0]
    comps = np.zeros((d, n_components))
    work = cov.copy()
    for k in range(n_components):
        v = rng.standard_normal(d)
        for prev in range(k):  # keep iterates out of recovered subspace
            v -= (v @ comps[:, prev]) * comps[:, prev]
        norm = np.linalg.norm(v)
        v = v / norm if norm > 0 else np.eye(d)[:, k]
        lam = 0.0
        for _ in range(max_iter):
            w = work @ v
            wn = np.linalg.norm(w)
            if wn < 1e-300:  # deflated matrix is (numerically) zero
                v = _orthonormal_fallback(comps[:, :k], d, k)
                lam = 0.0
                break
            w /= wn
            if np.linalg.norm(w - v) < tol or np.linalg.norm(w + v) < tol:
                v = w
                lam = float(v @ work @ v)
                break
            v = w
        else:
            lam = float(v @ work @ v)
        for prev in range(k):  # re-orthonormalize against earlier components
            v -= (v @ comps[:, prev]) * comps[:, prev]
        vn = np.linalg.norm(v)
        # A norm far below 1 means the iterate fell back into the recovered
        # subspace (rank-deficient covariance); any orthonormal completion
        # is then a valid zero-variance component.
        v = v / vn if vn > 1e-8 else _orthonormal_fallback(comps[:, :k], d, k)
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        comps[:, k] = v
        work = work - lam * np.outer(v, v)
    return comps, mean


def _orthonormal_fallback(prev: np.ndarray, d: int, k: int) -> np.ndarray:
    """Deterministic unit vector orthogonal to the columns of ``prev``."""
    for i in range(d):
        v = np.zeros(d)
        v[i] = 1.0
        for j in range(k):
            v -= (v @ prev[:, j]) * prev[:, j]
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            return v / norm
    raise DomainError("could not build an orthonormal component")
