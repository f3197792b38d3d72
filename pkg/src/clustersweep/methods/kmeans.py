"""Lloyd's algorithm with k-means++ seeding.

An empty cluster is repaired by moving its center onto the point that is
currently farthest from its own centroid, which keeps the per-iteration
SSE trace non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-6


@dataclass
class KMeansModel:
    centroids: np.ndarray
    labels: np.ndarray
    distances: np.ndarray
    sse: float
    seed: int
    sse_trace: np.ndarray


def _plus_plus_init(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    first = rng.integers(n)
    centers[0] = X[first]
    closest_sq = np.sum((X - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = closest_sq.sum()
        if total <= 0:
            # remaining points coincide with chosen centers; any pick works
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=closest_sq / total)
        centers[k] = X[idx]
        closest_sq = np.minimum(closest_sq, np.sum((X - centers[k]) ** 2, axis=1))
    return centers


def _pairwise_to_centers(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - centers[None, :, :]
    return np.sum(diff * diff, axis=2)


def fit_kmeans(
    X: np.ndarray,
    K: int,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> KMeansModel:
    """Cluster rows of X into K groups.

    Convergence when the maximum center movement drops below `tol`.
    Final labels are each item's nearest centroid.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if K < 1 or K > n:
        raise ValueError(f"K={K} outside [1, {n}]")

    rng = np.random.default_rng(seed)
    centers = _plus_plus_init(X, K, rng)
    trace = []
    for _ in range(max_iter):
        d_sq = _pairwise_to_centers(X, centers)
        labels = np.argmin(d_sq, axis=1)
        trace.append(float(d_sq[np.arange(n), labels].sum()))

        new_centers = centers.copy()
        for k in range(K):
            mask = labels == k
            if mask.any():
                new_centers[k] = X[mask].mean(axis=0)
        empty = [k for k in range(K) if not (labels == k).any()]
        if empty:
            # farthest points from their own centroid become the new centers
            own = np.sqrt(d_sq[np.arange(n), labels])
            order = np.argsort(-own)
            for k, idx in zip(empty, order):
                new_centers[k] = X[idx]

        shift = float(np.max(np.sqrt(np.sum((new_centers - centers) ** 2, axis=1))))
        centers = new_centers
        if shift < tol:
            break

    d_sq = _pairwise_to_centers(X, centers)
    labels = np.argmin(d_sq, axis=1)
    distances = np.sqrt(d_sq[np.arange(n), labels])
    sse = float(np.sum(distances**2))
    return KMeansModel(
        centroids=centers,
        labels=labels,
        distances=distances,
        sse=sse,
        seed=seed,
        sse_trace=np.array(trace),
    )
