"""Density-based clustering with a deterministic expansion order.

Items are scanned ascending by index; a border point is claimed by the
first cluster whose expansion reaches it. Neighborhoods are exact: a
uniform grid of cell size eps for inputs up to 3 dimensions, brute force
above that.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..model import NOISE_ID

GRID_MAX_DIM = 3


@dataclass
class DbscanModel:
    eps: float
    min_samples: int
    labels: np.ndarray
    core_flags: np.ndarray
    medoids: dict[int, int]


class _GridIndex:
    """Exact eps-neighborhood queries via a hash grid of cell size eps."""

    def __init__(self, X: np.ndarray, eps: float):
        self.X = X
        self.eps = eps
        self.cells: dict[tuple, list[int]] = {}
        keys = np.floor(X / eps).astype(np.int64)
        for i, key in enumerate(map(tuple, keys)):
            self.cells.setdefault(key, []).append(i)
        self.keys = keys
        dim = X.shape[1]
        self.offsets = np.stack(
            np.meshgrid(*([np.arange(-1, 2)] * dim), indexing="ij"), axis=-1
        ).reshape(-1, dim)

    def neighbors(self, i: int) -> np.ndarray:
        candidates = []
        base = self.keys[i]
        for off in self.offsets:
            candidates.extend(self.cells.get(tuple(base + off), ()))
        candidates = np.array(sorted(candidates), dtype=np.int64)
        d = np.sqrt(np.sum((self.X[candidates] - self.X[i]) ** 2, axis=1))
        return candidates[d <= self.eps]


class _BruteIndex:
    def __init__(self, X: np.ndarray, eps: float):
        self.X = X
        self.eps = eps

    def neighbors(self, i: int) -> np.ndarray:
        d = np.sqrt(np.sum((self.X - self.X[i]) ** 2, axis=1))
        return np.flatnonzero(d <= self.eps)


def _medoid(X: np.ndarray, member_idx: np.ndarray) -> int:
    """Member minimizing total distance to co-members (ties: lowest id)."""
    sub = X[member_idx]
    diff = sub[:, None, :] - sub[None, :, :]
    totals = np.sqrt(np.sum(diff * diff, axis=2)).sum(axis=1)
    return int(member_idx[int(np.argmin(totals))])


def fit_dbscan(X: np.ndarray, eps: float, min_samples: int) -> DbscanModel:
    """Core/border/noise expansion; d ≤ eps counts as inside, self included."""
    X = np.asarray(X, dtype=np.float64)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_samples < 1:
        raise ValueError("min_samples must be at least 1")
    n = X.shape[0]
    index = _GridIndex(X, eps) if X.shape[1] <= GRID_MAX_DIM else _BruteIndex(X, eps)

    neighborhoods = [index.neighbors(i) for i in range(n)]
    core_flags = np.array([len(nb) >= min_samples for nb in neighborhoods])

    labels = np.full(n, NOISE_ID, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    cluster = 0
    for start in range(n):
        if visited[start] or not core_flags[start]:
            continue
        # breadth-first expansion from the lowest-id unvisited core point
        queue = deque([start])
        visited[start] = True
        labels[start] = cluster
        while queue:
            p = queue.popleft()
            if not core_flags[p]:
                continue
            for q in neighborhoods[p]:
                if labels[q] == NOISE_ID:
                    labels[q] = cluster
                if not visited[q]:
                    visited[q] = True
                    queue.append(q)
        cluster += 1

    medoids = {}
    for c in range(cluster):
        medoids[c] = _medoid(X, np.flatnonzero(labels == c))
    noise_idx = np.flatnonzero(labels == NOISE_ID)
    if len(noise_idx):
        medoids[NOISE_ID] = _medoid(X, noise_idx)

    return DbscanModel(
        eps=eps,
        min_samples=min_samples,
        labels=labels,
        core_flags=core_flags,
        medoids=medoids,
    )
