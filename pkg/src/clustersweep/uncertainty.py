"""Per-item confidence and outlier indicators, both in [0, 1].

Membership near 1 marks a firmly placed item, near 0.5 a borderline
one. Outlier near 0 marks a core member. Every method family maps onto
the same two channels so the display never special-cases a method.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .methods import DbscanModel, HdbscanModel, KMeansModel, NmfModel
from .model import NOISE_ID


@dataclass
class UncertaintyRecord:
    item_id: int
    membership: float
    outlier: float

    def __post_init__(self):
        if not (0.0 <= self.membership <= 1.0 and 0.0 <= self.outlier <= 1.0):
            raise ValueError(
                f"indicator out of [0,1] for item {self.item_id}: "
                f"({self.membership}, {self.outlier})"
            )


def silhouette_values(X: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-item silhouette over non-noise items; noise positions get nan.

    Singleton-group items get silhouette 0 by convention.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    out = np.full(len(labels), np.nan)
    mask = labels != NOISE_ID
    sub = X[mask]
    sub_labels = labels[mask]
    groups = np.unique(sub_labels)
    if len(groups) < 2:
        raise ValueError("silhouette needs at least 2 non-noise groups")

    diff = sub[:, None, :] - sub[None, :, :]
    d = np.sqrt(np.sum(diff * diff, axis=2))
    sizes = {g: int(np.sum(sub_labels == g)) for g in groups}
    mean_to_group = np.stack(
        [d[:, sub_labels == g].mean(axis=1) for g in groups], axis=1
    )
    s = np.zeros(len(sub))
    for i in range(len(sub)):
        g_idx = int(np.flatnonzero(groups == sub_labels[i])[0])
        n_own = sizes[sub_labels[i]]
        if n_own == 1:
            s[i] = 0.0
            continue
        a = mean_to_group[i, g_idx] * n_own / (n_own - 1)  # exclude self
        b = np.min(np.delete(mean_to_group[i], g_idx))
        s[i] = 0.0 if max(a, b) == 0 else (b - a) / max(a, b)
    out[mask] = s
    return out


def membership_silhouette(X: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """(silhouette + 1) / 2 per item; noise items get 0.

    With fewer than 2 non-noise groups the indicator is undefined and
    every item gets 0.5 (with a warning).
    """
    labels = np.asarray(labels)
    non_noise_groups = np.unique(labels[labels != NOISE_ID])
    if len(non_noise_groups) < 2:
        warnings.warn("fewer than 2 groups; membership defaults to 0.5")
        return np.full(len(labels), 0.5)
    s = silhouette_values(X, labels)
    membership = (s + 1.0) / 2.0
    membership[labels == NOISE_ID] = 0.0
    return membership


def membership_nmf(w_row: np.ndarray) -> float:
    """Share of the dominant topic in the document's mixture."""
    w = np.asarray(w_row, dtype=np.float64)
    if w.min() < 0:
        raise ValueError("mixture weights must be nonnegative")
    total = w.sum()
    if total == 0:
        warnings.warn("all-zero topic mixture; membership defaults to 1/K")
        return 1.0 / len(w)
    return float(w.max() / total)


def outlier_distance_ratio(distances: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """d_i / max distance within the item's group; singleton groups → 0."""
    distances = np.asarray(distances, dtype=np.float64)
    labels = np.asarray(labels)
    out = np.zeros(len(labels))
    for g in np.unique(labels):
        idx = np.flatnonzero(labels == g)
        if len(idx) < 2:
            continue
        top = distances[idx].max()
        if top > 0:
            out[idx] = distances[idx] / top
    return out


def outlier_entropy(w_row: np.ndarray) -> float:
    """Normalized Shannon entropy H(w)/ln K of the topic mixture."""
    w = np.asarray(w_row, dtype=np.float64)
    if w.min() < 0:
        raise ValueError("mixture weights must be nonnegative")
    k = len(w)
    if k < 2:
        return 0.0
    total = w.sum()
    if total == 0:
        warnings.warn("all-zero topic mixture; outlier defaults to 1.0")
        return 1.0
    p = w / total
    nz = p[p > 0]
    h = -float(np.sum(nz * np.log(nz)))
    return min(h / np.log(k), 1.0)


def _medoid_distances(X: np.ndarray, model: DbscanModel) -> np.ndarray:
    d = np.zeros(len(model.labels))
    for g, medoid in model.medoids.items():
        idx = np.flatnonzero(model.labels == g)
        d[idx] = np.sqrt(np.sum((X[idx] - X[medoid]) ** 2, axis=1))
    return d


def uncertainty_for(method: str, model, X: np.ndarray | None = None) -> list[UncertaintyRecord]:
    """Dispatch to the method family's indicator pair."""
    if method == "kmeans":
        if not isinstance(model, KMeansModel):
            raise TypeError("method/model mismatch")
        membership = membership_silhouette(X, model.labels)
        outlier = outlier_distance_ratio(model.distances, model.labels)
    elif method == "dbscan":
        if not isinstance(model, DbscanModel):
            raise TypeError("method/model mismatch")
        membership = membership_silhouette(X, model.labels)
        outlier = outlier_distance_ratio(_medoid_distances(X, model), model.labels)
    elif method == "hdbscan":
        if not isinstance(model, HdbscanModel):
            raise TypeError("method/model mismatch")
        membership = np.asarray(model.probabilities, dtype=np.float64)
        outlier = np.asarray(model.glosh, dtype=np.float64)
    elif method == "nmf":
        if not isinstance(model, NmfModel):
            raise TypeError("method/model mismatch")
        membership = np.array([membership_nmf(row) for row in model.W])
        outlier = np.array([outlier_entropy(row) for row in model.W])
    else:
        raise ValueError(f"unknown method {method!r}")
    return [
        UncertaintyRecord(i, float(m), float(o))
        for i, (m, o) in enumerate(zip(membership, outlier))
    ]
