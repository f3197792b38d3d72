"""The four sweepable grouping methods and their shared dispatch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import NOISE_ID
from .dbscan import DbscanModel, fit_dbscan, _medoid
from .hdbscan import HdbscanModel, fit_hdbscan
from .kmeans import KMeansModel, fit_kmeans
from .nmf import NmfModel, fit_nmf, reconstruction_error

__all__ = [
    "DbscanModel",
    "HdbscanModel",
    "KMeansModel",
    "NmfModel",
    "Representative",
    "fit_dbscan",
    "fit_hdbscan",
    "fit_kmeans",
    "fit_nmf",
    "group_representatives",
    "model_assignments",
    "reconstruction_error",
]


@dataclass
class Representative:
    group_id: int
    vector: np.ndarray
    is_noise: bool


def model_assignments(model) -> np.ndarray:
    """Item → group id for any fitted model (noise = -1)."""
    if isinstance(model, NmfModel):
        return model.assignments
    if isinstance(model, (KMeansModel, DbscanModel, HdbscanModel)):
        return np.asarray(model.labels, dtype=np.int64)
    raise TypeError(f"unknown model type {type(model).__name__}")


def group_representatives(model, method: str, X: np.ndarray | None = None) -> list[Representative]:
    """One vector per group, noise last and flagged.

    K-means → centroids; DBSCAN and HDBSCAN → medoids (including a
    medoid of the noise set when noise exists); NMF → topic-term rows.
    """
    if method == "kmeans":
        if not isinstance(model, KMeansModel):
            raise TypeError("method/model mismatch")
        return [
            Representative(k, model.centroids[k].copy(), False)
            for k in range(model.centroids.shape[0])
        ]
    if method == "nmf":
        if not isinstance(model, NmfModel):
            raise TypeError("method/model mismatch")
        return [Representative(k, model.H[k].copy(), False) for k in range(model.K)]
    if method == "dbscan":
        if not isinstance(model, DbscanModel):
            raise TypeError("method/model mismatch")
        if X is None:
            raise ValueError("dbscan representatives need the feature matrix")
        reps = [
            Representative(c, X[idx].copy(), c == NOISE_ID)
            for c, idx in sorted(model.medoids.items(), key=lambda kv: (kv[0] == NOISE_ID, kv[0]))
        ]
        return reps
    if method == "hdbscan":
        if not isinstance(model, HdbscanModel):
            raise TypeError("method/model mismatch")
        if X is None:
            raise ValueError("hdbscan representatives need the feature matrix")
        reps = []
        for c in sorted(set(model.labels[model.labels != NOISE_ID])):
            idx = np.flatnonzero(model.labels == c)
            reps.append(Representative(int(c), X[_medoid(X, idx)].copy(), False))
        noise_idx = np.flatnonzero(model.labels == NOISE_ID)
        if len(noise_idx):
            reps.append(Representative(NOISE_ID, X[_medoid(X, noise_idx)].copy(), True))
        return reps
    raise ValueError(f"unknown method {method!r}")
