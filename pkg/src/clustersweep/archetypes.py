"""Recurrent-archetype detection over pooled group representatives.

Group vectors from every iteration are pooled (noise groups too, with a
flag), standardized, optionally PCA-reduced, L2-normalized, and
meta-clustered with HDBSCAN. A recurring shape across iterations shows
up as one meta-cluster: an archetype. The threshold sweep exposes how
the archetype count and the idiosyncratic share react to
min_cluster_size, so a plateau can be chosen deliberately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .methods.hdbscan import fit_hdbscan
from .model import NOISE_ID, SweepRun

PCA_MIN_FEATURES = 10
PCA_VARIANCE_TARGET = 0.95
META_MIN_SAMPLES_CAP = 5


@dataclass
class PooledMatrix:
    index: list[tuple[str, int]]  # (iteration_key, group_id) per row
    rows: np.ndarray
    is_noise: np.ndarray
    preprocessing: dict = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    def iteration_keys(self) -> list[str]:
        seen = []
        for key, _ in self.index:
            if key not in seen:
                seen.append(key)
        return seen


@dataclass
class ArchetypeModel:
    threshold: int
    archetype_labels: np.ndarray
    archetype_centroids: dict[int, np.ndarray]
    complete_iterations: list[str]
    probabilities: np.ndarray
    noise_archetype_ids: list[int]

    @property
    def n_archetypes(self) -> int:
        return len(self.archetype_centroids)

    @property
    def noise_pct(self) -> float:
        if len(self.archetype_labels) == 0:
            return 0.0
        return 100.0 * float(np.mean(self.archetype_labels == NOISE_ID))


def pool(run: SweepRun) -> PooledMatrix:
    """Stack every iteration's group representatives into one matrix.

    Columns are standardized (constant columns pass through), PCA kicks
    in above 10 features keeping ≥ 95 % variance, and rows end up on the
    unit sphere.
    """
    index: list[tuple[str, int]] = []
    vectors = []
    noise_flags = []
    for iteration in run.iterations:
        for group in iteration.groups:
            index.append((iteration.iteration_key, group.group_id))
            vectors.append(np.asarray(group.representative, dtype=np.float64))
            noise_flags.append(group.is_noise)
    if len(vectors) < 3:
        raise ValueError(f"only {len(vectors)} pooled rows; need at least 3")
    raw = np.stack(vectors)

    means = raw.mean(axis=0)
    stds = raw.std(axis=0)
    safe = np.where(stds > 0, stds, 1.0)
    standardized = (raw - means) / safe

    preprocessing = {"col_means": means, "col_stds": stds, "pca_basis": None,
                     "retained_dims": standardized.shape[1], "variance_ratio": 1.0}
    reduced = standardized
    if standardized.shape[1] > PCA_MIN_FEATURES:
        centered = standardized - standardized.mean(axis=0)
        cov = centered.T @ centered / max(len(centered) - 1, 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        eigvals, eigvecs = eigvals[order], eigvecs[:, order]
        total = eigvals.sum()
        if total > 0:
            cumulative = np.cumsum(eigvals) / total
            keep = int(np.searchsorted(cumulative, PCA_VARIANCE_TARGET) + 1)
            keep = min(keep, standardized.shape[1])
            basis = eigvecs[:, :keep]
            # deterministic sign: largest-magnitude loading positive
            for j in range(keep):
                pivot = np.argmax(np.abs(basis[:, j]))
                if basis[pivot, j] < 0:
                    basis[:, j] = -basis[:, j]
            reduced = centered @ basis
            preprocessing.update(
                pca_basis=basis,
                retained_dims=keep,
                variance_ratio=float(cumulative[keep - 1]),
            )

    norms = np.sqrt(np.sum(reduced**2, axis=1))
    normalized = reduced / np.where(norms > 0, norms, 1.0)[:, None]
    return PooledMatrix(
        index=index,
        rows=normalized,
        is_noise=np.array(noise_flags, dtype=bool),
        preprocessing=preprocessing,
    )


def default_threshold(n_iterations: int) -> int:
    """A pattern counts as recurrent when it appears in at least half
    the iterations."""
    return n_iterations // 2


def detect(pooled: PooledMatrix, min_cluster_size: int | None = None) -> ArchetypeModel:
    """Meta-cluster the pooled rows; each cluster is one archetype."""
    n_iterations = len(pooled.iteration_keys())
    if min_cluster_size is None:
        min_cluster_size = default_threshold(n_iterations)
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be at least 2")
    if min_cluster_size >= pooled.n_rows:
        raise ValueError(
            f"min_cluster_size {min_cluster_size} ≥ pooled row count {pooled.n_rows}"
        )

    meta = fit_hdbscan(
        pooled.rows,
        min_cluster_size=min_cluster_size,
        min_samples=min(min_cluster_size, META_MIN_SAMPLES_CAP),
    )
    labels = meta.labels
    centroids = {}
    noise_archetypes = []
    for a in sorted(set(labels[labels != NOISE_ID])):
        members = labels == a
        centroids[int(a)] = pooled.rows[members].mean(axis=0)
        if np.mean(pooled.is_noise[members]) > 0.5:
            noise_archetypes.append(int(a))

    model = ArchetypeModel(
        threshold=min_cluster_size,
        archetype_labels=labels,
        archetype_centroids=centroids,
        complete_iterations=[],
        probabilities=meta.probabilities,
        noise_archetype_ids=noise_archetypes,
    )
    model.complete_iterations = complete_iterations(pooled, model)
    return model


def complete_iterations(
    pooled: PooledMatrix, model: ArchetypeModel, ignore_noise_archetypes: bool = False
) -> list[str]:
    """Iterations whose groups cover every archetype id."""
    required = set(model.archetype_centroids)
    if ignore_noise_archetypes:
        required -= set(model.noise_archetype_ids)
    per_iteration: dict[str, set[int]] = {k: set() for k in pooled.iteration_keys()}
    for (key, _), label in zip(pooled.index, model.archetype_labels):
        if label != NOISE_ID:
            per_iteration[key].add(int(label))
    return [k for k in pooled.iteration_keys() if required <= per_iteration[k]]


def threshold_sweep(pooled: PooledMatrix) -> dict[int, ArchetypeModel]:
    """detect() at every threshold from 2 to N_iterations − 1."""
    n_iterations = len(pooled.iteration_keys())
    if pooled.n_rows < 3:
        raise ValueError("need at least 3 pooled rows")
    return {
        threshold: detect(pooled, threshold)
        for threshold in range(2, n_iterations)
    }


def sweep_curve(models: dict[int, ArchetypeModel]) -> list[dict]:
    """(threshold, archetype count, noise %) points, threshold ascending."""
    return [
        {
            "threshold": threshold,
            "n_archetypes": models[threshold].n_archetypes,
            "noise_pct": models[threshold].noise_pct,
        }
        for threshold in sorted(models)
    ]


def size_attribute(
    pooled: PooledMatrix,
    run: SweepRun,
    name: str,
    model: ArchetypeModel | None = None,
) -> np.ndarray:
    """Per-row dot-size channel, min-max scaled to [0,1].

    "size" = member count, "probability" = meta-cluster persistence
    (needs a detected model); any other name looks up per-group metrics.
    A degenerate range maps every row to 0.5.
    """
    values = np.zeros(pooled.n_rows)
    if name == "probability":
        if model is None:
            raise ValueError("probability needs a detected archetype model")
        values = np.asarray(model.probabilities, dtype=np.float64)
    else:
        for i, (key, group_id) in enumerate(pooled.index):
            group = run.iteration(key).group_by_id(group_id)
            if name == "size":
                values[i] = len(group.member_ids)
            elif name in group.per_group_metrics:
                values[i] = group.per_group_metrics[name]
            else:
                raise ValueError(f"unknown size attribute {name!r}")
    low, high = float(values.min()), float(values.max())
    if high == low:
        return np.full(pooled.n_rows, 0.5)
    return (values - low) / (high - low)
