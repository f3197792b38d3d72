"""Per-iteration quality metrics and per-group tooltip statistics.

Each record entry carries its comparison direction so the display can
annotate arrows without a hardcoded table of its own. A metric that is
undefined for the current grouping (single group, k = n) is recorded
with value None rather than dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .coherence import DEFAULT_WINDOW, coherence_cv
from .model import NOISE_ID
from .text import Dictionary, _top_terms
from .uncertainty import silhouette_values

HIGHER = "higher_better"
LOWER = "lower_better"
INFO = "info"

SILHOUETTE_EXACT_LIMIT = 20_000
SAMPLE_SEED = 99

DIRECTIONS = {
    "sse": LOWER,
    "variance_explained_pct": HIGHER,
    "silhouette": HIGHER,
    "calinski_harabasz": HIGHER,
    "davies_bouldin": LOWER,
    "noise_pct": LOWER,
    "k_discovered": INFO,
    "silhouette_sampled": INFO,
    "reconstruction_pct": HIGHER,
    "frobenius": LOWER,
    "diversity": HIGHER,
    "mean_exclusivity": HIGHER,
    "mean_coherence_cv": HIGHER,
    "document_sparsity": HIGHER,
    "topic_sparsity": HIGHER,
}


@dataclass
class MetricEntry:
    value: float | None
    direction: str


MetricRecord = dict[str, MetricEntry]


def _centroids(X: np.ndarray, labels: np.ndarray, groups: np.ndarray) -> np.ndarray:
    return np.stack([X[labels == g].mean(axis=0) for g in groups])


def sse_and_variance(X: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """Within-group SSE and explained variance % over non-noise items."""
    mask = labels != NOISE_ID
    sub, sub_labels = X[mask], labels[mask]
    if len(sub) == 0:
        return 0.0, 0.0
    groups = np.unique(sub_labels)
    centroids = _centroids(sub, sub_labels, groups)
    sse = 0.0
    for g, c in zip(groups, centroids):
        member = sub[sub_labels == g]
        sse += float(np.sum((member - c) ** 2))
    tss = float(np.sum((sub - sub.mean(axis=0)) ** 2))
    explained = 0.0 if tss == 0 else 100.0 * (1.0 - sse / tss)
    return sse, explained


def calinski_harabasz(X: np.ndarray, labels: np.ndarray) -> float | None:
    """Between/within dispersion ratio; undefined at k = 1 or k = n."""
    mask = labels != NOISE_ID
    sub, sub_labels = X[mask], labels[mask]
    groups = np.unique(sub_labels)
    n, k = len(sub), len(groups)
    if k < 2 or k >= n:
        return None
    centroids = _centroids(sub, sub_labels, groups)
    overall = sub.mean(axis=0)
    between = sum(
        float(np.sum(sub_labels == g)) * float(np.sum((c - overall) ** 2))
        for g, c in zip(groups, centroids)
    )
    within = sum(
        float(np.sum((sub[sub_labels == g] - c) ** 2))
        for g, c in zip(groups, centroids)
    )
    if within == 0:
        return np.inf if between > 0 else None
    return float((between / (k - 1)) / (within / (n - k)))


def davies_bouldin(X: np.ndarray, labels: np.ndarray) -> float | None:
    """Mean worst-case cluster similarity; undefined at k = 1."""
    mask = labels != NOISE_ID
    sub, sub_labels = X[mask], labels[mask]
    groups = np.unique(sub_labels)
    k = len(groups)
    if k < 2:
        return None
    centroids = _centroids(sub, sub_labels, groups)
    spread = np.array(
        [
            float(np.mean(np.sqrt(np.sum((sub[sub_labels == g] - c) ** 2, axis=1))))
            for g, c in zip(groups, centroids)
        ]
    )
    diff = centroids[:, None, :] - centroids[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    worst = np.zeros(k)
    for i in range(k):
        with np.errstate(divide="ignore"):
            ratios = [
                (spread[i] + spread[j]) / dist[i, j] for j in range(k) if j != i
            ]
        worst[i] = max(ratios)
    return float(np.mean(worst))


def mean_silhouette(X: np.ndarray, labels: np.ndarray) -> tuple[float | None, bool]:
    """Mean non-noise silhouette; beyond the exact limit a stratified
    sample (fixed seed) stands in and the sampled flag is set."""
    labels = np.asarray(labels)
    mask = labels != NOISE_ID
    groups = np.unique(labels[mask])
    if len(groups) < 2:
        return None, False
    n = int(mask.sum())
    sampled = n > SILHOUETTE_EXACT_LIMIT
    if sampled:
        rng = np.random.default_rng(SAMPLE_SEED)
        keep = []
        idx_all = np.flatnonzero(mask)
        for g in groups:
            g_idx = np.flatnonzero(labels == g)
            quota = max(2, int(round(len(g_idx) / n * SILHOUETTE_EXACT_LIMIT)))
            if len(g_idx) > quota:
                g_idx = rng.choice(g_idx, size=quota, replace=False)
            keep.append(g_idx)
        idx = np.sort(np.concatenate(keep))
        X, labels = X[idx], labels[idx]
    else:
        idx = np.flatnonzero(mask)
        X, labels = X[idx], labels[idx]
    values = silhouette_values(X, labels)
    return float(np.nanmean(values)), sampled


def clustering_metrics(
    X: np.ndarray, labels: np.ndarray, density: bool = False
) -> MetricRecord:
    """The partition-family record; density methods add noise % and the
    discovered group count (informational, not a quality direction)."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    if len(np.unique(labels)) < 1:
        raise ValueError("at least one group required")
    sse, explained = sse_and_variance(X, labels)
    sil, sampled = mean_silhouette(X, labels)
    record = {
        "sse": MetricEntry(sse, DIRECTIONS["sse"]),
        "variance_explained_pct": MetricEntry(explained, DIRECTIONS["variance_explained_pct"]),
        "silhouette": MetricEntry(sil, DIRECTIONS["silhouette"]),
        "calinski_harabasz": MetricEntry(
            calinski_harabasz(X, labels), DIRECTIONS["calinski_harabasz"]
        ),
        "davies_bouldin": MetricEntry(
            davies_bouldin(X, labels), DIRECTIONS["davies_bouldin"]
        ),
    }
    if sampled:
        record["silhouette_sampled"] = MetricEntry(1.0, INFO)
    if density:
        noise_pct = 100.0 * float(np.mean(labels == NOISE_ID))
        k = len(np.unique(labels[labels != NOISE_ID]))
        record["noise_pct"] = MetricEntry(noise_pct, DIRECTIONS["noise_pct"])
        record["k_discovered"] = MetricEntry(float(k), DIRECTIONS["k_discovered"])
    return record


def hoyer_sparsity(rows: np.ndarray) -> float:
    """Mean Hoyer sparseness (√n − ‖x‖₁/‖x‖₂)/(√n − 1); zero rows count 0."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    n = rows.shape[1]
    if n < 2:
        return 0.0
    l1 = np.sum(np.abs(rows), axis=1)
    l2 = np.sqrt(np.sum(rows**2, axis=1))
    root = np.sqrt(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (root - l1 / l2) / (root - 1.0)
    s[l2 == 0] = 0.0
    return float(np.mean(np.clip(s, 0.0, 1.0)))


def topic_diversity(H: np.ndarray, dictionary: Dictionary, top_n: int = 10) -> float:
    """Distinct terms across all topics' top lists over K·top_n."""
    k = H.shape[0]
    union = set()
    for row in H:
        union.update(_top_terms(row, dictionary, top_n))
    return len(union) / (top_n * k)


def topic_exclusivity(H: np.ndarray, dictionary: Dictionary, top_n: int = 10) -> list[float]:
    """Per-topic mean of H[k,t]/Σ_k' H[k',t] over the topic's top terms."""
    H = np.asarray(H, dtype=np.float64)
    col_sums = H.sum(axis=0)
    out = []
    for k, row in enumerate(H):
        idx = _top_terms(row, dictionary, top_n)
        shares = []
        for t in idx:
            shares.append(0.0 if col_sums[t] == 0 else float(row[t] / col_sums[t]))
        out.append(float(np.mean(shares)) if shares else 0.0)
    return out


def diversity_contribution(
    H: np.ndarray, dictionary: Dictionary, topic: int, top_n: int = 10
) -> float:
    """Share of the topic's top terms claimed by no other topic's list."""
    own = set(_top_terms(H[topic], dictionary, top_n))
    others = set()
    for k in range(H.shape[0]):
        if k != topic:
            others.update(_top_terms(H[k], dictionary, top_n))
    return len(own - others) / len(own) if own else 0.0


def topic_metrics(
    V,
    W: np.ndarray,
    H: np.ndarray,
    docs: list[list[str]],
    dictionary: Dictionary,
    top_n: int = 10,
    window: int = DEFAULT_WINDOW,
) -> MetricRecord:
    """The topic-family record (Table rows for NMF iterations)."""
    values = V.values if hasattr(V, "values") else V
    if sp.issparse(values):
        dense = np.asarray(values.todense())
    else:
        dense = np.asarray(values, dtype=np.float64)
    residual = float(np.linalg.norm(dense - W @ H))
    v_norm = float(np.linalg.norm(dense))
    reconstruction = 100.0 * (1.0 - residual / v_norm) if v_norm > 0 else 0.0

    top_lists = [
        [dictionary.terms[i] for i in _top_terms(row, dictionary, top_n)] for row in H
    ]
    per_topic_cv = coherence_cv(top_lists, docs, window)
    labels = np.argmax(W, axis=1)
    sil, sampled = mean_silhouette(dense, labels)

    record = {
        "reconstruction_pct": MetricEntry(reconstruction, DIRECTIONS["reconstruction_pct"]),
        "frobenius": MetricEntry(residual, DIRECTIONS["frobenius"]),
        "diversity": MetricEntry(
            topic_diversity(H, dictionary, top_n), DIRECTIONS["diversity"]
        ),
        "mean_exclusivity": MetricEntry(
            float(np.mean(topic_exclusivity(H, dictionary, top_n))),
            DIRECTIONS["mean_exclusivity"],
        ),
        "mean_coherence_cv": MetricEntry(
            float(np.mean(per_topic_cv)), DIRECTIONS["mean_coherence_cv"]
        ),
        "document_sparsity": MetricEntry(hoyer_sparsity(W), DIRECTIONS["document_sparsity"]),
        "topic_sparsity": MetricEntry(hoyer_sparsity(H), DIRECTIONS["topic_sparsity"]),
        "silhouette": MetricEntry(sil, DIRECTIONS["silhouette"]),
    }
    if sampled:
        record["silhouette_sampled"] = MetricEntry(1.0, INFO)
    return record


def per_group_metrics(
    member_idx: np.ndarray,
    n_items: int,
    X: np.ndarray | None = None,
    representative: np.ndarray | None = None,
    topic_context: dict | None = None,
) -> dict[str, float]:
    """Tooltip statistics for one group.

    `topic_context` (for NMF groups) carries H, dictionary, topic index,
    docs, and optional top_n/window to add coherence, exclusivity, and
    diversity contribution.
    """
    member_idx = np.asarray(member_idx)
    if len(member_idx) == 0:
        raise ValueError("group is empty")
    out = {"prevalence": len(member_idx) / n_items, "size": float(len(member_idx))}
    if X is not None and representative is not None:
        d = np.sqrt(np.sum((X[member_idx] - representative) ** 2, axis=1))
        out["mean_distance"] = float(d.mean())
        out["max_distance"] = float(d.max())
    if topic_context is not None:
        H = topic_context["H"]
        dictionary = topic_context["dictionary"]
        topic = topic_context["topic"]
        top_n = topic_context.get("top_n", 10)
        terms = [dictionary.terms[i] for i in _top_terms(H[topic], dictionary, top_n)]
        cv = coherence_cv(
            [terms], topic_context["docs"], topic_context.get("window", DEFAULT_WINDOW)
        )
        out["coherence_cv"] = cv[0]
        out["exclusivity"] = topic_exclusivity(H, dictionary, top_n)[topic]
        out["diversity_contribution"] = diversity_contribution(
            H, dictionary, topic, top_n
        )
    return out
