"""Shared data model: input tables, per-configuration results, sweep containers.

Everything downstream reads or writes these containers. ItemTable and
completed IterationResults are treated as immutable after construction and
are shared freely across parallel workers.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

import numpy as np

NOISE_ID = -1

METHODS = ("nmf", "kmeans", "dbscan", "hdbscan")


@dataclass
class ItemTable:
    """The immutable input: a numeric feature matrix or a document corpus.

    Exactly one of `features` (numeric kind) / `documents` (text kind) is
    populated. `optional_attributes` are named per-item columns carried
    through untouched to export; the engine never interprets them.
    """

    kind: str
    item_ids: list[str]
    features: np.ndarray | None = None
    documents: list[str] | None = None
    optional_attributes: dict[str, list] = field(default_factory=dict)
    # Filled by validate_table for numeric tables; kept for provenance only,
    # never applied to new data.
    standardization: dict | None = None

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    def index_of(self) -> dict[str, int]:
        return {item_id: i for i, item_id in enumerate(self.item_ids)}


@dataclass
class GroupRecord:
    """One group of one iteration: members, representative vector, metrics."""

    group_id: int
    iteration_key: str
    member_ids: list[str]
    representative: np.ndarray
    is_noise: bool = False
    per_group_metrics: dict[str, float] = field(default_factory=dict)

    @property
    def label(self) -> str:
        tail = "noise" if self.is_noise else str(self.group_id)
        return f"{self.iteration_key}.{tail}"

    def __post_init__(self):
        if len(self.member_ids) == 0:
            raise ValueError("group has no members")
        if self.is_noise != (self.group_id == NOISE_ID):
            raise ValueError("is_noise must hold exactly for group_id == -1")


@dataclass
class IterationResult:
    """Full output of one parameter configuration.

    assignments/membership/outlier are aligned with `item_ids`; groups
    partition the item set with the noise group, if any, placed last.
    """

    iteration_key: str
    param_value: float
    item_ids: list[str]
    assignments: np.ndarray
    membership: np.ndarray
    outlier: np.ndarray
    groups: list[GroupRecord]
    iteration_metrics: dict = field(default_factory=dict)

    def group_by_id(self, group_id: int) -> GroupRecord:
        for g in self.groups:
            if g.group_id == group_id:
                return g
        raise KeyError(f"no group {group_id} in iteration {self.iteration_key}")


@dataclass
class SweepRun:
    """Ordered iterations plus the pooled/derived artifacts of one sweep."""

    method: str
    sweep_param: str
    iterations: list[IterationResult]
    pooled: object = None          # archetypes.PooledMatrix
    archetypes: object = None      # archetypes.ArchetypeModel
    layouts: dict = field(default_factory=dict)   # method name -> EmbeddingLayout
    visible: dict = field(default_factory=dict)   # iteration_key -> bool
    config: object = None
    table: ItemTable | None = None
    failures: list = field(default_factory=list)  # (key, error message)

    def iteration(self, key: str) -> IterationResult:
        for it in self.iterations:
            if it.iteration_key == key:
                return it
        raise KeyError(f"no iteration {key!r}")

    @property
    def keys(self) -> list[str]:
        return [it.iteration_key for it in self.iterations]


def validate_table(raw: ItemTable, strip_patterns: tuple[str, ...] = ()) -> ItemTable:
    """Validate and normalize an input table.

    Numeric tables are standardized per column (zero mean, unit variance,
    population std); constant columns are dropped with a warning. Text
    tables have the configured literal artifact patterns stripped.

    Raises ValueError on: fewer than 2 items, duplicate ids, non-finite
    features, an all-constant feature matrix, or an empty corpus.
    """
    if raw.n_items < 2:
        raise ValueError("table needs at least 2 items")
    if len(set(raw.item_ids)) != raw.n_items:
        raise ValueError("duplicate item ids")

    if raw.kind == "numeric":
        if raw.features is None or raw.documents is not None:
            raise ValueError("numeric table must have features and no documents")
        x = np.asarray(raw.features, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] != raw.n_items:
            raise ValueError("features must be a matrix with one row per item")
        if not np.all(np.isfinite(x)):
            raise ValueError("features contain non-finite values")
        means = x.mean(axis=0)
        stds = x.std(axis=0)
        keep = stds > 0
        if not keep.any():
            raise ValueError("all feature columns are constant")
        if not keep.all():
            dropped = np.flatnonzero(~keep).tolist()
            warnings.warn(f"dropping constant feature columns {dropped}")
        standardized = (x[:, keep] - means[keep]) / stds[keep]
        return ItemTable(
            kind="numeric",
            item_ids=list(raw.item_ids),
            features=standardized,
            optional_attributes=dict(raw.optional_attributes),
            standardization={
                "means": means[keep].tolist(),
                "stds": stds[keep].tolist(),
                "kept_columns": np.flatnonzero(keep).tolist(),
            },
        )

    if raw.kind == "text":
        if raw.documents is None or raw.features is not None:
            raise ValueError("text table must have documents and no features")
        if len(raw.documents) != raw.n_items:
            raise ValueError("documents must align with item_ids")
        docs = list(raw.documents)
        for pattern in strip_patterns:
            compiled = re.compile(pattern)
            docs = [compiled.sub(" ", d) for d in docs]
        if all(not d.strip() for d in docs):
            raise ValueError("corpus is empty after cleaning")
        return ItemTable(
            kind="text",
            item_ids=list(raw.item_ids),
            documents=docs,
            optional_attributes=dict(raw.optional_attributes),
        )

    raise ValueError(f"unknown table kind: {raw.kind!r}")


def assemble_iteration(
    iteration_key: str,
    param_value: float,
    item_ids: list[str],
    assignments: np.ndarray,
    membership: np.ndarray,
    outlier: np.ndarray,
    groups: list[GroupRecord],
    metrics: dict | None = None,
) -> IterationResult:
    """Assemble and check an IterationResult; reorders the noise group last.

    Raises ValueError if groups do not partition the item set, or if
    membership/outlier fall outside [0, 1].
    """
    n = len(item_ids)
    assignments = np.asarray(assignments)
    membership = np.asarray(membership, dtype=np.float64)
    outlier = np.asarray(outlier, dtype=np.float64)
    if not (len(assignments) == len(membership) == len(outlier) == n):
        raise ValueError("per-item arrays must align with item_ids")
    if membership.min(initial=0.0) < 0.0 or membership.max(initial=0.0) > 1.0:
        raise ValueError("membership outside [0, 1]")
    if outlier.min(initial=0.0) < 0.0 or outlier.max(initial=0.0) > 1.0:
        raise ValueError("outlier outside [0, 1]")

    seen: set[str] = set()
    total = 0
    id_set = set(item_ids)
    for g in groups:
        for m in g.member_ids:
            if m in seen:
                raise ValueError(f"item {m!r} assigned to more than one group")
            if m not in id_set:
                raise ValueError(f"unknown item id {m!r} in group {g.group_id}")
            seen.add(m)
        total += len(g.member_ids)
    if total != n:
        raise ValueError("groups do not cover the item set")

    index = {item_id: i for i, item_id in enumerate(item_ids)}
    for g in groups:
        for m in g.member_ids:
            if assignments[index[m]] != g.group_id:
                raise ValueError("assignments disagree with group membership")

    ordered = [g for g in groups if not g.is_noise] + [g for g in groups if g.is_noise]
    return IterationResult(
        iteration_key=iteration_key,
        param_value=param_value,
        item_ids=list(item_ids),
        assignments=assignments,
        membership=membership,
        outlier=outlier,
        groups=ordered,
        iteration_metrics=dict(metrics or {}),
    )
