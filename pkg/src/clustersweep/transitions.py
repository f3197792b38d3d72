"""Item-overlap flows between iterations and categorical class exports.

Band widths between adjacent iteration axes are raw member
intersections; nothing is matched or optimized. Class attributes
materialize a selection (full iteration, one group's destinations, or a
single connector) as a per-item label column that survives export.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .model import NOISE_ID, GroupRecord, IterationResult, SweepRun


def group_label(iteration_key: str, group_id: int) -> str:
    suffix = "noise" if group_id == NOISE_ID else str(group_id)
    return f"{iteration_key}.{suffix}"


@dataclass
class TransitionMatrix:
    from_key: str
    to_key: str
    from_group_ids: list[int]
    to_group_ids: list[int]
    counts: np.ndarray

    def entry(self, from_id: int, to_id: int) -> int:
        i = self.from_group_ids.index(from_id)
        j = self.to_group_ids.index(to_id)
        return int(self.counts[i, j])


@dataclass
class ClassAttribute:
    name: str
    item_ids: list
    values: list[str]
    palette: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.item_ids) != len(self.values):
            raise ValueError("every item needs a label")

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for v in self.values:
            out[v] = out.get(v, 0) + 1
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"item_id,{self.name}\n")
        for item_id, value in zip(self.item_ids, self.values):
            buf.write(f"{item_id},{value}\n")
        return buf.getvalue()


def overlap(iter_a: IterationResult, iter_b: IterationResult) -> TransitionMatrix:
    """counts[i, j] = |members(group_i in a) ∩ members(group_j in b)|."""
    if iter_a.item_ids != iter_b.item_ids:
        raise ValueError("iterations cover different item sets")
    ids_a = [g.group_id for g in iter_a.groups]
    ids_b = [g.group_id for g in iter_b.groups]
    pos_a = {g: i for i, g in enumerate(ids_a)}
    pos_b = {g: j for j, g in enumerate(ids_b)}
    counts = np.zeros((len(ids_a), len(ids_b)), dtype=np.int64)
    for a_label, b_label in zip(iter_a.assignments, iter_b.assignments):
        counts[pos_a[int(a_label)], pos_b[int(b_label)]] += 1
    return TransitionMatrix(
        from_key=iter_a.iteration_key,
        to_key=iter_b.iteration_key,
        from_group_ids=ids_a,
        to_group_ids=ids_b,
        counts=counts,
    )


def class_full(
    iteration: IterationResult, palette: dict[str, str] | None = None
) -> ClassAttribute:
    """Every item labeled `<key>.<group>` for one iteration."""
    key = iteration.iteration_key
    values = [group_label(key, int(g)) for g in iteration.assignments]
    return ClassAttribute(
        name=f"color_{key}",
        item_ids=list(iteration.item_ids),
        values=values,
        palette=palette or {},
    )


def class_transition(
    from_iteration: IterationResult,
    from_group: GroupRecord,
    to_iteration: IterationResult,
    palette: dict[str, str] | None = None,
) -> ClassAttribute:
    """Members of one group labeled by destination, the rest "other"."""
    if from_iteration.item_ids != to_iteration.item_ids:
        raise ValueError("iterations cover different item sets")
    source = group_label(from_iteration.iteration_key, from_group.group_id)
    members = set(from_group.member_ids)
    values = []
    for item_id, to_g in zip(to_iteration.item_ids, to_iteration.assignments):
        if item_id in members:
            target = group_label(to_iteration.iteration_key, int(to_g))
            values.append(f"{source}→{target}")
        else:
            values.append("other")
    return ClassAttribute(
        name=f"transitions_{source}",
        item_ids=list(from_iteration.item_ids),
        values=values,
        palette=palette or {},
    )


def class_connector_detail(
    from_iteration: IterationResult,
    from_group: GroupRecord,
    to_iteration: IterationResult,
    to_group: GroupRecord,
    palette: dict[str, str] | None = None,
) -> ClassAttribute:
    """"left only" / "shared" / "right only" over the two groups' union."""
    if from_iteration.item_ids != to_iteration.item_ids:
        raise ValueError("iterations cover different item sets")
    left = set(from_group.member_ids)
    right = set(to_group.member_ids)
    values = []
    for item_id in from_iteration.item_ids:
        if item_id in left and item_id in right:
            values.append("shared")
        elif item_id in left:
            values.append("left only")
        elif item_id in right:
            values.append("right only")
        else:
            values.append("other")
    a = group_label(from_iteration.iteration_key, from_group.group_id)
    b = group_label(to_iteration.iteration_key, to_group.group_id)
    return ClassAttribute(
        name=f"connector_{a}_{b}",
        item_ids=list(from_iteration.item_ids),
        values=values,
        palette=palette or {},
    )


def visible_pairs(run: SweepRun, visible: dict[str, bool] | None = None) -> list[tuple[str, str]]:
    """Consecutive (from, to) pairs among currently visible iterations."""
    flags = visible if visible is not None else run.visible
    keys = [k for k in run.keys if flags.get(k, True)]
    if len(keys) < 2:
        raise ValueError("need at least 2 visible iterations")
    return list(zip(keys, keys[1:]))


class TransitionCache:
    """Lazy overlap matrices keyed by (from_key, to_key)."""

    def __init__(self, run: SweepRun):
        self.run = run
        self._cache: dict[tuple[str, str], TransitionMatrix] = {}

    def get(self, from_key: str, to_key: str) -> TransitionMatrix:
        key = (from_key, to_key)
        if key not in self._cache:
            self._cache[key] = overlap(
                self.run.iteration(from_key), self.run.iteration(to_key)
            )
        return self._cache[key]

    def for_visible(self) -> list[TransitionMatrix]:
        return [self.get(a, b) for a, b in visible_pairs(self.run)]
