"""Hierarchical density clustering with persistence-based selection.

Pipeline: core distances → mutual reachability graph → exact MST (Prim,
O(n²)) → single-linkage dendrogram → condensed tree at min_cluster_size
→ excess-of-mass cluster selection → per-item persistence probability
and density outlier score.

Duplicate points give zero merge distances, hence λ = ∞ levels; every
∞ − ∞ stability contribution is defined as 0 and probability at an
infinite density ceiling is 1.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..model import NOISE_ID


@dataclass
class CondensedNode:
    parent: int
    child: int
    lam: float
    size: int


@dataclass
class HdbscanModel:
    min_cluster_size: int
    min_samples: int
    labels: np.ndarray
    probabilities: np.ndarray
    glosh: np.ndarray
    condensed_tree: list[CondensedNode]
    stabilities: dict[int, float]
    core_distances: np.ndarray
    mst_edges: np.ndarray  # rows (a, b, weight), ascending by weight


def core_distances(X: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance to the min_samples-th nearest neighbor, self included."""
    d = _pairwise(X)
    d_sorted = np.sort(d, axis=1)
    k = min(min_samples, X.shape[0]) - 1
    return d_sorted[:, k]


def _pairwise(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2)


def mutual_reachability(X: np.ndarray, min_samples: int) -> np.ndarray:
    """d_mr(a,b) = max(core_a, core_b, d(a,b)); diagonal zero."""
    d = _pairwise(X)
    core = core_distances(X, min_samples)
    mr = np.maximum(d, np.maximum(core[:, None], core[None, :]))
    np.fill_diagonal(mr, 0.0)
    return mr


def minimum_spanning_tree(weights: np.ndarray) -> np.ndarray:
    """Prim's algorithm on a dense symmetric weight matrix.

    Returns edges (a, b, w) sorted ascending by (w, a, b), which fixes
    the dendrogram under ties.
    """
    n = weights.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    source = np.zeros(n, dtype=np.int64)
    in_tree[0] = True
    best[1:] = weights[0, 1:]
    edges = []
    for _ in range(n - 1):
        masked = np.where(in_tree, np.inf, best)
        nxt = int(np.argmin(masked))
        edges.append((source[nxt], nxt, best[nxt]))
        in_tree[nxt] = True
        improve = weights[nxt] < best
        improve &= ~in_tree
        best[improve] = weights[nxt][improve]
        source[improve] = nxt
    arr = np.array(
        [(min(a, b), max(a, b), w) for a, b, w in edges], dtype=np.float64
    )
    order = np.lexsort((arr[:, 1], arr[:, 0], arr[:, 2]))
    return arr[order]


def single_linkage(mst_edges: np.ndarray, n: int) -> np.ndarray:
    """scipy-style linkage rows (left, right, distance, size) from MST edges."""
    parent = np.arange(2 * n - 1, dtype=np.int64)
    size = np.ones(2 * n - 1, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    rows = np.empty((n - 1, 4))
    nxt = n
    for i, (a, b, w) in enumerate(mst_edges):
        ra, rb = find(int(a)), find(int(b))
        rows[i] = (min(ra, rb), max(ra, rb), w, size[ra] + size[rb])
        size[nxt] = size[ra] + size[rb]
        parent[ra] = parent[rb] = nxt
        nxt += 1
    return rows


def condense_tree(linkage: np.ndarray, min_cluster_size: int) -> list[CondensedNode]:
    """Collapse the dendrogram into clusters of at least min_cluster_size.

    Cluster ids start at n (the root). A child smaller than the minimum
    sheds all its points at the λ of the split; a surviving child either
    continues the parent's cluster or, when both survive, opens two new
    ones.
    """
    n = linkage.shape[0] + 1
    root = 2 * n - 2

    def children(node: int) -> tuple[int, int]:
        row = linkage[node - n]
        return int(row[0]), int(row[1])

    def node_size(node: int) -> int:
        return 1 if node < n else int(linkage[node - n][3])

    def leaves_under(node: int):
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur < n:
                yield cur
            else:
                stack.extend(children(cur))

    relabel = {root: n}
    next_label = n + 1
    result: list[CondensedNode] = []
    queue = deque([root])
    while queue:
        node = queue.popleft()
        if node < n:
            continue
        cluster = relabel[node]
        left, right = children(node)
        dist = linkage[node - n][2]
        lam = 1.0 / dist if dist > 0 else np.inf
        l_size, r_size = node_size(left), node_size(right)

        if l_size >= min_cluster_size and r_size >= min_cluster_size:
            for child, c_size in ((left, l_size), (right, r_size)):
                relabel[child] = next_label
                result.append(CondensedNode(cluster, next_label, lam, c_size))
                next_label += 1
                queue.append(child)
        elif l_size < min_cluster_size and r_size < min_cluster_size:
            for child in (left, right):
                for leaf in leaves_under(child):
                    result.append(CondensedNode(cluster, leaf, lam, 1))
        else:
            survivor, shed = (left, right) if l_size >= min_cluster_size else (right, left)
            relabel[survivor] = cluster
            for leaf in leaves_under(shed):
                result.append(CondensedNode(cluster, leaf, lam, 1))
            queue.append(survivor)
    return result


def _stability(tree: list[CondensedNode], n: int) -> dict[int, float]:
    births = {n: 0.0}
    for node in tree:
        if node.child >= n:
            births[node.child] = node.lam
    stab = {c: 0.0 for c in births}
    for node in tree:
        birth = births[node.parent]
        if np.isinf(node.lam) and np.isinf(birth):
            contribution = 0.0
        else:
            contribution = (node.lam - birth) * node.size
        stab[node.parent] += contribution
    return stab


def _excess_of_mass(tree: list[CondensedNode], stab: dict[int, float], n: int) -> list[int]:
    """Stability-maximizing flat cut; the root itself is never selected."""
    cluster_children: dict[int, list[int]] = {c: [] for c in stab}
    for node in tree:
        if node.child >= n:
            cluster_children[node.parent].append(node.child)

    stab = dict(stab)
    selected = {c: True for c in stab if c != n}
    for c in sorted(selected, reverse=True):  # leaves before parents
        child_total = sum(stab[ch] for ch in cluster_children[c])
        if cluster_children[c] and child_total > stab[c]:
            selected[c] = False
            stab[c] = child_total
        else:
            # unselect every descendant cluster
            stack = list(cluster_children[c])
            while stack:
                d = stack.pop()
                selected[d] = False
                stack.extend(cluster_children[d])
    return sorted(c for c, keep in selected.items() if keep)


def fit_hdbscan(
    X: np.ndarray, min_cluster_size: int, min_samples: int | None = None
) -> HdbscanModel:
    """Full hierarchy fit; fewer points than min_cluster_size → all noise."""
    X = np.asarray(X, dtype=np.float64)
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be at least 2")
    if min_samples is None:
        min_samples = min_cluster_size
    n = X.shape[0]
    if n < min_cluster_size:
        return HdbscanModel(
            min_cluster_size=min_cluster_size,
            min_samples=min_samples,
            labels=np.full(n, NOISE_ID, dtype=np.int64),
            probabilities=np.zeros(n),
            glosh=np.zeros(n),
            condensed_tree=[],
            stabilities={},
            core_distances=core_distances(X, min(min_samples, n)) if n else np.empty(0),
            mst_edges=np.empty((0, 3)),
        )

    mr = mutual_reachability(X, min_samples)
    mst = minimum_spanning_tree(mr)
    linkage = single_linkage(mst, n)
    tree = condense_tree(linkage, min_cluster_size)
    stab = _stability(tree, n)
    chosen = _excess_of_mass(tree, stab, n)

    cluster_parent = {}
    for node in tree:
        if node.child >= n:
            cluster_parent[node.child] = node.parent

    def owner(cluster: int) -> int | None:
        # at most one selected cluster lies on any root-to-leaf path
        cur = cluster
        while cur is not None:
            if cur in chosen:
                return cur
            cur = cluster_parent.get(cur)
        return None

    owner_cache = {c: owner(c) for c in stab}
    label_of_cluster = {c: i for i, c in enumerate(chosen)}

    labels = np.full(n, NOISE_ID, dtype=np.int64)
    point_lambda = np.zeros(n)
    point_cluster = np.full(n, -1, dtype=np.int64)
    for node in tree:
        if node.child < n:
            point_lambda[node.child] = node.lam
            point_cluster[node.child] = node.parent
            own = owner_cache[node.parent]
            if own is not None:
                labels[node.child] = label_of_cluster[own]

    # max fall-out λ per cluster over its whole subtree
    subtree_max: dict[int, float] = {c: 0.0 for c in stab}
    for node in tree:
        if node.child < n:
            cur = node.parent
            while cur is not None:
                subtree_max[cur] = max(subtree_max[cur], node.lam)
                cur = cluster_parent.get(cur)

    probabilities = np.zeros(n)
    glosh = np.zeros(n)
    for i in range(n):
        lam = point_lambda[i]
        if labels[i] != NOISE_ID:
            ceiling = subtree_max[owner_cache[point_cluster[i]]]
            if ceiling == 0.0 or np.isinf(ceiling):
                probabilities[i] = 1.0
            else:
                probabilities[i] = min(lam / ceiling, 1.0)
        ceiling = subtree_max[point_cluster[i]] if point_cluster[i] >= 0 else 0.0
        if ceiling > 0.0 and not np.isinf(ceiling):
            glosh[i] = min(max(1.0 - lam / ceiling, 0.0), 1.0)
        elif np.isinf(ceiling) and not np.isinf(lam):
            glosh[i] = 1.0

    return HdbscanModel(
        min_cluster_size=min_cluster_size,
        min_samples=min_samples,
        labels=labels,
        probabilities=probabilities,
        glosh=glosh,
        condensed_tree=tree,
        stabilities={c: stab[c] for c in chosen} if chosen else {},
        core_distances=core_distances(X, min_samples),
        mst_edges=mst,
    )
