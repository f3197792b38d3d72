"""Display geometry: embeddings, stable colors, axis orders, violins.

Colors come from one dedicated MDS layout over the pooled rows plus the
archetype centroids of every threshold in the sweep. Switching the
display projection or re-picking the threshold therefore never changes
any color: the color layout is computed once per run and only read
afterwards.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .archetypes import ArchetypeModel, PooledMatrix
from .model import NOISE_ID

CORNER_COLORS = {
    (0.0, 0.0): (255, 0, 0),  # red
    (1.0, 0.0): (255, 255, 0),  # yellow
    (0.0, 1.0): (0, 0, 255),  # blue
    (1.0, 1.0): (0, 255, 0),  # green
}
GRAY = (128, 128, 128)

VIOLIN_GRID_SIZE = 64
BANDWIDTH_FLOOR = 0.01

TSNE_ITERATIONS = 1000
TSNE_EXAGGERATION = 12.0


def _pairwise_sq(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def classical_mds(rows: np.ndarray, dims: int = 2) -> np.ndarray:
    """Torgerson scaling: double-center squared distances, take the top
    eigenpairs, scale by √λ (clamped at zero). Sign per axis is fixed by
    making the largest-magnitude coordinate positive."""
    rows = np.asarray(rows, dtype=np.float64)
    n = rows.shape[0]
    if n < dims + 1:
        raise ValueError(f"need at least {dims + 1} rows for {dims}D")
    if rows.ndim == 2 and rows.shape[0] == rows.shape[1] and np.allclose(rows, rows.T) and np.allclose(np.diag(rows), 0) and rows.min() >= 0 and not np.allclose(rows, 0):
        d2 = rows**2
    else:
        d2 = _pairwise_sq(rows)
    if np.allclose(d2, 0.0):
        warnings.warn("all rows identical; zero layout")
        return np.zeros((n, dims))
    centering = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * centering @ d2 @ centering
    eigvals, eigvecs = np.linalg.eigh(b)
    order = np.argsort(eigvals)[::-1][:dims]
    lams = np.clip(eigvals[order], 0.0, None)
    coords = eigvecs[:, order] * np.sqrt(lams)[None, :]
    for j in range(dims):
        pivot = np.argmax(np.abs(coords[:, j]))
        if coords[pivot, j] < 0:
            coords[:, j] = -coords[:, j]
    return coords


def joint_probabilities(X: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized t-SNE input affinities from a per-point entropy
    (binary) search for the bandwidth matching the target perplexity."""
    d2 = _pairwise_sq(np.asarray(X, dtype=np.float64))
    n = d2.shape[0]
    target = np.log(perplexity)
    p_cond = np.zeros((n, n))
    for i in range(n):
        di = np.delete(d2[i], i)
        beta, lo, hi = 1.0, 0.0, np.inf
        for _ in range(64):
            w = np.exp(-di * beta)
            total = w.sum()
            if total <= 0:
                entropy = 0.0
                p = np.zeros_like(w)
            else:
                p = w / total
                nz = p[p > 0]
                entropy = -float(np.sum(nz * np.log(nz)))
            if abs(entropy - target) < 1e-7:
                break
            if entropy > target:
                lo = beta
                beta = beta * 2 if hi == np.inf else (beta + hi) / 2
            else:
                hi = beta
                beta = (beta + lo) / 2
        p_cond[i, np.arange(n) != i] = p
    joint = (p_cond + p_cond.T) / (2.0 * n)
    return np.maximum(joint, 1e-12)


def kl_divergence(P: np.ndarray, Y: np.ndarray) -> float:
    """KL(P‖Q) of the current layout under the Student-t kernel."""
    w = 1.0 / (1.0 + _pairwise_sq(Y))
    np.fill_diagonal(w, 0.0)
    q = np.maximum(w / w.sum(), 1e-12)
    mask = ~np.eye(len(Y), dtype=bool)
    return float(np.sum(P[mask] * np.log(P[mask] / q[mask])))


def tsne_exact(
    rows: np.ndarray, dims: int = 2, perplexity: float = 30.0, seed: int = 0
) -> np.ndarray:
    """Exact-gradient t-SNE with PCA initialization.

    Early exaggeration ×12 for the first quarter, momentum 0.5 → 0.8,
    learning rate 200, per-parameter gains. An infeasible perplexity is
    clamped below (n−1)/3 with a warning.
    """
    rows = np.asarray(rows, dtype=np.float64)
    n = rows.shape[0]
    if n < 4:
        raise ValueError("need at least 4 rows")
    limit = (n - 1) / 3.0
    if perplexity >= limit:
        clamped = limit * (1.0 - 1e-9)
        warnings.warn(
            f"perplexity {perplexity} infeasible for {n} rows; clamped to {clamped:.3f}"
        )
        perplexity = clamped

    P = joint_probabilities(rows, perplexity)

    rng = np.random.default_rng(seed)
    centered = rows - rows.mean(axis=0)
    cov = centered.T @ centered / max(n - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:dims]
    basis = eigvecs[:, order]
    for j in range(basis.shape[1]):
        pivot = np.argmax(np.abs(basis[:, j]))
        if basis[pivot, j] < 0:
            basis[:, j] = -basis[:, j]
    Y = centered @ basis
    spread = Y[:, 0].std()
    if spread > 0:
        Y = Y / spread * 1e-4
    Y = Y + rng.normal(0.0, 1e-8, size=Y.shape)

    quarter = TSNE_ITERATIONS // 4
    # scale-aware rate; a fixed large rate overshoots on small row counts
    learning_rate = max(n / TSNE_EXAGGERATION / 4.0, 50.0)
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)
    for it in range(TSNE_ITERATIONS):
        p_eff = P * TSNE_EXAGGERATION if it < quarter else P
        w = 1.0 / (1.0 + _pairwise_sq(Y))
        np.fill_diagonal(w, 0.0)
        q = np.maximum(w / w.sum(), 1e-12)
        coeff = (p_eff - q) * w
        grad = 4.0 * (np.diag(coeff.sum(axis=1)) - coeff) @ Y

        momentum = 0.5 if it < quarter else 0.8
        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        velocity = momentum * velocity - learning_rate * gains * grad
        Y = Y + velocity
        Y = Y - Y.mean(axis=0)
    return Y


PROJECTION_PLUGINS: dict = {}


def project(rows: np.ndarray, method: str, dims: int = 2, seed: int = 0,
            perplexity: float = 30.0) -> np.ndarray:
    """Dispatch to mds, tsne, or a registered plugin(rows, dims, seed)."""
    if method == "mds":
        return classical_mds(rows, dims)
    if method == "tsne":
        return tsne_exact(rows, dims, perplexity=perplexity, seed=seed)
    if method.startswith("plugin:"):
        name = method.split(":", 1)[1]
        if name not in PROJECTION_PLUGINS:
            raise ValueError(f"no projection plugin {name!r}")
        return PROJECTION_PLUGINS[name](rows, dims, seed)
    raise ValueError(f"unknown projection method {method!r}")


def order_1d(pooled: PooledMatrix, positions_1d: np.ndarray) -> dict[str, list[int]]:
    """Per-iteration axis order: ascending 1D value, ties by group id,
    noise always last whatever its position."""
    per_key: dict[str, list[tuple[float, int]]] = {}
    for (key, group_id), value in zip(pooled.index, positions_1d):
        per_key.setdefault(key, []).append((float(value), group_id))
    out = {}
    for key, entries in per_key.items():
        entries.sort(key=lambda e: (e[1] == NOISE_ID, e[0], e[1]))
        out[key] = [group_id for _, group_id in entries]
    return out


def bilinear_color(x: float, y: float) -> tuple[int, int, int]:
    """Four-corner blend on the unit square."""
    x = min(max(x, 0.0), 1.0)
    y = min(max(y, 0.0), 1.0)
    acc = [0.0, 0.0, 0.0]
    weights = {
        (0.0, 0.0): (1 - x) * (1 - y),
        (1.0, 0.0): x * (1 - y),
        (0.0, 1.0): (1 - x) * y,
        (1.0, 1.0): x * y,
    }
    for corner, weight in weights.items():
        for c in range(3):
            acc[c] += CORNER_COLORS[corner][c] * weight
    return tuple(int(round(v)) for v in acc)


def rgb_to_hex(rgb: tuple[int, int, int]) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)


@dataclass
class ColorLayout:
    """The run's single source of color truth.

    Unit-square positions for every pooled row and for every archetype
    centroid of every swept threshold; all colors derive from these and
    nothing else.
    """

    row_uv: np.ndarray
    centroid_uv: dict[int, dict[int, tuple[float, float]]]  # threshold → id → (u,v)
    degenerate: bool = False

    def row_colors(self) -> list[tuple[int, int, int]]:
        if self.degenerate:
            return [GRAY for _ in self.row_uv]
        return [bilinear_color(u, v) for u, v in self.row_uv]

    def archetype_colors(self, threshold: int) -> dict[int, tuple[int, int, int]]:
        if threshold not in self.centroid_uv:
            raise KeyError(f"threshold {threshold} not in color layout")
        if self.degenerate:
            return {a: GRAY for a in self.centroid_uv[threshold]}
        return {
            a: bilinear_color(u, v)
            for a, (u, v) in self.centroid_uv[threshold].items()
        }


def build_color_layout(
    pooled: PooledMatrix, models_by_threshold: dict[int, ArchetypeModel]
) -> ColorLayout:
    """MDS over pooled rows plus every swept threshold's centroids,
    normalized to the unit square."""
    blocks = [pooled.rows]
    slots: list[tuple[int, int]] = []  # (threshold, archetype id) per extra row
    for threshold in sorted(models_by_threshold):
        model = models_by_threshold[threshold]
        for a in sorted(model.archetype_centroids):
            blocks.append(model.archetype_centroids[a][None, :])
            slots.append((threshold, a))
    stacked = np.vstack(blocks)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        positions = classical_mds(stacked, 2)

    lo = positions.min(axis=0)
    hi = positions.max(axis=0)
    span = hi - lo
    degenerate = bool(np.all(span <= 0))
    uv = np.empty_like(positions)
    for axis in range(2):
        if span[axis] > 0:
            uv[:, axis] = (positions[:, axis] - lo[axis]) / span[axis]
        else:
            uv[:, axis] = 0.5

    n_rows = pooled.n_rows
    centroid_uv: dict[int, dict[int, tuple[float, float]]] = {
        t: {} for t in models_by_threshold
    }
    for (threshold, archetype_id), (u, v) in zip(slots, uv[n_rows:]):
        centroid_uv[threshold][archetype_id] = (float(u), float(v))
    return ColorLayout(row_uv=uv[:n_rows], centroid_uv=centroid_uv, degenerate=degenerate)


@dataclass
class EmbeddingLayout:
    method: str
    positions_2d: np.ndarray
    positions_1d: np.ndarray
    colors: list[tuple[int, int, int]]
    archetype_colors: dict[int, tuple[int, int, int]]
    color_mode: str = "by_item"
    axis_orders: dict[str, list[int]] = field(default_factory=dict)


def build_embedding(
    pooled: PooledMatrix,
    method: str,
    color_layout: ColorLayout,
    model: ArchetypeModel | None,
    color_mode: str = "by_item",
    seed: int = 0,
    perplexity: float = 30.0,
) -> EmbeddingLayout:
    """Positions from the chosen method; colors strictly from the color
    layout (by_archetype rows without an archetype go gray)."""
    if color_mode not in ("by_item", "by_archetype"):
        raise ValueError(f"unknown color mode {color_mode!r}")
    positions_2d = project(pooled.rows, method, 2, seed, perplexity)
    positions_1d = project(pooled.rows, method, 1, seed, perplexity)[:, 0]

    if color_mode == "by_item":
        colors = color_layout.row_colors()
    elif model is None:
        raise ValueError("by_archetype coloring needs a detected model")
    else:
        by_archetype = color_layout.archetype_colors(model.threshold)
        colors = [
            by_archetype[int(a)] if a != NOISE_ID else GRAY
            for a in model.archetype_labels
        ]
    archetype_colors = (
        color_layout.archetype_colors(model.threshold) if model is not None else {}
    )
    return EmbeddingLayout(
        method=method,
        positions_2d=positions_2d,
        positions_1d=positions_1d,
        colors=colors,
        archetype_colors=archetype_colors,
        color_mode=color_mode,
        axis_orders=order_1d(pooled, positions_1d),
    )


@dataclass
class ViolinStats:
    iteration_key: str
    group_id: int
    channel: str
    grid: np.ndarray
    density: np.ndarray
    median: float
    q1: float
    q3: float
    width_scale: float
    render_as_bar: bool = False


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 · min(σ, IQR/1.34) · n^(−1/5), floored at 0.01."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if n < 2:
        return BANDWIDTH_FLOOR
    sigma = float(np.std(values, ddof=1))
    q1, q3 = np.quantile(values, [0.25, 0.75], method="linear")
    iqr = float(q3 - q1)
    candidates = [c for c in (sigma, iqr / 1.34) if c > 0]
    if not candidates:
        return BANDWIDTH_FLOOR
    h = 0.9 * min(candidates) * n ** (-0.2)
    return max(h, BANDWIDTH_FLOOR)


def _kde(values: np.ndarray, grid: np.ndarray, h: float) -> np.ndarray:
    z = (grid[:, None] - values[None, :]) / h
    return np.exp(-0.5 * z**2).sum(axis=1) / (len(values) * h * np.sqrt(2 * np.pi))


def violins(
    groups: dict[tuple[str, int], np.ndarray], channel: str
) -> list[ViolinStats]:
    """Comparable violin data for a set of groups.

    One bandwidth (Silverman over all pooled non-noise values) and one
    width scale (reciprocal of the global max density) serve every
    group, so widths are comparable across the whole run. Noise groups
    get quartiles only and a render-as-bar flag.
    """
    grid = np.linspace(0.0, 1.0, VIOLIN_GRID_SIZE)
    non_noise = [v for (_, g), v in groups.items() if g != NOISE_ID and len(v)]
    pooled = np.concatenate(non_noise) if non_noise else np.empty(0)
    h = silverman_bandwidth(pooled)

    densities: dict[tuple[str, int], np.ndarray] = {}
    for (key, group_id), values in groups.items():
        if group_id == NOISE_ID or len(values) == 0:
            densities[(key, group_id)] = np.zeros(VIOLIN_GRID_SIZE)
        else:
            densities[(key, group_id)] = _kde(np.asarray(values, dtype=np.float64), grid, h)

    global_max = max((d.max() for d in densities.values()), default=0.0)
    width_scale = 1.0 / global_max if global_max > 0 else 1.0

    out = []
    for (key, group_id), values in groups.items():
        values = np.asarray(values, dtype=np.float64)
        if len(values):
            q1, med, q3 = np.quantile(values, [0.25, 0.5, 0.75], method="linear")
        else:
            q1 = med = q3 = 0.0
        out.append(
            ViolinStats(
                iteration_key=key,
                group_id=group_id,
                channel=channel,
                grid=grid,
                density=densities[(key, group_id)],
                median=float(med),
                q1=float(q1),
                q3=float(q3),
                width_scale=width_scale,
                render_as_bar=group_id == NOISE_ID,
            )
        )
    return out
