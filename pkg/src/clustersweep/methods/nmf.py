"""Nonnegative matrix factorization by multiplicative updates.

Minimizes ‖V − WH‖_F² with the Lee–Seung update pair. Initialization is
seeded uniform random so a seed sweep actually explores distinct optima;
a deterministic init would make seed sweeps vacuous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_EPS = 1e-12

DEFAULT_MAX_ITER = 400
DEFAULT_TOL = 1e-6


@dataclass
class NmfModel:
    W: np.ndarray
    H: np.ndarray
    K: int
    seed: int
    objective_trace: np.ndarray

    @property
    def assignments(self) -> np.ndarray:
        # argmax takes the lowest index on ties
        return np.argmax(self.W, axis=1)


def _frobenius_sq(V, W, H, v_sq: float) -> float:
    # ‖V−WH‖² = ‖V‖² − 2·tr(VᵀWH) + ‖WH‖², avoiding a dense n×m residual
    WtV = W.T @ V
    if sp.issparse(WtV):
        WtV = np.asarray(WtV.todense())
    cross = float(np.sum(WtV * H))
    gram = float(np.sum((W.T @ W) * (H @ H.T)))
    return max(v_sq - 2.0 * cross + gram, 0.0)


def fit_nmf(
    V,
    K: int,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> NmfModel:
    """Factor a nonnegative (sparse or dense) matrix into W @ H.

    Stops after `max_iter` update cycles or when the relative objective
    decrease falls below `tol`. The recorded trace is non-increasing.
    """
    values = V.values if hasattr(V, "values") else V
    n_docs, n_terms = values.shape
    if K < 2 or K > min(n_docs, n_terms):
        raise ValueError(f"K={K} outside [2, {min(n_docs, n_terms)}]")

    if sp.issparse(values):
        mean_v = values.sum() / (n_docs * n_terms)
        v_sq = float(values.multiply(values).sum())
    else:
        values = np.asarray(values, dtype=np.float64)
        if values.min() < 0:
            raise ValueError("input matrix must be nonnegative")
        mean_v = values.mean()
        v_sq = float(np.sum(values * values))

    rng = np.random.default_rng(seed)
    scale = np.sqrt(max(mean_v, _EPS) / K)
    W = rng.uniform(0.0, scale, size=(n_docs, K))
    H = rng.uniform(0.0, scale, size=(K, n_terms))

    trace = [_frobenius_sq(values, W, H, v_sq)]
    for _ in range(max_iter):
        WtV = W.T @ values
        if sp.issparse(WtV):
            WtV = np.asarray(WtV.todense())
        H *= WtV / ((W.T @ W) @ H + _EPS)

        VHt = values @ H.T
        if sp.issparse(VHt):
            VHt = np.asarray(VHt.todense())
        W *= VHt / (W @ (H @ H.T) + _EPS)

        obj = _frobenius_sq(values, W, H, v_sq)
        prev = trace[-1]
        trace.append(obj)
        if prev - obj < tol * max(prev, _EPS):
            break

    return NmfModel(W=W, H=H, K=K, seed=seed, objective_trace=np.array(trace))


def reconstruction_error(V, model: NmfModel) -> float:
    """Frobenius norm ‖V − WH‖_F of the final factorization."""
    values = V.values if hasattr(V, "values") else V
    if sp.issparse(values):
        v_sq = float(values.multiply(values).sum())
    else:
        v_sq = float(np.sum(np.asarray(values) ** 2))
    return float(np.sqrt(_frobenius_sq(values, model.W, model.H, v_sq)))
