"""Sliding-window C_V topic coherence.

Boolean co-occurrence over windows of 110 tokens (a shorter document is
one window), NPMI confirmation with one-set segmentation, and cosine
aggregation of the per-term context vectors.
"""

from __future__ import annotations

import warnings

import numpy as np

DEFAULT_WINDOW = 110
EPSILON = 1e-12


def window_occurrence(
    docs: list[list[str]], vocabulary: list[str], window: int = DEFAULT_WINDOW
) -> np.ndarray:
    """Boolean windows × terms incidence matrix.

    A document shorter than the window is a single window; otherwise
    every contiguous span of `window` tokens (step 1) is one window.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    index = {t: j for j, t in enumerate(vocabulary)}
    rows = []
    for tokens in docs:
        if len(tokens) <= window:
            spans = [tokens] if tokens else []
        else:
            spans = [tokens[i : i + window] for i in range(len(tokens) - window + 1)]
        for span in spans:
            row = np.zeros(len(vocabulary), dtype=bool)
            for t in span:
                j = index.get(t)
                if j is not None:
                    row[j] = True
            rows.append(row)
    if not rows:
        return np.zeros((0, len(vocabulary)), dtype=bool)
    return np.array(rows)


def npmi_matrix(occurrence: np.ndarray) -> np.ndarray:
    """Pairwise NPMI over window probabilities, ε-smoothed on the joint.

    A term with zero occurrences gets an all-zero row and column (with a
    warning); the diagonal of an occurring term is 1 by construction.
    """
    n_windows, n_terms = occurrence.shape
    if n_windows == 0:
        warnings.warn("no windows; NPMI undefined, returning zeros")
        return np.zeros((n_terms, n_terms))
    occ = occurrence.astype(np.float64)
    joint = (occ.T @ occ) / n_windows
    marginal = occ.mean(axis=0)

    missing = marginal == 0
    if missing.any():
        warnings.warn(f"{int(missing.sum())} term(s) never occur in any window")

    with np.errstate(divide="ignore", invalid="ignore"):
        log_joint = np.log(joint + EPSILON)
        pmi = log_joint - np.log(marginal)[:, None] - np.log(marginal)[None, :]
        npmi = pmi / (-log_joint)
    npmi[missing, :] = 0.0
    npmi[:, missing] = 0.0
    return npmi


def topic_coherence(npmi: np.ndarray, term_idx: list[int]) -> float:
    """One-set segmentation: mean cosine of each term's NPMI context
    vector against the summed topic vector, over the topic's terms."""
    sub = npmi[np.ix_(term_idx, term_idx)]
    total = sub.sum(axis=0)
    sims = []
    for i in range(len(term_idx)):
        v = sub[i]
        nv, nt = np.linalg.norm(v), np.linalg.norm(total)
        sims.append(0.0 if nv == 0 or nt == 0 else float(v @ total / (nv * nt)))
    return float(np.mean(sims)) if sims else 0.0


def coherence_cv(
    top_terms: list[list[str]], docs: list[list[str]], window: int = DEFAULT_WINDOW
) -> list[float]:
    """Per-topic C_V coherence for the given top-term lists."""
    vocabulary = sorted({t for terms in top_terms for t in terms})
    if not vocabulary:
        return [0.0 for _ in top_terms]
    occurrence = window_occurrence(docs, vocabulary, window)
    npmi = npmi_matrix(occurrence)
    index = {t: j for j, t in enumerate(vocabulary)}
    return [
        topic_coherence(npmi, [index[t] for t in terms]) if terms else 0.0
        for terms in top_terms
    ]
