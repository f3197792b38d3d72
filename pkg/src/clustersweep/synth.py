"""Synthetic datasets with ground truth, plus the adjusted Rand index.

Three generators cover the three method families at desk scale: Gaussian
blobs (partition methods), two moons with uniform background noise (density
methods), and a planted-topic corpus with disjoint vocabularies (topic
modeling). Every generator is fully determined by its seed, so tests can
freeze expectations against exact samples.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

import numpy as np

from .model import ItemTable

_WORD_LETTERS = string.ascii_lowercase


@dataclass
class SyntheticSpec:
    """Parameters for one synthetic dataset.

    kind: one of "blobs", "moons_noise", "planted_topics".
    structure: kind-specific parameters, see the generator functions.
    """

    kind: str
    n_items: int
    seed: int = 0
    structure: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("blobs", "moons_noise", "planted_topics"):
            raise ValueError(f"unknown synthetic kind: {self.kind!r}")
        if self.n_items < 2:
            raise ValueError("n_items must be >= 2")


def generate(spec: SyntheticSpec) -> tuple[ItemTable, np.ndarray]:
    """Generate an ItemTable plus per-item true labels (noise = -1)."""
    if spec.kind == "blobs":
        return _blobs(spec)
    if spec.kind == "moons_noise":
        return _moons_noise(spec)
    return _planted_topics(spec)


def _blobs(spec: SyntheticSpec) -> tuple[ItemTable, np.ndarray]:
    p = spec.structure
    n_blobs = int(p.get("n_blobs", 3))
    separation = float(p.get("separation", 20.0))
    spread = float(p.get("spread", 1.0))
    dim = int(p.get("dim", 2))
    if n_blobs < 1 or n_blobs > spec.n_items:
        raise ValueError("need 1 <= n_blobs <= n_items")
    rng = np.random.default_rng(spec.seed)

    # Rejection-sample centers until all pairwise gaps reach `separation`
    # (in units of `spread`, so separation=20 means 20 sigma).
    box = separation * spread * max(2.0, n_blobs)
    for _ in range(1000):
        centers = rng.uniform(0.0, box, size=(n_blobs, dim))
        d = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
        np.fill_diagonal(d, np.inf)
        if d.min() >= separation * spread:
            break
    else:
        raise ValueError("could not place blob centers at requested separation")

    sizes = np.full(n_blobs, spec.n_items // n_blobs)
    sizes[: spec.n_items % n_blobs] += 1
    labels = np.repeat(np.arange(n_blobs), sizes)
    points = centers[labels] + rng.normal(0.0, spread, size=(spec.n_items, dim))

    table = ItemTable(
        kind="numeric",
        item_ids=[f"item-{i}" for i in range(spec.n_items)],
        features=points,
    )
    return table, labels


def _moons_noise(spec: SyntheticSpec) -> tuple[ItemTable, np.ndarray]:
    p = spec.structure
    noise_fraction = float(p.get("noise_fraction", 0.1))
    jitter = float(p.get("jitter", 0.05))
    if not 0.0 <= noise_fraction < 1.0:
        raise ValueError("noise_fraction must be in [0, 1)")
    rng = np.random.default_rng(spec.seed)

    n_noise = int(round(spec.n_items * noise_fraction))
    n_signal = spec.n_items - n_noise
    n_upper = n_signal // 2
    n_lower = n_signal - n_upper

    t_up = rng.uniform(0.0, np.pi, n_upper)
    upper = np.column_stack([np.cos(t_up), np.sin(t_up)])
    t_lo = rng.uniform(0.0, np.pi, n_lower)
    lower = np.column_stack([1.0 - np.cos(t_lo), 0.5 - np.sin(t_lo)])
    signal = np.vstack([upper, lower]) + rng.normal(0.0, jitter, size=(n_signal, 2))
    labels = np.concatenate([np.zeros(n_upper, int), np.ones(n_lower, int)])

    # Background noise scattered over a box slightly larger than the moons.
    lo, hi = signal.min(axis=0) - 0.3, signal.max(axis=0) + 0.3
    noise = rng.uniform(lo, hi, size=(n_noise, 2))
    points = np.vstack([signal, noise])
    labels = np.concatenate([labels, np.full(n_noise, -1)])

    table = ItemTable(
        kind="numeric",
        item_ids=[f"item-{i}" for i in range(spec.n_items)],
        features=points,
    )
    return table, labels


def _topic_word(topic: int, index: int) -> str:
    # Alphabetic 4-letter words: topic prefix letter + base-26 suffix,
    # so they survive a non-alphabetic-splitting tokenizer.
    suffix = ""
    v = index
    for _ in range(3):
        suffix = _WORD_LETTERS[v % 26] + suffix
        v //= 26
    return _WORD_LETTERS[topic] + suffix


def _planted_topics(spec: SyntheticSpec) -> tuple[ItemTable, np.ndarray]:
    p = spec.structure
    n_topics = int(p.get("n_topics", 4))
    vocab_size = int(p.get("vocab_per_topic", 25))
    doc_len = int(p.get("doc_len", 40))
    n_fillers = int(p.get("n_fillers", 10))
    filler_rate = float(p.get("filler_rate", 0.2))
    n_distinct = int(p.get("n_distinct", n_topics))
    if n_topics < 1 or n_topics > 25:
        raise ValueError("n_topics must be in 1..25")
    if n_distinct < 1 or n_distinct > n_topics:
        raise ValueError("n_distinct must be in 1..n_topics")
    rng = np.random.default_rng(spec.seed)

    # Vocabularies are disjoint across distinct topics; with n_distinct <
    # n_topics the extra topics reuse earlier vocabularies (redundant fit).
    vocabs = [
        [_topic_word(k % n_distinct, i) for i in range(vocab_size)]
        for k in range(n_topics)
    ]
    fillers = [_topic_word(25, i) for i in range(n_fillers)]

    labels = np.repeat(np.arange(n_topics), spec.n_items // n_topics)
    labels = np.concatenate([labels, np.arange(spec.n_items - len(labels))])
    labels = np.sort(labels)

    docs = []
    for t in labels:
        vocab = vocabs[int(t)]
        words = []
        for _ in range(doc_len):
            if n_fillers and rng.random() < filler_rate:
                words.append(fillers[rng.integers(n_fillers)])
            else:
                words.append(vocab[rng.integers(vocab_size)])
        docs.append(" ".join(words))

    table = ItemTable(
        kind="text",
        item_ids=[f"doc-{i}" for i in range(spec.n_items)],
        documents=docs,
    )
    return table, labels


def ari(labels_a, labels_b) -> float:
    """Adjusted Rand index via the pair-counting contingency formula."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape:
        raise ValueError("label arrays differ in length")
    n = a.size
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    contingency = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(contingency, (ai, bi), 1)

    def comb2(x):
        x = np.asarray(x, dtype=np.float64)
        return x * (x - 1.0) / 2.0

    sum_ij = comb2(contingency).sum()
    sum_a = comb2(contingency.sum(axis=1)).sum()
    sum_b = comb2(contingency.sum(axis=0)).sum()
    total = comb2(n)
    expected = sum_a * sum_b / total if total > 0 else 0.0
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        # Both labelings constant (or degenerate): define as 1 when the
        # partitions agree exactly, else 0.
        return 1.0 if sum_ij == max_index and sum_a == sum_b else 0.0
    return float((sum_ij - expected) / (max_index - expected))
