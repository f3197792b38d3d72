"""Text pipeline: tokenization, bigram injection, TF-IDF, term summaries.

The tokenizer splits on non-alphabetic characters, lowercases, and drops
tokens shorter than 2 characters. Bigram frequency is counted after
stopword removal so that pairs like "of the" never become compounds.
The TF-IDF matrix and the dictionary are built once per corpus and then
shared read-only across all sweep workers.
"""

from __future__ import annotations

import re
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

_TOKEN_SPLIT = re.compile(r"[^a-z]+")

MIN_TOKEN_LEN = 2


@dataclass
class Dictionary:
    """Ordered vocabulary with document frequencies and bigram flags."""

    terms: list[str]
    doc_freq: dict[str, int]
    is_bigram: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("dictionary terms must be unique")
        if not self.is_bigram:
            self.is_bigram = {t: "_" in t for t in self.terms}
        self.index = {t: i for i, t in enumerate(self.terms)}

    def __len__(self) -> int:
        return len(self.terms)


@dataclass
class TfIdfMatrix:
    values: sp.csr_matrix
    dictionary: Dictionary

    @property
    def shape(self):
        return self.values.shape


@dataclass
class TermCloud:
    """Weighted term list for one class label.

    mode "frequency" and "topic_weight" carry nonnegative weights;
    "weight_difference" weights are signed (gained > 0, lost < 0).
    """

    class_label: str
    entries: dict[str, float]
    mode: str = "frequency"

    def __post_init__(self):
        if self.mode not in ("frequency", "topic_weight", "weight_difference"):
            raise ValueError(f"unknown cloud mode {self.mode!r}")
        if self.mode != "weight_difference" and any(w < 0 for w in self.entries.values()):
            raise ValueError(f"negative weight in {self.mode} cloud")


def _split_tokens(doc: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(doc.lower()) if len(t) >= MIN_TOKEN_LEN]


def build_dictionary(
    docs: list[list[str]],
    min_df: int = 1,
    max_unigrams: int | None = None,
    max_bigrams: int | None = None,
) -> Dictionary:
    """Build a dictionary from tokenized docs.

    Terms below `min_df` are dropped. When caps are given, unigrams and
    bigrams are ranked by document frequency (ties: term ascending) and
    truncated separately.
    """
    df = Counter()
    for tokens in docs:
        df.update(set(tokens))
    retained = {t: c for t, c in df.items() if c >= min_df}
    if not retained:
        raise ValueError("empty vocabulary after filtering")

    unigrams = sorted(t for t in retained if "_" not in t)
    bigrams = sorted(t for t in retained if "_" in t)
    if max_unigrams is not None:
        unigrams = sorted(unigrams, key=lambda t: (-retained[t], t))[:max_unigrams]
        unigrams.sort()
    if max_bigrams is not None:
        bigrams = sorted(bigrams, key=lambda t: (-retained[t], t))[:max_bigrams]
        bigrams.sort()
    terms = unigrams + bigrams
    return Dictionary(terms=terms, doc_freq={t: retained[t] for t in terms})


def tokenize(
    corpus: list[str],
    stopwords: frozenset[str] | set[str] = frozenset(),
    min_df: int = 1,
    strip_patterns: tuple[str, ...] = (),
) -> tuple[list[list[str]], Dictionary]:
    """Tokenize a corpus and build its dictionary.

    Returns (tokenized docs, dictionary). Docs are filtered to the retained
    vocabulary, so a document may end up empty.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    docs = []
    for doc in corpus:
        for pattern in strip_patterns:
            doc = doc.replace(pattern, "")
        docs.append([t for t in _split_tokens(doc) if t not in stopwords])
    dictionary = build_dictionary(docs, min_df=min_df)
    vocab = set(dictionary.terms)
    docs = [[t for t in tokens if t in vocab] for tokens in docs]
    return docs, dictionary


def inject_bigrams(docs: list[list[str]], n_bigrams: int) -> list[list[str]]:
    """Append the corpus's most frequent adjacent pairs as compound tokens.

    The `n_bigrams` most frequent adjacent pairs (ties: pair ascending) are
    appended to each containing doc as underscore-joined tokens, one per
    occurrence. Original unigrams are always retained.
    """
    if n_bigrams <= 0:
        return [list(tokens) for tokens in docs]
    pair_counts = Counter()
    for tokens in docs:
        for a, b in zip(tokens, tokens[1:]):
            if "_" not in a and "_" not in b:
                pair_counts[(a, b)] += 1
    top = sorted(pair_counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n_bigrams]
    chosen = {pair for pair, _ in top}
    out = []
    for tokens in docs:
        extra = [
            f"{a}_{b}" for a, b in zip(tokens, tokens[1:]) if (a, b) in chosen
        ]
        out.append(list(tokens) + extra)
    return out


def build_tfidf(docs: list[list[str]], dictionary: Dictionary) -> TfIdfMatrix:
    """TF-IDF with smoothed idf = ln((1+n)/(1+df)) + 1 and L2-normalized rows.

    Documents that lost every token produce a zero row (with a warning).
    """
    n_docs = len(docs)
    n_terms = len(dictionary)
    rows, cols, vals = [], [], []
    empty = []
    for i, tokens in enumerate(docs):
        counts = Counter(t for t in tokens if t in dictionary.index)
        if not counts:
            empty.append(i)
            continue
        for term, c in counts.items():
            rows.append(i)
            cols.append(dictionary.index[term])
            vals.append(float(c))
    if empty:
        warnings.warn(f"{len(empty)} document(s) lost all tokens; zero rows kept")

    tf = sp.csr_matrix(
        (vals, (rows, cols)), shape=(n_docs, n_terms), dtype=np.float64
    )
    df = np.array([dictionary.doc_freq[t] for t in dictionary.terms], dtype=np.float64)
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
    weighted = tf.multiply(idf[None, :]).tocsr()
    norms = np.sqrt(np.asarray(weighted.multiply(weighted).sum(axis=1)).ravel())
    inv = np.where(norms > 0, 1.0 / np.where(norms > 0, norms, 1.0), 0.0)
    normalized = sp.diags(inv) @ weighted
    return TfIdfMatrix(values=normalized.tocsr(), dictionary=dictionary)


def class_term_frequencies(
    docs: list[list[str]], class_values: list[str]
) -> dict[str, TermCloud]:
    """Raw per-class term counts (one frequency cloud per class label)."""
    if len(docs) != len(class_values):
        raise ValueError("class attribute must label every doc")
    per_class: dict[str, Counter] = {}
    for tokens, label in zip(docs, class_values):
        per_class.setdefault(label, Counter()).update(tokens)
    return {
        label: TermCloud(
            class_label=label,
            entries={t: float(c) for t, c in sorted(counts.items())},
            mode="frequency",
        )
        for label, counts in per_class.items()
    }


def _top_terms(weights: np.ndarray, dictionary: Dictionary, top_n: int) -> list[int]:
    # Descending weight, ties broken by ascending term index.
    top_n = min(top_n, len(dictionary))
    order = np.lexsort((np.arange(len(weights)), -weights))
    return order[:top_n].tolist()


def topic_weight_cloud(
    h_row: np.ndarray, dictionary: Dictionary, top_n: int = 10, label: str = ""
) -> TermCloud:
    """Top-N terms of one topic-term row, weighted by the row values."""
    h_row = np.asarray(h_row, dtype=np.float64)
    if h_row.min(initial=0.0) < 0:
        raise ValueError("topic row must be nonnegative")
    idx = _top_terms(h_row, dictionary, top_n)
    return TermCloud(
        class_label=label,
        entries={dictionary.terms[i]: float(h_row[i]) for i in idx},
        mode="topic_weight",
    )


def transition_term_delta(
    h_from: np.ndarray,
    h_to: np.ndarray,
    dictionary: Dictionary,
    top_n: int = 10,
    label: str = "",
) -> dict:
    """Per-term weight change between two topic rows.

    Returns a dict with the difference cloud (top_n by |delta|) plus the
    four connector-tooltip lists: "from" / "to" (top_n by weight of each
    row) and "lost" / "gained" (delta < 0 / delta > 0, by magnitude).
    """
    h_from = np.asarray(h_from, dtype=np.float64)
    h_to = np.asarray(h_to, dtype=np.float64)
    if h_from.shape != h_to.shape or len(h_from) != len(dictionary):
        raise ValueError("rows must share the dictionary vocabulary")
    delta = h_to - h_from

    idx = _top_terms(np.abs(delta), dictionary, top_n)
    cloud = TermCloud(
        class_label=label,
        entries={
            dictionary.terms[i]: float(delta[i]) for i in idx if delta[i] != 0.0
        },
        mode="weight_difference",
    )
    lost_idx = [i for i in _top_terms(-delta, dictionary, len(dictionary)) if delta[i] < 0]
    gained_idx = [i for i in _top_terms(delta, dictionary, len(dictionary)) if delta[i] > 0]
    return {
        "cloud": cloud,
        "from": [dictionary.terms[i] for i in _top_terms(h_from, dictionary, top_n)],
        "to": [dictionary.terms[i] for i in _top_terms(h_to, dictionary, top_n)],
        "lost": [dictionary.terms[i] for i in lost_idx[:top_n]],
        "gained": [dictionary.terms[i] for i in gained_idx[:top_n]],
    }
