"""Word-embedding tables: loading, similarity queries, and a small
negative-sampling skip-gram trainer for environments without a pre-trained
table.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .errors import ParseError, ValidationError


@dataclass
class EmbeddingTable:
    """Lower-cased vocabulary mapped to dense vectors of one fixed dimension.

    Lookups are case-insensitive; rows are stored in insertion order so that
    scans are deterministic.
    """

    dimension: int
    words: list[str] = field(default_factory=list)
    matrix: np.ndarray | None = None  # (len(words), dimension), float64
    duplicate_count: int = 0
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    @classmethod
    def from_pairs(cls, pairs, dimension: int | None = None) -> "EmbeddingTable":
        words, rows = [], []
        dup = 0
        index: dict[str, int] = {}
        for word, vec in pairs:
            word = word.lower()
            vec = np.asarray(vec, dtype=np.float64)
            if dimension is None:
                dimension = vec.shape[0]
            if vec.shape != (dimension,):
                raise ValidationError(
                    f"vector for {word!r} has length {vec.shape[0]}, expected {dimension}"
                )
            if word in index:
                dup += 1
                continue
            index[word] = len(words)
            words.append(word)
            rows.append(vec)
        if dimension is None:
            raise ValidationError("cannot build an embedding table with no rows")
        matrix = np.vstack(rows) if rows else np.zeros((0, dimension))
        return cls(
            dimension=dimension,
            words=words,
            matrix=matrix,
            duplicate_count=dup,
            _index=index,
        )

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._index

    def vector(self, word: str) -> np.ndarray:
        idx = self._index.get(word.lower())
        if idx is None:
            raise KeyError(word)
        return self.matrix[idx]

    def get(self, word: str) -> np.ndarray | None:
        idx = self._index.get(word.lower())
        return None if idx is None else self.matrix[idx]


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Read a word2vec-style text table: optional "count dim" header line,
    then one "word v1 ... vd" row per line."""
    pairs = []
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    dimension = int(parts[1])
                    continue  # header
                except ValueError:
                    pass
            word, values = parts[0], parts[1:]
            if dimension is None:
                dimension = len(values)
            if len(values) != dimension:
                raise ParseError(
                    f"{path}: line {lineno}: expected {dimension} values, got {len(values)}"
                )
            try:
                vec = [float(v) for v in values]
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: non-numeric value: {exc}") from exc
            pairs.append((word, vec))
    if dimension is None:
        raise ParseError(f"{path}: empty embedding file")
    return EmbeddingTable.from_pairs(pairs, dimension)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.words)} {table.dimension}\n")
        for word, row in zip(table.words, table.matrix):
            fh.write(word + " " + " ".join(repr(float(v)) for v in row) + "\n")


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValidationError(f"length mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValidationError("cosine undefined for a zero vector")
    return float(np.dot(u, v) / (nu * nv))


def nearest_neighbors(
    table: EmbeddingTable, word: str, k: int, min_sim: float = 0.0
) -> list[tuple[str, float]] | None:
    """Top-k most-similar words by exact full scan, the query excluded.

    Returns None when the query is out of vocabulary so callers can skip it.
    Ties are broken lexicographically for determinism.
    """
    word = word.lower()
    idx = table._index.get(word)
    if idx is None:
        return None
    if k <= 0:
        return []
    query = table.matrix[idx]
    qnorm = np.linalg.norm(query)
    if qnorm == 0.0:
        raise ValidationError(f"query vector for {word!r} is all-zero")
    norms = np.linalg.norm(table.matrix, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = table.matrix @ query / (norms * qnorm)
    scored = [
        (other, float(sims[i]))
        for i, other in enumerate(table.words)
        if i != idx and norms[i] > 0.0 and sims[i] >= min_sim
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]


@dataclass
class SkipgramConfig:
    dimension: int = 50
    window: int = 5
    negatives: int = 10
    epochs: int = 5
    learning_rate: float = 0.025
    min_count: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dimension < 1 or self.window < 1 or self.negatives < 1:
            raise ValidationError(
                "skip-gram config requires dimension, window and negatives >= 1"
            )


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def skipgram_softmax(center: np.ndarray, context: np.ndarray) -> np.ndarray:
    """Exact context probabilities exp(e'_w . e_c) / sum_w exp(e'_w . e_c).

    Intractable at real vocabulary sizes; negative sampling approximates it
    during training. Kept as a check utility for small vocabularies."""
    scores = context @ center
    scores = scores - scores.max()
    expz = np.exp(scores)
    return expz / expz.sum()


def train_skipgram(corpus: Corpus, config: SkipgramConfig) -> EmbeddingTable:
    """Train word vectors with skip-gram negative sampling.

    Each (center, context) pair inside the window gets one positive update
    and `config.negatives` negative updates drawn from the unigram^0.75
    distribution. Single-threaded so that a fixed seed gives a bitwise
    reproducible table; the context-side vectors are discarded.
    """
    sentences = [
        [tok.text.lower() for tok in sent.tokens]
        for doc in corpus
        for sent in doc.sentences
    ]
    counts = Counter(w for sent in sentences for w in sent)
    vocab = sorted(
        (w for w, c in counts.items() if c >= config.min_count),
        key=lambda w: (-counts[w], w),
    )
    if len(vocab) < 2:
        raise ValidationError(
            f"skip-gram needs a vocabulary of at least 2 words, got {len(vocab)}"
        )
    word_to_id = {w: i for i, w in enumerate(vocab)}
    v = len(vocab)
    d = config.dimension

    rng = np.random.default_rng(config.seed)
    center = (rng.random((v, d)) - 0.5) / d
    context = np.zeros((v, d))

    freq = np.array([counts[w] for w in vocab], dtype=np.float64) ** 0.75
    noise = freq / freq.sum()

    lr = config.learning_rate
    for _ in range(config.epochs):
        for sent in sentences:
            ids = [word_to_id[w] for w in sent if w in word_to_id]
            for pos, center_id in enumerate(ids):
                lo = max(0, pos - config.window)
                hi = min(len(ids), pos + config.window + 1)
                for ctx_pos in range(lo, hi):
                    if ctx_pos == pos:
                        continue
                    target = ids[ctx_pos]
                    u = center[center_id]
                    accum = np.zeros(d)
                    negatives = rng.choice(v, size=config.negatives, p=noise)
                    for label, out_id in [(1.0, target)] + [
                        (0.0, int(n)) for n in negatives
                    ]:
                        if label == 0.0 and out_id == target:
                            continue
                        out = context[out_id]
                        g = lr * (label - _sigmoid(float(np.dot(u, out))))
                        accum += g * out
                        context[out_id] = out + g * u
                    center[center_id] = u + accum
    return EmbeddingTable.from_pairs(zip(vocab, center), dimension=d)
