"""Skip-gram word embeddings with negative sampling, trained from scratch.

Also covers the word2vec-style text vector format, a compact binary format,
averaged document vectors and cosine similarity.  Training is single-threaded
and deterministic under a fixed seed; that is the mode the tests rely on.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ModelMismatchError

_BINARY_MAGIC = b"FNEB"
_BINARY_VERSION = 1


@dataclass(frozen=True)
class Vocabulary:
    words: tuple[str, ...]
    word_to_index: dict[str, int]
    corpus_freq: np.ndarray   # total token occurrences per word
    doc_freq: np.ndarray      # documents containing the word
    min_doc_freq: int

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_index

    def index(self, word: str) -> int | None:
        return self.word_to_index.get(word)


@dataclass
class EmbeddingMatrix:
    """Input (word) and output (context) vectors, V x D each."""

    input_vectors: np.ndarray
    output_vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]


@dataclass(frozen=True)
class SkipgramConfig:
    dim: int = 300
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    lr: float = 0.025
    min_lr_factor: float = 1e-4
    subsample: float = 0.0    # 0 disables frequent-word subsampling
    seed: int = 0

    def validate(self) -> None:
        if self.dim <= 0:
            raise ValueError(f"embedding dimension must be positive, got {self.dim}")
        if self.window <= 0:
            raise ValueError(f"window must be positive, got {self.window}")
        if self.negatives < 1:
            raise ValueError(f"negatives must be >= 1, got {self.negatives}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


def build_vocab(corpus: list[list[str]], min_doc_freq: int = 5) -> Vocabulary:
    """Words occurring in at least ``min_doc_freq`` documents.

    Index order: descending corpus frequency, ties broken lexicographically.
    """
    if min_doc_freq < 1:
        raise ValueError(f"min_doc_freq must be >= 1, got {min_doc_freq}")
    if not corpus:
        raise DataError("cannot build a vocabulary from an empty corpus")
    cf: dict[str, int] = {}
    df: dict[str, int] = {}
    for doc in corpus:
        for w in doc:
            cf[w] = cf.get(w, 0) + 1
        for w in set(doc):
            df[w] = df.get(w, 0) + 1
    kept = [w for w, d in df.items() if d >= min_doc_freq]
    kept.sort(key=lambda w: (-cf[w], w))
    return Vocabulary(
        words=tuple(kept),
        word_to_index={w: i for i, w in enumerate(kept)},
        corpus_freq=np.array([cf[w] for w in kept], dtype=np.int64),
        doc_freq=np.array([df[w] for w in kept], dtype=np.int64),
        min_doc_freq=min_doc_freq,
    )


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sgns_step_objective(v_center: np.ndarray, u_context: np.ndarray,
                        u_negatives: np.ndarray) -> float:
    """Objective of one training step (to be maximized):

    log sigma(u_c . v_w) + sum_n log sigma(-u_n . v_w)
    """
    pos = np.log(_sigmoid(u_context @ v_center))
    neg = np.sum(np.log(_sigmoid(-(u_negatives @ v_center))))
    return float(pos + neg)


def sgns_step_gradients(v_center: np.ndarray, u_context: np.ndarray,
                        u_negatives: np.ndarray):
    """Analytic gradients of :func:`sgns_step_objective` w.r.t. all inputs."""
    s_pos = _sigmoid(u_context @ v_center)
    s_neg = _sigmoid(u_negatives @ v_center)
    g_center = (1.0 - s_pos) * u_context - s_neg @ u_negatives
    g_context = (1.0 - s_pos) * v_center
    g_negatives = -np.outer(s_neg, v_center)
    return g_center, g_context, g_negatives


def train_skipgram(corpus: list[list[str]], vocab: Vocabulary,
                   config: SkipgramConfig = SkipgramConfig(),
                   log=None) -> EmbeddingMatrix:
    """SGNS with a dynamic window and unigram^0.75 negative sampling.

    Returns the trained matrix; per-epoch mean objective is passed to ``log``
    (a callable taking (epoch, loss)) when provided.
    """
    config.validate()
    if len(vocab) == 0:
        raise DataError("empty vocabulary")
    docs = [[vocab.word_to_index[w] for w in doc if w in vocab.word_to_index] for doc in corpus]
    docs = [d for d in docs if len(d) >= 2]
    if not docs:
        raise DataError("corpus is empty after vocabulary filtering")

    rng = np.random.default_rng(config.seed)
    V, D = len(vocab), config.dim
    # word2vec-style init: small uniform input vectors, zero output vectors
    Vin = (rng.random((V, D)) - 0.5) / D
    Vout = np.zeros((V, D))

    noise = vocab.corpus_freq.astype(np.float64) ** 0.75
    noise /= noise.sum()
    keep_prob = None
    if config.subsample > 0:
        freq = vocab.corpus_freq / vocab.corpus_freq.sum()
        ratio = config.subsample / np.maximum(freq, 1e-12)
        keep_prob = np.minimum(1.0, np.sqrt(ratio) + ratio)

    total_positions = sum(len(d) for d in docs) * config.epochs
    seen = 0
    for epoch in range(config.epochs):
        loss_sum = 0.0
        loss_n = 0
        order = rng.permutation(len(docs))
        for di in order:
            doc = docs[di]
            if keep_prob is not None:
                doc = [w for w in doc if rng.random() < keep_prob[w]]
                if len(doc) < 2:
                    seen += len(doc)
                    continue
            for pos, center in enumerate(doc):
                lr = config.lr * max(config.min_lr_factor, 1.0 - seen / total_positions)
                span = int(rng.integers(1, config.window + 1))
                lo = max(0, pos - span)
                hi = min(len(doc), pos + span + 1)
                for ctx_pos in range(lo, hi):
                    if ctx_pos == pos:
                        continue
                    context = doc[ctx_pos]
                    negs = _sample_negatives(rng, noise, config.negatives)
                    v_w = Vin[center]
                    u_c = Vout[context]
                    u_n = Vout[negs]
                    loss_sum += -sgns_step_objective(v_w, u_c, u_n)
                    loss_n += 1
                    g_center, g_context, g_negs = sgns_step_gradients(v_w, u_c, u_n)
                    Vin[center] = v_w + lr * g_center
                    Vout[context] = u_c + lr * g_context
                    Vout[negs] += lr * g_negs
                seen += 1
        if log is not None:
            log(epoch, loss_sum / max(1, loss_n))
    return EmbeddingMatrix(input_vectors=Vin, output_vectors=Vout)


def _sample_negatives(rng, noise: np.ndarray, count: int) -> np.ndarray:
    return rng.choice(len(noise), size=count, p=noise)


def save_vectors_text(vocab: Vocabulary, matrix: EmbeddingMatrix, path) -> None:
    """word2vec text format: 'V D' header, then one 'word v1 .. vD' row per word."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(vocab)} {matrix.dim}\n")
        for i, word in enumerate(vocab.words):
            values = " ".join(f"{x:.9g}" for x in matrix.input_vectors[i])
            fh.write(f"{word} {values}\n")


def load_pretrained(path) -> tuple[Vocabulary, EmbeddingMatrix]:
    """Load text-format vectors; frequency metadata is not stored in this
    format, so the returned vocabulary carries zero counts."""
    words: list[str] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: expected 'V D' header")
        v_count, dim = int(header[0]), int(header[1])
        vectors = np.zeros((v_count, dim))
        seen = set()
        for row, line in enumerate(fh):
            parts = line.rstrip("\n").split(" ")
            if row >= v_count:
                raise DataError(f"{path}: more rows than the declared {v_count}")
            word = parts[0]
            if word in seen:
                raise DataError(f"{path}: duplicate word {word!r}")
            seen.add(word)
            values = parts[1:]
            if len(values) != dim:
                raise DataError(f"{path}: word {word!r} has {len(values)} values, expected {dim}")
            vectors[row] = [float(x) for x in values]
            words.append(word)
    if len(words) != v_count:
        raise DataError(f"{path}: declared {v_count} words, found {len(words)}")
    zeros = np.zeros(len(words), dtype=np.int64)
    vocab = Vocabulary(
        words=tuple(words),
        word_to_index={w: i for i, w in enumerate(words)},
        corpus_freq=zeros.copy(),
        doc_freq=zeros.copy(),
        min_doc_freq=1,
    )
    return vocab, EmbeddingMatrix(input_vectors=vectors, output_vectors=np.zeros_like(vectors))


def save_vectors_binary(vocab: Vocabulary, matrix: EmbeddingMatrix, path) -> None:
    """Compact format: magic, version, V, D, length-prefixed words, float32 LE data."""
    with open(path, "wb") as fh:
        fh.write(_BINARY_MAGIC)
        fh.write(struct.pack("<III", _BINARY_VERSION, len(vocab), matrix.dim))
        for word in vocab.words:
            raw = word.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
        fh.write(matrix.input_vectors.astype("<f4").tobytes())


def load_vectors_binary(path) -> tuple[Vocabulary, EmbeddingMatrix]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _BINARY_MAGIC:
            raise ModelMismatchError(f"{path}: not a binary embedding file")
        version, v_count, dim = struct.unpack("<III", fh.read(12))
        if version != _BINARY_VERSION:
            raise ModelMismatchError(f"{path}: unsupported embedding file version {version}")
        words = []
        for _ in range(v_count):
            (wlen,) = struct.unpack("<H", fh.read(2))
            words.append(fh.read(wlen).decode("utf-8"))
        data = np.frombuffer(fh.read(v_count * dim * 4), dtype="<f4")
        if data.size != v_count * dim:
            raise DataError(f"{path}: truncated vector data")
        vectors = data.astype(np.float64).reshape(v_count, dim)
    zeros = np.zeros(len(words), dtype=np.int64)
    vocab = Vocabulary(
        words=tuple(words),
        word_to_index={w: i for i, w in enumerate(words)},
        corpus_freq=zeros.copy(),
        doc_freq=zeros.copy(),
        min_doc_freq=1,
    )
    return vocab, EmbeddingMatrix(input_vectors=vectors, output_vectors=np.zeros_like(vectors))


def doc_vector(tokens: list[str], vocab: Vocabulary, matrix: EmbeddingMatrix) -> np.ndarray:
    """Mean input vector of in-vocabulary tokens; zero vector when none match."""
    idx = [vocab.word_to_index[t] for t in tokens if t in vocab.word_to_index]
    if not idx:
        return np.zeros(matrix.dim)
    return matrix.input_vectors[idx].mean(axis=0)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """u.v / (|u||v|); zero when either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v / (nu * nv))
