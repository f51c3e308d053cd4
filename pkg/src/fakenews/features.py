"""Hand-crafted article features and the assembled feature vector.

Eight groups in a fixed order: PMI-lexicon scores (48), readability (4),
orthographic (12), irregular vocabulary (4), TF.IDF (800 content + 300
title), grammatical (20), embedding (2 x dim + 1), and the optional
task-specific network embedding.  With the default 300-d word vectors and
128-d task embedding the assembled lengths are 1,789 and 1,917.

Every empty-field convention maps to 0 so vectors stay finite.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np

from .corpus import Article, Dataset
from .embeddings import EmbeddingMatrix, Vocabulary, cosine, doc_vector
from .errors import DataError, ModelMismatchError
from .resources import LEXICON_KINDS, PMI_CLASSES, ScoredLexicon, StaticLexicon, occurrences
from .textproc import (
    LanguageProfile,
    coarse_pos_tag,
    count_syllables,
    is_url_token,
    split_sentences,
    tokenize,
)

logger = logging.getLogger(__name__)

GROUP_ORDER = ("pmi", "readability", "orthographic", "irregular",
               "tfidf", "grammatical", "embedding", "task_embedding")
HAND_CRAFTED_GROUPS = GROUP_ORDER[:-1]

SYMBOL_SET = frozenset("$.!;#?:-+@%^&*(),")

_MODEL_HEADER = "# fakenews feature-model v1"


# ---------------------------------------------------------------------------
# Individual feature groups
# ---------------------------------------------------------------------------

def pmi_features(article: Article, lexicons: dict[str, ScoredLexicon]) -> np.ndarray:
    """48 values: per lexicon kind, per field, per class: sum and average of
    the scores of matched term occurrences (average of zero matches = 0)."""
    for kind in LEXICON_KINDS:
        if kind not in lexicons:
            raise ValueError(f"missing scored lexicon for kind {kind!r}")
    values = []
    for kind in LEXICON_KINDS:
        lex = lexicons[kind]
        for text in (article.title, article.content):
            occs = occurrences(text, kind)
            for cls in PMI_CLASSES:
                scores = []
                for term in occs:
                    s = lex.score(term, cls)
                    if s is not None:
                        scores.append(s)
                total = float(sum(scores))
                values.append(total)
                values.append(total / len(scores) if scores else 0.0)
    return np.array(values)


def readability_features(content: str, profile: LanguageProfile) -> np.ndarray:
    """[type-token ratio, avg word length, Flesch-Kincaid grade, Gunning-Fog]."""
    seq = tokenize(content)
    n_words = len(seq)
    if n_words == 0:
        return np.zeros(4)
    n_sentences = max(1, len(split_sentences(content, profile)))
    syllables = [count_syllables(t.surface, profile) for t in seq]
    total_syll = sum(syllables)
    complex_words = sum(1 for s in syllables if s >= 3)

    ttr = len(set(seq.lowers())) / n_words
    avg_len = sum(len(t.surface) for t in seq) / n_words
    wps = n_words / n_sentences
    fk = 0.39 * wps + 11.8 * (total_syll / n_words) - 15.59
    fog = 0.4 * (wps + 100.0 * complex_words / n_words)
    return np.array([ttr, avg_len, fk, fog])


def orthographic_features(title: str, content: str) -> np.ndarray:
    """12 surface-style counts; see the schema for the exact order."""
    t_seq = tokenize(title)
    c_seq = tokenize(content)

    def counts(text):
        symbols = sum(1 for ch in text if ch in SYMBOL_SET)
        capitals = sum(1 for ch in text if ch.isupper())
        letters = sum(1 for ch in text if ch.isalpha())
        cap_frac = capitals / letters if letters else 0.0
        return symbols, capitals, cap_frac

    t_sym, t_cap, t_frac = counts(title)
    c_sym, c_cap, c_frac = counts(content)
    urls = sum(1 for tok in c_seq if is_url_token(tok))

    title_words = set(t_seq.lowers())
    content_words = set(c_seq.lowers())
    overlap = len(title_words & content_words) / len(title_words) if title_words else 0.0

    return np.array([
        len(t_seq), len(c_seq),
        len(title), len(content),
        t_sym, c_sym,
        t_cap, c_cap,
        t_frac, c_frac,
        urls, overlap,
    ], dtype=np.float64)


IRREGULAR_ORDER = ("foreign", "english_equivalents", "slang", "typos")


def irregular_vocab_features(article: Article, lexicons: dict[str, StaticLexicon]) -> np.ndarray:
    """Occurrence counts over title+content for the four static lexicons."""
    for kind in IRREGULAR_ORDER:
        if kind not in lexicons:
            raise ValueError(f"missing static lexicon for kind {kind!r}")
    tokens = list(tokenize(article.title)) + list(tokenize(article.content))
    out = []
    for kind in IRREGULAR_ORDER:
        words = lexicons[kind].words
        out.append(sum(1 for tok in tokens if tok.lower in words))
    return np.array(out, dtype=np.float64)


# ---------------------------------------------------------------------------
# TF.IDF
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TfidfModel:
    """Field vocabularies of the highest-df words, with their frequencies."""

    n_docs: int
    content_vocab: tuple[str, ...]
    title_vocab: tuple[str, ...]
    content_df: dict[str, int]
    title_df: dict[str, int]
    content_cap: int = 800
    title_cap: int = 300


def fit_tfidf(train: Dataset, min_df: int = 5, content_cap: int = 800,
              title_cap: int = 300) -> TfidfModel:
    """Vocabularies = words with document frequency strictly above ``min_df``,
    ranked by descending df (ties lexicographic), capped per field."""
    if len(train) == 0:
        raise DataError("cannot fit TF.IDF on an empty dataset")
    content_df: dict[str, int] = {}
    title_df: dict[str, int] = {}
    for art in train.articles():
        for w in set(tokenize(art.content).lowers()):
            content_df[w] = content_df.get(w, 0) + 1
        for w in set(tokenize(art.title).lowers()):
            title_df[w] = title_df.get(w, 0) + 1

    def select(df, cap):
        qualified = [w for w, d in df.items() if d > min_df]
        qualified.sort(key=lambda w: (-df[w], w))
        return tuple(qualified[:cap])

    return TfidfModel(
        n_docs=len(train),
        content_vocab=select(content_df, content_cap),
        title_vocab=select(title_df, title_cap),
        content_df=content_df,
        title_df=title_df,
        content_cap=content_cap,
        title_cap=title_cap,
    )


def tfidf_features(article: Article, model: TfidfModel) -> np.ndarray:
    """Raw tf * ln(N/df) per vocabulary slot, zero-padded to the fixed layout."""
    out = np.zeros(model.content_cap + model.title_cap)
    _fill_tfidf(out, 0, article.content, model.content_vocab, model.content_df, model.n_docs)
    _fill_tfidf(out, model.content_cap, article.title, model.title_vocab, model.title_df, model.n_docs)
    return out


def _fill_tfidf(out, offset, text, vocab, df, n_docs):
    lowers = tokenize(text).lowers()
    tf: dict[str, int] = {}
    for w in lowers:
        tf[w] = tf.get(w, 0) + 1
    for slot, word in enumerate(vocab):
        count = tf.get(word, 0)
        if count:
            out[offset + slot] = count * np.log(n_docs / df[word])


# ---------------------------------------------------------------------------
# Grammatical and embedding groups
# ---------------------------------------------------------------------------

def grammatical_features(article: Article, profile: LanguageProfile) -> np.ndarray:
    """Per-field occurrence ratio of each of the 10 coarse POS tags.

    The stop-word ratio is computed and logged for analysis but holds no
    vector slot; the 20 slots are exactly the POS ratios.
    """
    blocks = []
    for name, text in (("title", article.title), ("content", article.content)):
        seq = tokenize(text)
        ratios = np.zeros(len(profile.tagset))
        if len(seq):
            tags = coarse_pos_tag(seq, profile)
            for tag in tags:
                ratios[profile.tagset.index(tag)] += 1.0
            ratios /= len(seq)
            stop_ratio = sum(1 for t in seq if t.lower in profile.stopwords) / len(seq)
            logger.debug("article %s %s stop-word ratio: %.4f", article.id, name, stop_ratio)
        blocks.append(ratios)
    return np.concatenate(blocks)


def stopword_ratio(text: str, profile: LanguageProfile) -> float:
    seq = tokenize(text)
    if not len(seq):
        return 0.0
    return sum(1 for t in seq if t.lower in profile.stopwords) / len(seq)


def embedding_features(article: Article, vocab: Vocabulary, matrix: EmbeddingMatrix,
                       expected_dim: int = 300) -> np.ndarray:
    """[title average vector; content average vector; cosine of the two]."""
    if matrix.dim != expected_dim:
        raise ModelMismatchError(
            f"embedding dimension {matrix.dim} does not match the configured {expected_dim}"
        )
    t_vec = doc_vector(tokenize(article.title).lowers(), vocab, matrix)
    c_vec = doc_vector(tokenize(article.content).lowers(), vocab, matrix)
    return np.concatenate([t_vec, c_vec, [cosine(t_vec, c_vec)]])


# ---------------------------------------------------------------------------
# Schema, assembly, scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureSchema:
    """Ordered, uniquely named features with their group tags."""

    names: tuple[str, ...]
    groups: tuple[str, ...]

    def __post_init__(self):
        if len(self.names) != len(self.groups):
            raise ValueError("names and groups must have equal length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")

    def __len__(self) -> int:
        return len(self.names)

    def group_slice(self, wanted: set[str]) -> np.ndarray:
        return np.array([i for i, g in enumerate(self.groups) if g in wanted], dtype=np.intp)

    def hash(self) -> str:
        digest = hashlib.sha256()
        for name, group in zip(self.names, self.groups):
            digest.update(f"{name}\t{group}\n".encode("utf-8"))
        return digest.hexdigest()


@dataclass(frozen=True)
class FeatureModels:
    """Everything needed to turn an article into a feature vector."""

    profile: LanguageProfile
    scored_lexicons: dict[str, ScoredLexicon] | None = None
    static_lexicons: dict[str, StaticLexicon] | None = None
    tfidf: TfidfModel | None = None
    vocab: Vocabulary | None = None
    matrix: EmbeddingMatrix | None = None
    groups: tuple[str, ...] = HAND_CRAFTED_GROUPS
    word_dim: int = 300
    task_dim: int = 128

    def __post_init__(self):
        unknown = [g for g in self.groups if g not in GROUP_ORDER]
        if unknown:
            raise ValueError(f"unknown feature groups: {unknown}")
        missing = []
        if "pmi" in self.groups and not self.scored_lexicons:
            missing.append("scored_lexicons (pmi)")
        if "irregular" in self.groups and not self.static_lexicons:
            missing.append("static_lexicons (irregular)")
        if "tfidf" in self.groups and self.tfidf is None:
            missing.append("tfidf")
        if "embedding" in self.groups and (self.vocab is None or self.matrix is None):
            missing.append("embeddings")
        if missing:
            raise ValueError(f"missing sub-models: {', '.join(missing)}")

    def ordered_groups(self) -> tuple[str, ...]:
        return tuple(g for g in GROUP_ORDER if g in self.groups)


def build_schema(models: FeatureModels) -> FeatureSchema:
    names: list[str] = []
    groups: list[str] = []

    def add(group, group_names):
        names.extend(group_names)
        groups.extend([group] * len(group_names))

    for group in models.ordered_groups():
        if group == "pmi":
            add(group, [
                f"pmi_{kind}_{fld}_{cls}_{stat}"
                for kind in LEXICON_KINDS
                for fld in ("title", "content")
                for cls in PMI_CLASSES
                for stat in ("sum", "avg")
            ])
        elif group == "readability":
            add(group, ["read_ttr", "read_avg_word_len", "read_flesch_kincaid", "read_gunning_fog"])
        elif group == "orthographic":
            add(group, [
                "orth_title_words", "orth_content_words",
                "orth_title_chars", "orth_content_chars",
                "orth_title_symbols", "orth_content_symbols",
                "orth_title_capitals", "orth_content_capitals",
                "orth_title_capital_frac", "orth_content_capital_frac",
                "orth_content_urls", "orth_title_content_overlap",
            ])
        elif group == "irregular":
            add(group, [f"irr_{kind}" for kind in IRREGULAR_ORDER])
        elif group == "tfidf":
            tfidf = models.tfidf
            content_names = [
                f"tfidf_content_{i:04d}_" + (tfidf.content_vocab[i] if i < len(tfidf.content_vocab) else "pad")
                for i in range(tfidf.content_cap)
            ]
            title_names = [
                f"tfidf_title_{i:04d}_" + (tfidf.title_vocab[i] if i < len(tfidf.title_vocab) else "pad")
                for i in range(tfidf.title_cap)
            ]
            add(group, content_names + title_names)
        elif group == "grammatical":
            add(group, [
                f"gram_{fld}_{tag.lower()}"
                for fld in ("title", "content")
                for tag in models.profile.tagset
            ])
        elif group == "embedding":
            add(group, [f"emb_title_{i:03d}" for i in range(models.word_dim)]
                + [f"emb_content_{i:03d}" for i in range(models.word_dim)]
                + ["emb_cosine"])
        elif group == "task_embedding":
            add(group, [f"task_{i:03d}" for i in range(models.task_dim)])
    return FeatureSchema(names=tuple(names), groups=tuple(groups))


def assemble(article: Article, models: FeatureModels,
             task_embedding: np.ndarray | None = None) -> np.ndarray:
    """Concatenate the enabled groups in schema order."""
    parts = []
    for group in models.ordered_groups():
        if group == "pmi":
            parts.append(pmi_features(article, models.scored_lexicons))
        elif group == "readability":
            parts.append(readability_features(article.content, models.profile))
        elif group == "orthographic":
            parts.append(orthographic_features(article.title, article.content))
        elif group == "irregular":
            parts.append(irregular_vocab_features(article, models.static_lexicons))
        elif group == "tfidf":
            parts.append(tfidf_features(article, models.tfidf))
        elif group == "grammatical":
            parts.append(grammatical_features(article, models.profile))
        elif group == "embedding":
            parts.append(embedding_features(article, models.vocab, models.matrix, models.word_dim))
        elif group == "task_embedding":
            if task_embedding is None:
                raise ValueError("task_embedding group enabled but no embedding supplied")
            emb = np.asarray(task_embedding, dtype=np.float64)
            if emb.shape != (models.task_dim,):
                raise ValueError(f"task embedding has shape {emb.shape}, expected ({models.task_dim},)")
            parts.append(emb)
    vec = np.concatenate(parts) if parts else np.zeros(0)
    if not np.all(np.isfinite(vec)):
        raise DataError(f"non-finite feature value for article id={article.id}")
    return vec


def assemble_matrix(dataset: Dataset, models: FeatureModels,
                    task_embeddings: np.ndarray | None = None) -> np.ndarray:
    rows = []
    for i, art in enumerate(dataset.articles()):
        emb = task_embeddings[i] if task_embeddings is not None else None
        rows.append(assemble(art, models, emb))
    return np.vstack(rows)


@dataclass(frozen=True)
class Scaler:
    """Per-feature training max absolute value; all-zero columns scale by 1."""

    factors: np.ndarray

    def __len__(self) -> int:
        return len(self.factors)


def fit_scaler(train_matrix: np.ndarray) -> Scaler:
    factors = np.abs(train_matrix).max(axis=0)
    factors = np.where(factors == 0.0, 1.0, factors)
    return Scaler(factors=factors)


def apply_scaler(scaler: Scaler, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != len(scaler):
        raise ValueError(f"dimension mismatch: {values.shape[-1]} features vs {len(scaler)} factors")
    return values / scaler.factors


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_feature_model(schema: FeatureSchema, scaler: Scaler, path,
                       meta: dict[str, str] | None = None) -> None:
    """One row per feature: name, group, max-abs scale (full float precision)."""
    if len(scaler) != len(schema):
        raise ValueError("scaler length does not match schema")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_MODEL_HEADER + "\n")
        fh.write(f"schema_version=1\nschema_hash={schema.hash()}\nn_features={len(schema)}\n")
        for key, value in (meta or {}).items():
            fh.write(f"{key}={value}\n")
        for name, group, scale in zip(schema.names, schema.groups, scaler.factors):
            fh.write(f"{name}\t{group}\t{scale:.17g}\n")


def load_feature_model(path) -> tuple[FeatureSchema, Scaler, dict[str, str]]:
    names: list[str] = []
    groups: list[str] = []
    scales: list[float] = []
    meta: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        if fh.readline().rstrip("\n") != _MODEL_HEADER:
            raise ModelMismatchError(f"{path}: not a feature model file")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if "=" in line and "\t" not in line:
                key, _, value = line.partition("=")
                meta[key] = value
                continue
            name, group, scale = line.split("\t")
            names.append(name)
            groups.append(group)
            scales.append(float(scale))
    schema = FeatureSchema(names=tuple(names), groups=tuple(groups))
    declared = meta.get("schema_hash")
    if declared is not None and schema.hash() != declared:
        raise ModelMismatchError(f"{path}: schema hash mismatch (file corrupted or edited)")
    return schema, Scaler(factors=np.array(scales)), meta


_TFIDF_HEADER = "# fakenews tfidf-model v1"


def save_tfidf_model(model: TfidfModel, path, meta: dict[str, str] | None = None) -> None:
    """Vocabulary words in rank order with their document frequencies."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_TFIDF_HEADER + "\n")
        fh.write(f"n_docs={model.n_docs}\ncontent_cap={model.content_cap}\n"
                 f"title_cap={model.title_cap}\n")
        for key, value in (meta or {}).items():
            fh.write(f"{key}={value}\n")
        for word in model.content_vocab:
            fh.write(f"content\t{word}\t{model.content_df[word]}\n")
        for word in model.title_vocab:
            fh.write(f"title\t{word}\t{model.title_df[word]}\n")


def load_tfidf_model(path) -> tuple[TfidfModel, dict[str, str]]:
    meta: dict[str, str] = {}
    header: dict[str, int] = {}
    content_vocab: list[str] = []
    title_vocab: list[str] = []
    content_df: dict[str, int] = {}
    title_df: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        if fh.readline().rstrip("\n") != _TFIDF_HEADER:
            raise ModelMismatchError(f"{path}: not a tfidf model file")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            if "=" in line and "\t" not in line:
                key, _, value = line.partition("=")
                if key in ("n_docs", "content_cap", "title_cap"):
                    header[key] = int(value)
                else:
                    meta[key] = value
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}: row {lineno}: expected field<TAB>word<TAB>df")
            fld, word, df = parts
            if fld == "content":
                content_vocab.append(word)
                content_df[word] = int(df)
            elif fld == "title":
                title_vocab.append(word)
                title_df[word] = int(df)
            else:
                raise DataError(f"{path}: row {lineno}: unknown field {fld!r}")
    for key in ("n_docs", "content_cap", "title_cap"):
        if key not in header:
            raise DataError(f"{path}: missing header key {key!r}")
    model = TfidfModel(
        n_docs=header["n_docs"],
        content_vocab=tuple(content_vocab),
        title_vocab=tuple(title_vocab),
        content_df=content_df,
        title_df=title_df,
        content_cap=header["content_cap"],
        title_cap=header["title_cap"],
    )
    return model, meta


def export_matrix_csv(matrix: np.ndarray, schema: FeatureSchema, path) -> None:
    """Feature matrix as CSV with the schema names as header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(schema.names) + "\n")
        for row in matrix:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
