"""Class-indicative term lexicons.

Builds PMI-scored lexicons (unigrams, bigrams, named entities) from a labeled
dataset over document-level counts, and loads the four static word lists
(typos, slang, foreign words, English equivalents).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import Dataset
from .errors import DataError, ModelMismatchError
from .textproc import extract_named_entities, tokenize

LEXICON_KINDS = ("unigram", "bigram", "named_entity")
STATIC_KINDS = ("typos", "slang", "foreign", "english_equivalents")
PMI_CLASSES = ("fake", "non_fake", "clickbait", "non_clickbait")

_SCORED_HEADER = "# fakenews scored-lexicon v1"


@dataclass(frozen=True)
class ScoredLexicon:
    kind: str
    entries: dict[str, dict[str, float]]  # term -> class -> PMI score
    min_df: int
    smoothing: float

    def __post_init__(self):
        if self.kind not in LEXICON_KINDS:
            raise ValueError(f"unknown lexicon kind {self.kind!r}")

    def score(self, term: str, cls: str) -> float | None:
        scores = self.entries.get(term)
        if scores is None:
            return None
        return scores.get(cls)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class StaticLexicon:
    kind: str
    words: frozenset[str]

    def __post_init__(self):
        if self.kind not in STATIC_KINDS:
            raise ValueError(f"unknown static lexicon kind {self.kind!r}")

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)


def document_terms(title: str, content: str, kind: str) -> set[str]:
    """Distinct case-folded terms of ``kind`` present in one document."""
    if kind == "unigram":
        terms = set(tokenize(title).lowers()) | set(tokenize(content).lowers())
    elif kind == "bigram":
        terms = set()
        for text in (title, content):
            lowers = tokenize(text).lowers()
            terms.update(f"{a} {b}" for a, b in zip(lowers, lowers[1:]))
    elif kind == "named_entity":
        terms = {e.casefold() for e in extract_named_entities(title)}
        terms |= {e.casefold() for e in extract_named_entities(content)}
    else:
        raise ValueError(f"unknown lexicon kind {kind!r}")
    return terms


def occurrences(text: str, kind: str) -> list[str]:
    """Every term occurrence of ``kind`` in a single field, case-folded, in order."""
    if kind == "unigram":
        return tokenize(text).lowers()
    if kind == "bigram":
        lowers = tokenize(text).lowers()
        return [f"{a} {b}" for a, b in zip(lowers, lowers[1:])]
    if kind == "named_entity":
        return [e.casefold() for e in extract_named_entities(text)]
    raise ValueError(f"unknown lexicon kind {kind!r}")


def build_pmi_lexicon(dataset: Dataset, kind: str, min_df: int = 5,
                      smoothing: float = 0.5) -> ScoredLexicon:
    """PMI of each frequent term against all four classes.

    Counts are document-level: a term either occurs in a document (title +
    content) or not.  With additive smoothing ``k``:

        PMI(t, c) = log2( (df(t, c) + k) * N / ((df(t) + k) * (N_c + k)) )

    With ``k = 0`` a term that never occurs in class ``c`` gets no score for
    that class instead of -inf.
    """
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    if smoothing < 0:
        raise ValueError(f"smoothing must be >= 0, got {smoothing}")
    if len(dataset) == 0:
        raise DataError("cannot build a PMI lexicon from an empty dataset")
    labels = dataset.require_labels()

    n_docs = len(dataset)
    class_sizes = {
        "fake": sum(1 for l in labels if l.is_fake),
        "non_fake": sum(1 for l in labels if not l.is_fake),
        "clickbait": sum(1 for l in labels if l.is_clickbait),
        "non_clickbait": sum(1 for l in labels if not l.is_clickbait),
    }

    df: dict[str, int] = {}
    df_class: dict[str, dict[str, int]] = {}
    for (article, _), label in zip(dataset, labels):
        doc_classes = [
            "fake" if label.is_fake else "non_fake",
            "clickbait" if label.is_clickbait else "non_clickbait",
        ]
        for term in document_terms(article.title, article.content, kind):
            df[term] = df.get(term, 0) + 1
            per_class = df_class.setdefault(term, {})
            for cls in doc_classes:
                per_class[cls] = per_class.get(cls, 0) + 1

    k = smoothing
    entries: dict[str, dict[str, float]] = {}
    for term, term_df in df.items():
        if term_df < min_df:
            continue
        scores = {}
        for cls in PMI_CLASSES:
            joint = df_class[term].get(cls, 0)
            if joint == 0 and k == 0:
                continue
            scores[cls] = math.log2(((joint + k) * n_docs) / ((term_df + k) * (class_sizes[cls] + k)))
        if scores:
            entries[term] = scores
    return ScoredLexicon(kind=kind, entries=entries, min_df=min_df, smoothing=smoothing)


def save_scored_lexicon(lexicon: ScoredLexicon, path) -> None:
    """TSV rows ``term<TAB>kind<TAB>class<TAB>score``, strongest terms first."""
    def sort_key(item):
        term, scores = item
        return (-max(scores.values()), term)

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_SCORED_HEADER + "\n")
        fh.write(f"# min_df={lexicon.min_df}\tsmoothing={lexicon.smoothing!r}\n")
        for term, scores in sorted(lexicon.entries.items(), key=sort_key):
            for cls in PMI_CLASSES:
                if cls in scores:
                    fh.write(f"{term}\t{lexicon.kind}\t{cls}\t{scores[cls]:.9g}\n")


def load_scored_lexicon(path) -> ScoredLexicon:
    entries: dict[str, dict[str, float]] = {}
    kind = None
    min_df = 1
    smoothing = 0.0
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != _SCORED_HEADER:
            raise ModelMismatchError(f"{path}: not a scored lexicon file (bad or missing version header)")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                for part in line[1:].strip().split("\t"):
                    key, _, value = part.partition("=")
                    if key == "min_df":
                        min_df = int(value)
                    elif key == "smoothing":
                        smoothing = float(value)
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise DataError(f"{path}: row {lineno}: expected 4 tab-separated fields")
            term, row_kind, cls, score_text = fields
            if kind is None:
                kind = row_kind
            elif row_kind != kind:
                raise DataError(f"{path}: row {lineno}: mixed lexicon kinds {kind!r} and {row_kind!r}")
            if cls not in PMI_CLASSES:
                raise DataError(f"{path}: row {lineno}: unknown class {cls!r}")
            try:
                score = float(score_text)
            except ValueError:
                raise DataError(f"{path}: row {lineno}: non-numeric score {score_text!r}") from None
            entries.setdefault(term, {})[cls] = score
    if kind is None:
        raise DataError(f"{path}: scored lexicon has no entries")
    return ScoredLexicon(kind=kind, entries=entries, min_df=min_df, smoothing=smoothing)


def load_static_lexicon(path, kind: str) -> StaticLexicon:
    """Case-folded deduplicated word set; typo files are ``wrong<TAB>right``."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if kind == "typos":
                fields = line.split("\t")
                if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
                    raise DataError(f"{path}: line {lineno}: typo rows must be 'wrong<TAB>right'")
                word = fields[0].strip()
            else:
                word = line.strip()
            if any(ch.isspace() for ch in word):
                raise DataError(f"{path}: line {lineno}: lexicon entries must not contain whitespace")
            words.add(word.casefold())
    if not words:
        raise DataError(f"{path}: static lexicon is empty")
    return StaticLexicon(kind=kind, words=frozenset(words))
