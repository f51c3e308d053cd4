"""Language-aware text primitives used by every feature extractor.

Tokenization, sentence splitting, syllable counting, a capitalization
heuristic for named entities, and dictionary+suffix coarse POS tagging.
All operations are pure; a loaded :class:`LanguageProfile` is immutable,
so everything here is safe to run in parallel over articles.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

COARSE_TAGS = ("NOUN", "VERB", "ADJ", "ADV", "PRON", "NUM", "ADP", "CONJ", "PART", "OTHER")

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_WORD_RE = re.compile(r"\w+", re.UNICODE)
_TOKEN_RE = re.compile(rf"{_URL_RE.pattern}|\w+", re.IGNORECASE | re.UNICODE)
_NUMERIC_RE = re.compile(r"^\d+(?:[.,]\d+)*$")
_TERMINATORS = ".!?…"


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenSequence:
    """Word tokens with character offsets; spans are increasing and disjoint."""

    text: str
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def lowers(self) -> list[str]:
        return [t.lower for t in self.tokens]


@dataclass(frozen=True)
class LanguageProfile:
    """Vowel set, stopwords and a 10-tag POS lexicon with suffix fallbacks.

    ``suffix_rules`` is ordered: the first matching suffix wins.
    """

    vowels: frozenset[str]
    stopwords: frozenset[str]
    pos_lexicon: dict[str, str]
    suffix_rules: tuple[tuple[str, str], ...]
    abbreviations: frozenset[str] = field(default_factory=frozenset)
    tagset: tuple[str, ...] = COARSE_TAGS

    def __post_init__(self):
        if len(self.tagset) != 10:
            raise ValueError(f"tagset must have exactly 10 tags, got {len(self.tagset)}")
        for word, tag in self.pos_lexicon.items():
            if tag not in self.tagset:
                raise ValueError(f"pos_lexicon entry {word!r} maps to unknown tag {tag!r}")
        for suffix, tag in self.suffix_rules:
            if tag not in self.tagset:
                raise ValueError(f"suffix rule {suffix!r} maps to unknown tag {tag!r}")

    @staticmethod
    def load(stopwords_path, pos_lexicon_path, suffix_rules_path,
             abbreviations_path=None, vowels: str = "аеиоуъюяaeiouy") -> "LanguageProfile":
        """Load a profile from plain-text resource files.

        Stopwords: one word per line.  POS lexicon: ``word<TAB>TAG``.
        Suffix rules: ``suffix<TAB>TAG``, priority = file order.
        """
        stopwords = frozenset(
            w.strip().casefold() for w in Path(stopwords_path).read_text("utf-8").splitlines() if w.strip()
        )
        lexicon: dict[str, str] = {}
        for line in Path(pos_lexicon_path).read_text("utf-8").splitlines():
            if not line.strip():
                continue
            word, tag = line.split("\t")
            lexicon[word.casefold()] = tag.strip()
        rules = []
        for line in Path(suffix_rules_path).read_text("utf-8").splitlines():
            if not line.strip():
                continue
            suffix, tag = line.split("\t")
            rules.append((suffix.casefold(), tag.strip()))
        abbrevs = frozenset()
        if abbreviations_path is not None:
            abbrevs = frozenset(
                w.strip().casefold() for w in Path(abbreviations_path).read_text("utf-8").splitlines() if w.strip()
            )
        return LanguageProfile(
            vowels=frozenset(vowels.casefold()),
            stopwords=stopwords,
            pos_lexicon=lexicon,
            suffix_rules=tuple(rules),
            abbreviations=abbrevs,
        )

    @staticmethod
    def bulgarian() -> "LanguageProfile":
        """The bundled Bulgarian profile."""
        root = importlib_resources.files("fakenews").joinpath("data/bg")
        return LanguageProfile.load(
            stopwords_path=str(root / "stopwords.txt"),
            pos_lexicon_path=str(root / "pos_lexicon.tsv"),
            suffix_rules_path=str(root / "suffix_rules.tsv"),
            abbreviations_path=str(root / "abbreviations.txt"),
        )


def tokenize(text: str) -> TokenSequence:
    """Unicode word tokens; URLs survive as single tokens, punctuation is dropped."""
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        surface = m.group(0)
        tokens.append(Token(surface=surface, lower=surface.casefold(), start=m.start(), end=m.end()))
    return TokenSequence(text=text, tokens=tuple(tokens))


def is_url_token(token: Token) -> bool:
    return _URL_RE.fullmatch(token.surface) is not None


def split_sentences(text: str, profile: LanguageProfile | None = None) -> list[tuple[int, int]]:
    """Sentence spans (start, end) covering all non-whitespace text.

    A run of ``. ! ? …`` ends a sentence unless a lone period closes a known
    abbreviation from the profile.
    """
    abbrevs = profile.abbreviations if profile is not None else frozenset()
    boundaries = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS:
            j = i
            while j + 1 < n and text[j + 1] in _TERMINATORS:
                j += 1
            run = text[i:j + 1]
            if run == "." and _ends_abbreviation(text, i, abbrevs):
                i = j + 1
                continue
            boundaries.append(j + 1)
            i = j + 1
        else:
            i += 1

    spans = []
    prev = 0
    for b in boundaries + [n]:
        if b <= prev:
            continue
        chunk = text[prev:b]
        lead = len(chunk) - len(chunk.lstrip())
        trail = len(chunk) - len(chunk.rstrip())
        if prev + lead < b - trail:
            spans.append((prev + lead, b - trail))
        prev = b
    return spans


def _ends_abbreviation(text: str, dot_pos: int, abbrevs: frozenset[str]) -> bool:
    start = dot_pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    candidate = text[start:dot_pos + 1].casefold()
    return candidate in abbrevs


def count_syllables(word: str, profile: LanguageProfile) -> int:
    """Number of maximal vowel groups in the word; 0 if it has no vowels."""
    count = 0
    in_group = False
    for ch in word.casefold():
        if ch in profile.vowels:
            if not in_group:
                count += 1
                in_group = True
        else:
            in_group = False
    return count


def extract_named_entities(text: str, profile: LanguageProfile | None = None) -> list[str]:
    """Maximal whitespace-adjacent runs of capitalized tokens.

    A capitalized token opening a sentence never joins a run, so ordinary
    sentence-initial capitalization does not produce entities.  This is an
    approximation, not a trained NE recognizer.
    """
    seq = tokenize(text)
    if not seq.tokens:
        return []
    sentence_spans = split_sentences(text, profile)
    sentence_starts = set()
    for start, end in sentence_spans:
        for tok in seq.tokens:
            if tok.start >= start:
                if tok.start < end:
                    sentence_starts.add(tok.start)
                break

    def eligible(tok: Token) -> bool:
        return bool(tok.surface) and tok.surface[0].isupper() and tok.start not in sentence_starts

    entities = []
    run: list[Token] = []
    prev: Token | None = None
    for tok in seq.tokens:
        adjacent = prev is not None and text[prev.end:tok.start].strip() == ""
        if eligible(tok) and run and adjacent:
            run.append(tok)
        else:
            if run:
                entities.append(" ".join(t.surface for t in run))
            run = [tok] if eligible(tok) else []
        prev = tok
    if run:
        entities.append(" ".join(t.surface for t in run))
    return entities


def coarse_pos_tag(tokens: TokenSequence, profile: LanguageProfile) -> list[str]:
    """One coarse tag per token: lexicon, numeric rule, suffix rules, else OTHER."""
    tags = []
    for tok in tokens:
        tag = profile.pos_lexicon.get(tok.lower)
        if tag is None and _NUMERIC_RE.match(tok.surface):
            tag = "NUM"
        if tag is None:
            for suffix, rule_tag in profile.suffix_rules:
                if tok.lower.endswith(suffix) and len(tok.lower) > len(suffix):
                    tag = rule_tag
                    break
        tags.append(tag if tag is not None else "OTHER")
    return tags


def count_lexicon_hits(tokens: TokenSequence, lex) -> int:
    """Token occurrences (not types) whose case-folded form is in ``lex``."""
    words = lex.words if hasattr(lex, "words") else lex
    return sum(1 for tok in tokens if tok.lower in words)
