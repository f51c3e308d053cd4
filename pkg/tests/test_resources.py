import math

import numpy as np
import pytest

from fakenews.corpus import Article, Dataset, Labels
from fakenews.errors import DataError, ModelMismatchError
from fakenews.resources import (
    PMI_CLASSES,
    build_pmi_lexicon,
    load_scored_lexicon,
    load_static_lexicon,
    save_scored_lexicon,
)


def make_dataset(docs):
    """docs: list of (text, is_fake) or (title, content, is_fake)."""
    items = []
    for i, doc in enumerate(docs):
        if len(doc) == 2:
            title, content, fake = "", doc[0], doc[1]
        else:
            title, content, fake = doc
        art = Article(id=i, url="", date="", title=title, content=content)
        items.append((art, Labels(is_fake=fake, is_clickbait=fake)))
    return Dataset(items=tuple(items))


FOUR_DOCS = make_dataset([
    ("чудо чудо", True),
    ("чудо новина", True),
    ("новина", False),
    ("факт", False),
])


class TestBuildPmi:
    def test_hand_computed_positive_score(self):
        lex = build_pmi_lexicon(FOUR_DOCS, "unigram", min_df=1, smoothing=0.0)
        # df(чудо)=2 docs, both fake: log2((2*4)/(2*2)) = 1
        assert lex.score("чудо", "fake") == pytest.approx(1.0, abs=1e-12)

    def test_unsmoothed_zero_joint_is_omitted(self):
        lex = build_pmi_lexicon(FOUR_DOCS, "unigram", min_df=1, smoothing=0.0)
        assert lex.score("факт", "fake") is None
        smoothed = build_pmi_lexicon(FOUR_DOCS, "unigram", min_df=1, smoothing=0.5)
        value = smoothed.score("факт", "fake")
        assert value is not None and math.isfinite(value) and value < 0

    def test_balanced_term_is_near_zero(self):
        ds = make_dataset([("общо дума", True), ("общо друго", False)])
        lex = build_pmi_lexicon(ds, "unigram", min_df=1, smoothing=0.5)
        assert abs(lex.score("общо", "fake")) <= 1.0  # |PMI| bounded by smoothing correction

    def test_min_df_filters(self):
        lex = build_pmi_lexicon(FOUR_DOCS, "unigram", min_df=2, smoothing=0.5)
        assert "чудо" in lex.entries and "новина" in lex.entries
        assert "факт" not in lex.entries

    def test_all_scores_finite_with_smoothing(self):
        lex = build_pmi_lexicon(FOUR_DOCS, "unigram", min_df=1, smoothing=0.5)
        for scores in lex.entries.values():
            assert set(scores) == set(PMI_CLASSES)
            assert all(math.isfinite(v) for v in scores.values())

    def test_label_swap_symmetry(self):
        flipped = make_dataset([
            ("чудо чудо", False), ("чудо новина", False), ("новина", True), ("факт", True),
        ])
        lex = build_pmi_lexicon(FOUR_DOCS, "unigram", min_df=1, smoothing=0.5)
        lex_flipped = build_pmi_lexicon(flipped, "unigram", min_df=1, smoothing=0.5)
        for term in lex.entries:
            assert lex.score(term, "fake") == pytest.approx(lex_flipped.score(term, "non_fake"), abs=1e-12)

    def test_unlabeled_and_empty_rejected(self):
        with pytest.raises(DataError):
            build_pmi_lexicon(Dataset(items=()), "unigram")
        art = Article(id=0, url="", date="", title="т", content="с")
        unlabeled = Dataset(items=((art, None),))
        with pytest.raises(DataError):
            build_pmi_lexicon(unlabeled, "unigram", min_df=1)

    def test_bigram_terms(self):
        ds = make_dataset([("голяма новина днес", True), ("голяма новина утре", False)])
        lex = build_pmi_lexicon(ds, "bigram", min_df=1, smoothing=0.5)
        assert "голяма новина" in lex.entries
        assert "новина днес" in lex.entries

    def test_named_entity_terms(self):
        ds = make_dataset([
            ("Шок", "Вчера Иван Петров говори", True),
            ("Днес", "Пак Иван Петров говори", False),
        ])
        lex = build_pmi_lexicon(ds, "named_entity", min_df=2, smoothing=0.5)
        assert "иван петров" in lex.entries


def oracle_pmi(token_docs, labels, kind, min_df, k):
    """Direct probability tables via set intersections; independent of the
    incremental counting in build_pmi_lexicon."""
    if kind == "unigram":
        terms_per_doc = [set(doc) for doc in token_docs]
    else:
        terms_per_doc = [set(f"{a} {b}" for a, b in zip(doc, doc[1:])) for doc in token_docs]
    n = len(token_docs)
    class_docs = {
        "fake": {i for i, l in enumerate(labels) if l},
        "non_fake": {i for i, l in enumerate(labels) if not l},
    }
    class_docs["clickbait"] = class_docs["fake"]
    class_docs["non_clickbait"] = class_docs["non_fake"]
    all_terms = set().union(*terms_per_doc) if terms_per_doc else set()
    out = {}
    for term in all_terms:
        docs_with = {i for i, terms in enumerate(terms_per_doc) if term in terms}
        if len(docs_with) < min_df:
            continue
        scores = {}
        for cls, members in class_docs.items():
            joint = len(docs_with & members)
            if joint == 0 and k == 0:
                continue
            scores[cls] = (math.log2(joint + k) + math.log2(n)
                           - math.log2(len(docs_with) + k) - math.log2(len(members) + k))
        if scores:
            out[term] = scores
    return out


def random_corpus(rng, max_docs=20):
    vocab = [f"w{i}" for i in range(12)]
    n = int(rng.integers(2, max_docs + 1))
    docs = [[vocab[j] for j in rng.integers(0, len(vocab), size=rng.integers(1, 9))]
            for _ in range(n)]
    labels = [bool(rng.integers(0, 2)) for _ in range(n)]
    return docs, labels


@pytest.mark.parametrize("kind", ["unigram", "bigram"])
@pytest.mark.parametrize("smoothing", [0.0, 0.5, 1.0])
def test_pmi_matches_probability_table_oracle(kind, smoothing):
    rng = np.random.default_rng(hash((kind, smoothing)) % 2**32)
    for _ in range(30):
        docs, labels = random_corpus(rng)
        ds = make_dataset([(" ".join(doc), lab) for doc, lab in zip(docs, labels)])
        min_df = int(rng.integers(1, 4))
        lex = build_pmi_lexicon(ds, kind, min_df=min_df, smoothing=smoothing)
        expected = oracle_pmi(docs, labels, kind, min_df, smoothing)
        assert set(lex.entries) == set(expected)
        for term, scores in expected.items():
            assert set(lex.entries[term]) == set(scores)
            for cls, value in scores.items():
                assert lex.entries[term][cls] == pytest.approx(value, abs=1e-9)


class TestScoredLexiconIO:
    def test_roundtrip(self, tmp_path):
        lex = build_pmi_lexicon(FOUR_DOCS, "unigram", min_df=1, smoothing=0.5)
        path = tmp_path / "uni.tsv"
        save_scored_lexicon(lex, path)
        loaded = load_scored_lexicon(path)
        assert loaded.kind == lex.kind
        assert loaded.min_df == lex.min_df
        assert loaded.smoothing == lex.smoothing
        assert set(loaded.entries) == set(lex.entries)
        for term in lex.entries:
            for cls, value in lex.entries[term].items():
                assert loaded.entries[term][cls] == pytest.approx(value, rel=1e-9)

    def test_sorted_by_max_score(self, tmp_path):
        lex = build_pmi_lexicon(FOUR_DOCS, "unigram", min_df=1, smoothing=0.5)
        path = tmp_path / "uni.tsv"
        save_scored_lexicon(lex, path)
        rows = [line.split("\t") for line in path.read_text("utf-8").splitlines()
                if line and not line.startswith("#")]
        maxima = []
        seen = []
        for term, _, _, _ in rows:
            if term not in seen:
                seen.append(term)
                maxima.append(max(lex.entries[term].values()))
        assert maxima == sorted(maxima, reverse=True)

    def test_non_numeric_score_names_row(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("# fakenews scored-lexicon v1\nчудо\tunigram\tfake\toops\n",
                        encoding="utf-8")
        with pytest.raises(DataError, match="row 2"):
            load_scored_lexicon(path)

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "old.tsv"
        path.write_text("# something else\n", encoding="utf-8")
        with pytest.raises(ModelMismatchError):
            load_scored_lexicon(path)

    def test_table_style_row_parses(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("# fakenews scored-lexicon v1\nchemtrails\tunigram\tfake\t0.92\n",
                        encoding="utf-8")
        lex = load_scored_lexicon(path)
        assert lex.score("chemtrails", "fake") == pytest.approx(0.92)


class TestStaticLexicon:
    def test_dedup(self, tmp_path):
        path = tmp_path / "slang.txt"
        path.write_text("яко\nкузки\nЯко\nмега\n", encoding="utf-8")
        lex = load_static_lexicon(path, "slang")
        assert len(lex) == 3
        assert "яко" in lex

    def test_typo_wrong_form_matchable(self, tmp_path):
        path = tmp_path / "typos.tsv"
        path.write_text("сеа\tсега\nкато\tкакто\n", encoding="utf-8")
        lex = load_static_lexicon(path, "typos")
        assert "сеа" in lex
        assert "сега" not in lex

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("", encoding="utf-8")
        with pytest.raises(DataError, match="empty"):
            load_static_lexicon(path, "foreign")

    def test_malformed_typo_line(self, tmp_path):
        path = tmp_path / "typos.tsv"
        path.write_text("самотука\n", encoding="utf-8")
        with pytest.raises(DataError, match="wrong<TAB>right"):
            load_static_lexicon(path, "typos")
