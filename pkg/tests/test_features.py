import math

import numpy as np
import numpy.testing as npt
import pytest

from fakenews.corpus import Article, Dataset, Labels
from fakenews.embeddings import EmbeddingMatrix, build_vocab
from fakenews.errors import ModelMismatchError
from fakenews.features import (
    FeatureModels,
    Scaler,
    TfidfModel,
    apply_scaler,
    assemble,
    build_schema,
    embedding_features,
    export_matrix_csv,
    fit_scaler,
    fit_tfidf,
    grammatical_features,
    irregular_vocab_features,
    load_feature_model,
    load_tfidf_model,
    orthographic_features,
    pmi_features,
    readability_features,
    save_feature_model,
    save_tfidf_model,
    tfidf_features,
)
from fakenews.resources import ScoredLexicon, StaticLexicon
from fakenews.textproc import LanguageProfile, tokenize


@pytest.fixture(scope="module")
def profile():
    return LanguageProfile.bulgarian()


def art(title="", content="", i=0):
    return Article(id=i, url="", date="", title=title, content=content)


def scored(kind, entries):
    return ScoredLexicon(kind=kind, entries=entries, min_df=1, smoothing=0.5)


def empty_lexicons():
    return {k: scored(k, {}) for k in ("unigram", "bigram", "named_entity")}


class TestPmiFeatures:
    def test_single_title_match(self):
        lex = empty_lexicons()
        lex["unigram"] = scored("unigram", {"чудо": {"fake": 0.9}})
        vec = pmi_features(art(title="голямо чудо", content="нищо"), lex)
        assert vec.shape == (48,)
        assert vec[0] == pytest.approx(0.9)   # unigram/title/fake sum
        assert vec[1] == pytest.approx(0.9)   # unigram/title/fake avg
        assert np.count_nonzero(vec) == 2

    def test_no_matches_all_zero(self):
        vec = pmi_features(art(title="а б", content="в г"), empty_lexicons())
        npt.assert_array_equal(vec, np.zeros(48))

    def test_two_matches_sum_and_average(self):
        lex = empty_lexicons()
        lex["unigram"] = scored("unigram", {"шок": {"fake": 0.8}, "чудо": {"fake": 0.6}})
        vec = pmi_features(art(title="шок и чудо"), lex)
        assert vec[0] == pytest.approx(1.4)
        assert vec[1] == pytest.approx(0.7)

    def test_occurrences_counted_not_types(self):
        lex = empty_lexicons()
        lex["unigram"] = scored("unigram", {"чудо": {"fake": 0.5}})
        vec = pmi_features(art(title="чудо чудо"), lex)
        assert vec[0] == pytest.approx(1.0)
        assert vec[1] == pytest.approx(0.5)

    def test_missing_kind_rejected(self):
        with pytest.raises(ValueError, match="named_entity"):
            pmi_features(art(), {"unigram": scored("unigram", {}),
                                 "bigram": scored("bigram", {})})


class TestReadability:
    def test_six_monosyllables_two_sentences(self, profile):
        # 6 one-syllable words, 2 sentences: FK = 0.39*3 + 11.8*1 - 15.59, Fog = 0.4*3
        vec = readability_features("Той е тук. Тя е там.", profile)
        assert vec[2] == pytest.approx(-2.62, abs=1e-9)
        assert vec[3] == pytest.approx(1.2, abs=1e-9)

    def test_type_token_ratio(self, profile):
        vec = readability_features("а б а", profile)
        assert vec[0] == pytest.approx(2.0 / 3.0)

    def test_empty_content(self, profile):
        npt.assert_array_equal(readability_features("", profile), np.zeros(4))

    def test_avg_word_length(self, profile):
        vec = readability_features("аб абвг", profile)
        assert vec[1] == pytest.approx(3.0)

    def test_complex_words_raise_fog(self, profile):
        # феноменалната: 6 vowel groups -> complex
        plain = readability_features("Той е тук.", profile)
        heavy = readability_features("Феноменалната е тук.", profile)
        assert heavy[3] > plain[3]


class TestOrthographic:
    def test_capitals_symbols_fraction(self):
        vec = orthographic_features("ШОК!", "")
        assert vec[6] == 3            # capitals(title)
        assert vec[4] == 1            # symbols(title)
        assert vec[8] == pytest.approx(1.0)  # capital fraction(title)

    def test_full_overlap(self):
        vec = orthographic_features("чудо факт", "Този факт е чудо и половина")
        assert vec[11] == pytest.approx(1.0)

    def test_empty_everything(self):
        npt.assert_array_equal(orthographic_features("", ""), np.zeros(12))

    def test_url_count_and_chars(self):
        vec = orthographic_features("аб", "виж http://a.bg и www.b.bg сега")
        assert vec[10] == 2
        assert vec[2] == 2            # chars(title), unicode scalars
        assert vec[0] == 1 and vec[1] == 5

    def test_overlap_direction_title_is_reference(self):
        # half the title words occur in the content
        vec = orthographic_features("чудо факт", "факт и още нещо")
        assert vec[11] == pytest.approx(0.5)


class TestIrregular:
    def lexicons(self):
        return {
            "foreign": StaticLexicon("foreign", frozenset({"уикенд"})),
            "english_equivalents": StaticLexicon("english_equivalents", frozenset({"лайк"})),
            "slang": StaticLexicon("slang", frozenset({"яко", "мега"})),
            "typos": StaticLexicon("typos", frozenset({"сеа"})),
        }

    def test_slang_occurrences(self):
        vec = irregular_vocab_features(art(content="яко мега яко"), self.lexicons())
        npt.assert_array_equal(vec, [0, 0, 3, 0])

    def test_no_matches(self):
        vec = irregular_vocab_features(art(title="нищо", content="тук"), self.lexicons())
        npt.assert_array_equal(vec, np.zeros(4))

    def test_typo_three_occurrences_spanning_fields(self):
        vec = irregular_vocab_features(art(title="сеа", content="сеа и пак сеа"), self.lexicons())
        assert vec[3] == 3


def labeled_dataset(texts, titles=None):
    items = []
    for i, content in enumerate(texts):
        title = titles[i] if titles else ""
        a = Article(id=i, url="", date="", title=title, content=content)
        items.append((a, Labels(is_fake=i % 2 == 0, is_clickbait=i % 2 == 0)))
    return Dataset(items=tuple(items))


class TestFitTfidf:
    def test_small_qualifying_set(self):
        common = "а б в г д е ж з и к"
        docs = [common + f" рядко{i}" for i in range(7)]
        model = fit_tfidf(labeled_dataset(docs), min_df=5)
        assert len(model.content_vocab) == 10

    def test_df_exactly_five_excluded(self):
        docs = ["точно пет"] * 5 + ["друго"] * 2
        model = fit_tfidf(labeled_dataset(docs), min_df=5)
        assert "точно" not in model.content_vocab

    def test_cap_excludes_801st(self):
        words = [f"w{i:03d}" for i in range(801)]
        docs = [" ".join(words)] * 6
        model = fit_tfidf(labeled_dataset(docs), min_df=5)
        assert len(model.content_vocab) == 800
        assert "w800" not in model.content_vocab
        assert "w799" in model.content_vocab

    def test_rank_by_df_then_lexicographic(self):
        docs = ["б а"] * 7 + ["а"] * 2
        model = fit_tfidf(labeled_dataset(docs), min_df=5)
        assert model.content_vocab[0] == "а"   # df 9 beats df 7
        docs_tie = ["б а"] * 7
        model_tie = fit_tfidf(labeled_dataset(docs_tie), min_df=5)
        assert model_tie.content_vocab == ("а", "б")


class TestTfidfFeatures:
    def hand_model(self):
        return TfidfModel(n_docs=3, content_vocab=("дума",), title_vocab=(),
                          content_df={"дума": 1}, title_df={},
                          content_cap=4, title_cap=2)

    def test_df_equals_n_gives_zero(self):
        model = TfidfModel(n_docs=3, content_vocab=("все",), title_vocab=(),
                           content_df={"все": 3}, title_df={}, content_cap=2, title_cap=1)
        vec = tfidf_features(art(content="все все все"), model)
        npt.assert_array_equal(vec, np.zeros(3))

    def test_hand_computed_value(self):
        vec = tfidf_features(art(content="дума и пак дума"), self.hand_model())
        assert vec[0] == pytest.approx(2.0 * math.log(3.0), abs=1e-12)

    def test_no_vocab_words_zero_block(self):
        vec = tfidf_features(art(content="нищо общо"), self.hand_model())
        npt.assert_array_equal(vec, np.zeros(6))

    def test_padded_layout_length(self):
        vec = tfidf_features(art(content="дума"), self.hand_model())
        assert vec.shape == (6,)

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(17)
        vocab_pool = [f"t{i}" for i in range(8)]
        docs = [" ".join(rng.choice(vocab_pool, size=rng.integers(1, 12)))
                for _ in range(10)]
        titles = [" ".join(rng.choice(vocab_pool, size=rng.integers(1, 4)))
                  for _ in range(10)]
        ds = labeled_dataset(docs, titles)
        model = fit_tfidf(ds, min_df=0, content_cap=5, title_cap=3)

        # independent recomputation from raw counts
        def field_df(texts):
            df = {}
            for text in texts:
                for w in set(text.split()):
                    df[w] = df.get(w, 0) + 1
            return df

        c_df = field_df(docs)
        t_df = field_df(titles)
        for i, a in enumerate(ds.articles()):
            vec = tfidf_features(a, model)
            expected = np.zeros(8)
            c_tokens = docs[i].split()
            t_tokens = titles[i].split()
            for slot, w in enumerate(model.content_vocab):
                expected[slot] = c_tokens.count(w) * math.log(10 / c_df[w])
            for slot, w in enumerate(model.title_vocab):
                expected[5 + slot] = t_tokens.count(w) * math.log(10 / t_df[w])
            npt.assert_allclose(vec, expected, atol=1e-12)


class TestGrammatical:
    def test_ratio_half_nouns(self, profile):
        vec = grammatical_features(art(content="факт факт каза вчера"), profile)
        content_block = vec[10:]
        assert content_block[profile.tagset.index("NOUN")] == pytest.approx(0.5)

    def test_empty_title_block_zero(self, profile):
        vec = grammatical_features(art(title="", content="факт"), profile)
        npt.assert_array_equal(vec[:10], np.zeros(10))

    def test_ratios_sum_to_one(self, profile):
        vec = grammatical_features(art(title="Шок и ужас", content="Иван каза 42 неща."), profile)
        assert vec[:10].sum() == pytest.approx(1.0, abs=1e-12)
        assert vec[10:].sum() == pytest.approx(1.0, abs=1e-12)


class TestEmbeddingFeatures:
    def setup_method(self):
        docs = [["аа", "бб"]] * 2
        self.vocab = build_vocab(docs, min_doc_freq=1)
        self.matrix = EmbeddingMatrix(
            input_vectors=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
            output_vectors=np.zeros((2, 3)),
        )

    def test_identical_fields_cosine_one(self):
        vec = embedding_features(art(title="аа бб", content="аа бб"), self.vocab,
                                 self.matrix, expected_dim=3)
        assert vec[-1] == pytest.approx(1.0)

    def test_oov_title_zeros(self):
        vec = embedding_features(art(title="непознато", content="аа"), self.vocab,
                                 self.matrix, expected_dim=3)
        npt.assert_array_equal(vec[:3], np.zeros(3))
        assert vec[-1] == 0.0

    def test_single_word_title(self):
        vec = embedding_features(art(title="аа", content="бб"), self.vocab,
                                 self.matrix, expected_dim=3)
        npt.assert_array_equal(vec[:3], [1.0, 0.0, 0.0])

    def test_wrong_dim_rejected(self):
        with pytest.raises(ModelMismatchError):
            embedding_features(art(), self.vocab, self.matrix, expected_dim=300)


def full_models(profile, word_dim=300, task_dim=128, groups=None):
    docs = [["дума", "факт"]] * 3
    vocab = build_vocab(docs, min_doc_freq=1)
    rng = np.random.default_rng(0)
    matrix = EmbeddingMatrix(input_vectors=rng.normal(size=(2, word_dim)),
                             output_vectors=np.zeros((2, word_dim)))
    ds = labeled_dataset(["дума факт и още", "дума пак", "факт факт", "нищо ново тук сега"])
    tfidf = fit_tfidf(ds, min_df=0)
    kwargs = dict(
        profile=profile,
        scored_lexicons={k: scored(k, {}) for k in ("unigram", "bigram", "named_entity")},
        static_lexicons={
            "typos": StaticLexicon("typos", frozenset({"сеа"})),
            "slang": StaticLexicon("slang", frozenset({"яко"})),
            "foreign": StaticLexicon("foreign", frozenset({"уикенд"})),
            "english_equivalents": StaticLexicon("english_equivalents", frozenset({"лайк"})),
        },
        tfidf=tfidf,
        vocab=vocab,
        matrix=matrix,
        word_dim=word_dim,
        task_dim=task_dim,
    )
    if groups is not None:
        kwargs["groups"] = groups
    return FeatureModels(**kwargs)


class TestAssemble:
    def test_full_length_with_task_embedding(self, profile):
        models = full_models(profile, groups=(
            "pmi", "readability", "orthographic", "irregular", "tfidf",
            "grammatical", "embedding", "task_embedding"))
        vec = assemble(art(title="Шок", content="дума факт"), models,
                       task_embedding=np.zeros(128))
        assert vec.shape == (1917,)

    def test_hand_crafted_length(self, profile):
        models = full_models(profile)
        vec = assemble(art(title="Шок", content="дума факт"), models)
        assert vec.shape == (1789,)

    def test_tfidf_only_ablation_length(self, profile):
        models = full_models(profile, groups=("tfidf",))
        vec = assemble(art(content="дума"), models)
        assert vec.shape == (1100,)

    def test_schema_matches_vector(self, profile):
        models = full_models(profile)
        schema = build_schema(models)
        vec = assemble(art(title="А", content="б"), models)
        assert len(schema) == vec.shape[0]
        assert len(set(schema.names)) == len(schema)

    def test_missing_submodel_rejected(self, profile):
        with pytest.raises(ValueError, match="missing sub-models"):
            FeatureModels(profile=profile, groups=("tfidf",))

    def test_empty_article_all_finite(self, profile):
        models = full_models(profile)
        vec = assemble(art(title="", content=""), models)
        assert np.all(np.isfinite(vec))


class TestScaler:
    def test_max_maps_to_one(self):
        m = np.array([[2.0, -4.0], [1.0, 3.0]])
        scaler = fit_scaler(m)
        scaled = apply_scaler(scaler, m)
        assert scaled[0, 0] == pytest.approx(1.0)
        assert np.abs(scaled).max() <= 1.0 + 1e-15

    def test_zero_column_unchanged(self):
        m = np.array([[0.0, 5.0], [0.0, -5.0]])
        scaler = fit_scaler(m)
        scaled = apply_scaler(scaler, np.array([7.0, 5.0]))
        assert scaled[0] == 7.0

    def test_test_values_not_clamped(self):
        scaler = fit_scaler(np.array([[1.0], [0.5]]))
        assert apply_scaler(scaler, np.array([2.0]))[0] == pytest.approx(2.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_scaler(Scaler(factors=np.ones(3)), np.ones(4))


class TestPersistence:
    def test_feature_model_roundtrip(self, profile, tmp_path):
        models = full_models(profile)
        schema = build_schema(models)
        matrix = np.vstack([assemble(art(title="А б", content="дума факт в", i=i), models)
                            for i in range(3)])
        scaler = fit_scaler(matrix)
        path = tmp_path / "features.model"
        save_feature_model(schema, scaler, path, meta={"config_hash": "x", "seed": "1"})
        schema2, scaler2, meta = load_feature_model(path)
        assert schema2.names == schema.names
        assert schema2.groups == schema.groups
        assert schema2.hash() == schema.hash()
        npt.assert_array_equal(scaler2.factors, scaler.factors)
        assert meta["config_hash"] == "x"

    def test_corrupted_schema_hash_detected(self, profile, tmp_path):
        models = full_models(profile)
        schema = build_schema(models)
        scaler = Scaler(factors=np.ones(len(schema)))
        path = tmp_path / "features.model"
        save_feature_model(schema, scaler, path)
        text = path.read_text("utf-8").replace("pmi_unigram_title_fake_sum",
                                               "pmi_unigram_title_fake_HAX")
        path.write_text(text, encoding="utf-8")
        with pytest.raises(ModelMismatchError, match="hash"):
            load_feature_model(path)

    def test_tfidf_model_roundtrip(self, profile, tmp_path):
        ds = labeled_dataset(["дума факт"] * 7, ["зг"] * 7)
        model = fit_tfidf(ds, min_df=5)
        path = tmp_path / "tfidf.model"
        save_tfidf_model(model, path, meta={"config_hash": "h"})
        model2, meta = load_tfidf_model(path)
        assert model2 == model
        assert meta["config_hash"] == "h"

    def test_matrix_csv_header(self, profile, tmp_path):
        models = full_models(profile, groups=("readability",))
        schema = build_schema(models)
        matrix = np.array([[1.0, 2.0, 3.0, 4.0]])
        path = tmp_path / "m.csv"
        export_matrix_csv(matrix, schema, path)
        lines = path.read_text("utf-8").splitlines()
        assert lines[0] == ",".join(schema.names)
        assert len(lines) == 2
