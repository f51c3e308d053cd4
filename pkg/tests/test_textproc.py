import numpy as np
import pytest

from fakenews.textproc import (
    COARSE_TAGS,
    LanguageProfile,
    coarse_pos_tag,
    count_lexicon_hits,
    count_syllables,
    extract_named_entities,
    split_sentences,
    tokenize,
)


@pytest.fixture(scope="module")
def profile():
    return LanguageProfile.bulgarian()


class TestTokenize:
    def test_words_exclude_punctuation(self):
        assert tokenize("Шок! Това е.").lowers() == ["шок", "това", "е"]

    def test_empty_text(self):
        assert len(tokenize("")) == 0

    def test_url_is_single_token(self):
        seq = tokenize("виж http://a.bg сега")
        assert seq.surfaces() == ["виж", "http://a.bg", "сега"]

    def test_offsets_recover_surface(self):
        text = "Чудо — видео тук: www.example.com/x?!"
        for tok in tokenize(text):
            assert text[tok.start:tok.end] == tok.surface

    def test_spans_increasing(self):
        toks = tokenize("а б в г д").tokens
        for left, right in zip(toks, toks[1:]):
            assert left.end <= right.start

    def test_concatenation_is_additive(self):
        a = "Първа новина за деня"
        b = "втора, по-дълга новина!"
        assert len(tokenize(a + " " + b)) == len(tokenize(a)) + len(tokenize(b))


class TestSplitSentences:
    def test_three_terminators(self, profile):
        assert len(split_sentences("А. Б! В?", profile)) == 3

    def test_no_terminator_is_one_sentence(self, profile):
        assert len(split_sentences("изречение без край", profile)) == 1

    def test_empty_text(self, profile):
        assert split_sentences("", profile) == []

    def test_abbreviation_does_not_split(self, profile):
        spans = split_sentences("Роден през 1988 г. в София. Живее там.", profile)
        assert len(spans) == 2

    def test_spans_cover_non_whitespace(self, profile):
        text = "Първо изречение! Второ... И трето без точка"
        spans = split_sentences(text, profile)
        covered = set()
        for start, end in spans:
            covered.update(range(start, end))
        for i, ch in enumerate(text):
            if not ch.isspace():
                assert i in covered, f"char {i} ({ch!r}) not covered"

    def test_ellipsis_run(self, profile):
        assert len(split_sentences("Чакай… Сега!", profile)) == 2


class TestSyllables:
    def test_two_vowel_groups(self, profile):
        assert count_syllables("ново", profile) == 2

    def test_no_vowels(self, profile):
        assert count_syllables("срв", profile) == 0

    def test_hand_counted_word(self, profile):
        # е, о, е, и, е form five maximal vowel groups
        assert count_syllables("феноменните", profile) == 5

    def test_adjacent_vowels_form_one_group(self, profile):
        assert count_syllables("боа", profile) == 1  # о+а contiguous
        assert count_syllables("вода", profile) == 2

    def test_bounded_by_vowel_count(self, profile):
        rng = np.random.default_rng(7)
        alphabet = "абвгдежзиклмнопрстуфхцчшщъюя"
        for _ in range(200):
            word = "".join(rng.choice(list(alphabet), size=rng.integers(1, 12)))
            n_vowels = sum(1 for ch in word if ch in profile.vowels)
            assert count_syllables(word, profile) <= n_vowels


class TestNamedEntities:
    def test_run_after_sentence_initial_word(self, profile):
        assert extract_named_entities("Вчера Иван Петров каза", profile) == ["Иван Петров"]

    def test_sentence_initial_single_excluded(self, profile):
        assert extract_named_entities("Това е факт", profile) == []

    def test_mid_sentence_single_kept(self, profile):
        assert extract_named_entities("Иван видя Мария", profile) == ["Мария"]

    def test_punctuation_breaks_runs(self, profile):
        assert extract_named_entities("каза Иван. Петров дойде.", profile) == ["Иван"]

    def test_empty(self, profile):
        assert extract_named_entities("", profile) == []


class TestCoarsePosTag:
    def test_lexicon_lookup_wins(self, profile):
        tags = coarse_pos_tag(tokenize("каза"), profile)
        assert tags == ["VERB"]

    def test_numeric_rule(self, profile):
        assert coarse_pos_tag(tokenize("42"), profile) == ["NUM"]
        assert coarse_pos_tag(tokenize("3,14"), profile) == ["NUM", "NUM"]

    def test_suffix_fallback(self, profile):
        # not in the lexicon; matches the -ация noun suffix
        assert coarse_pos_tag(tokenize("дезинформация"), profile) == ["NOUN"]

    def test_unknown_token_is_other(self, profile):
        assert coarse_pos_tag(tokenize("кзп"), profile) == ["OTHER"]

    def test_one_tag_per_token_in_tagset(self, profile):
        seq = tokenize("Иван каза 42 невероятни неща за изборите вчера")
        tags = coarse_pos_tag(seq, profile)
        assert len(tags) == len(seq)
        assert all(t in COARSE_TAGS for t in tags)


class TestCountLexiconHits:
    def test_occurrences_not_types(self):
        seq = tokenize("мега яко мега парти")
        assert count_lexicon_hits(seq, {"мега"}) == 2

    def test_empty_lexicon(self):
        assert count_lexicon_hits(tokenize("каквото и да е"), set()) == 0

    def test_case_insensitive(self):
        assert count_lexicon_hits(tokenize("МЕГА парти"), {"мега"}) == 1


class TestLanguageProfile:
    def test_tagset_is_exactly_ten(self, profile):
        assert len(profile.tagset) == 10

    def test_bad_suffix_tag_rejected(self, profile):
        with pytest.raises(ValueError):
            LanguageProfile(
                vowels=profile.vowels,
                stopwords=profile.stopwords,
                pos_lexicon={},
                suffix_rules=(("ане", "GERUND"),),
            )

    def test_load_from_files(self, tmp_path):
        (tmp_path / "stop.txt").write_text("и\nна\n", encoding="utf-8")
        (tmp_path / "pos.tsv").write_text("каза\tVERB\n", encoding="utf-8")
        (tmp_path / "suf.tsv").write_text("ация\tNOUN\n", encoding="utf-8")
        prof = LanguageProfile.load(tmp_path / "stop.txt", tmp_path / "pos.tsv", tmp_path / "suf.tsv")
        assert "и" in prof.stopwords
        assert prof.pos_lexicon["каза"] == "VERB"
        assert prof.suffix_rules == (("ация", "NOUN"),)
