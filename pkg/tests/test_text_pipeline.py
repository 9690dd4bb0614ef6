import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relstream import EmbeddingTable, clean, to_matrix, tokenize


class TestClean:
    def test_url_hashtag_punctuation_case(self):
        # manual application of the rule order: URLs, then marks, then symbols
        assert clean("My house is on FIRE! http://t.co/ab #help") == "my house is on fire help"

    def test_empty(self):
        assert clean("") == ""

    def test_lowercase_only_change(self):
        assert clean("Hello") == "hello"

    def test_mentions_dropped_hashtag_word_kept(self):
        assert clean("@alice please RT #flood warning") == "please rt flood warning"

    def test_symbols_become_single_spaces(self):
        assert clean("fire,smoke...ash") == "fire smoke ash"


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=80))
def test_clean_is_idempotent_and_lowercase_closed(raw):
    once = clean(raw)
    assert clean(once) == once
    assert once == once.lower()
    assert set(once) <= set("abcdefghijklmnopqrstuvwxyz0123456789 ")
    assert once == once.strip()
    assert "  " not in once


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=80))
def test_tokenize_of_clean_never_yields_empty_tokens(raw):
    tokens = tokenize(clean(raw))
    assert all(tokens)
    assert tokens == [t for t in tokens if t]


class TestTokenize:
    def test_basic(self):
        assert tokenize("my house is on fire") == ["my", "house", "is", "on", "fire"]

    def test_empty(self):
        assert tokenize("") == []


@pytest.fixture
def tiny_table():
    return EmbeddingTable.from_pairs({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [1.0, 1.0]})


class TestToMatrix:
    def test_direct_construction_with_padding(self, tiny_table):
        m = to_matrix(["a", "b"], tiny_table, max_len=4)
        assert m.length == 2
        np.testing.assert_array_equal(m.rows[0], [1, 0])
        np.testing.assert_array_equal(m.rows[1], [0, 1])
        np.testing.assert_array_equal(m.rows[2:], np.zeros((2, 2)))

    def test_oov_tokens_are_skipped(self, tiny_table):
        m = to_matrix(["a", "zzz", "b"], tiny_table, max_len=4)
        assert m.length == 2
        np.testing.assert_array_equal(m.rows[0], [1, 0])
        np.testing.assert_array_equal(m.rows[1], [0, 1])

    def test_truncation_keeps_first_embeddable(self, tiny_table):
        m = to_matrix(["a", "b", "c"] * 4, tiny_table, max_len=4)
        assert m.length == 4
        np.testing.assert_array_equal(m.rows[3], [1, 0])  # 4th embeddable token is "a"

    def test_all_oov_is_degenerate(self, tiny_table):
        m = to_matrix(["x", "y"], tiny_table, max_len=4)
        assert m.length == 0
        assert m.is_degenerate

    def test_max_len_must_be_positive(self, tiny_table):
        with pytest.raises(ValueError):
            to_matrix(["a"], tiny_table, max_len=0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["a", "b", "c", "zzz", "qqq"]), max_size=12))
def test_to_matrix_shape_and_mask_invariants(tokens):
    table = EmbeddingTable.from_pairs({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [1.0, 1.0]})
    m = to_matrix(tokens, table, max_len=5)
    assert m.rows.shape == (5, 2)
    assert np.all(np.isfinite(m.rows))
    assert 0 <= m.length <= 5
    np.testing.assert_array_equal(m.mask, np.arange(5) < m.length)
    assert not m.rows[m.length :].any()
