import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evt.corpus import Corpus, Sentence
from evt.embeddings import (
    PAD, UNK, EmbeddingTable, VectorFormatError, build_char_vocab, load_text_vectors, lookup,
    oov_rate, unk_vector,
)

BODY = "casa 0.1 0.2 0.3\nandare 1 2 3\n"


def test_load_plain():
    table = load_text_vectors(io.StringIO(BODY))
    assert table.dim == 3 and len(table) == 2
    np.testing.assert_array_equal(table.entries["andare"], [1.0, 2.0, 3.0])


def test_load_with_header_matches_plain():
    a = load_text_vectors(io.StringIO(BODY))
    b = load_text_vectors(io.StringIO("2 3\n" + BODY), has_header=True)
    assert a.entries.keys() == b.entries.keys()
    for k in a.entries:
        np.testing.assert_array_equal(a.entries[k], b.entries[k])
    np.testing.assert_array_equal(a.unk_vector, b.unk_vector)


def test_load_ragged_line():
    with pytest.raises(VectorFormatError, match="line 3"):
        load_text_vectors(io.StringIO(BODY + "cane 1 2\n"))


def test_load_header_mismatch():
    with pytest.raises(VectorFormatError):
        load_text_vectors(io.StringIO("2 4\n" + BODY), has_header=True)


def test_load_empty():
    with pytest.raises(VectorFormatError):
        load_text_vectors(io.StringIO(""))


def test_load_ignores_trailing_whitespace_and_final_newline():
    a = load_text_vectors(io.StringIO(BODY))
    b = load_text_vectors(io.StringIO("casa 0.1 0.2 0.3   \nandare 1 2 3"))
    assert a.entries.keys() == b.entries.keys()
    np.testing.assert_array_equal(a.entries["casa"], b.entries["casa"])


def test_duplicates_keep_first():
    table = load_text_vectors(io.StringIO(BODY + "casa 9 9 9\n"))
    np.testing.assert_array_equal(table.entries["casa"], [0.1, 0.2, 0.3])
    assert table.duplicates == 1


def test_unk_vector_policy():
    v = unk_vector(300)
    assert v.shape == (300,) and np.all(np.abs(v) <= 0.25)
    np.testing.assert_array_equal(v, unk_vector(300))


def test_lookup_chain():
    table = EmbeddingTable.from_dict({
        "Casa": [1.0, 0.0], "casa": [2.0, 0.0], "anno": [3.0, 0.0], "nel 0000": [4.0, 0.0],
        "0000": [5.0, 0.0],
    })
    np.testing.assert_array_equal(lookup(table, "Casa"), [1.0, 0.0])
    np.testing.assert_array_equal(lookup(table, "CASA"), [2.0, 0.0])
    np.testing.assert_array_equal(lookup(table, "2014"), [5.0, 0.0])
    np.testing.assert_array_equal(lookup(table, "zzz"), table.unk_vector)


@given(st.text(min_size=1, max_size=8))
def test_lookup_total(token):
    table = EmbeddingTable.from_dict({"a": [1.0, 2.0, 3.0]})
    assert lookup(table, token).shape == (3,)


def _corpus(*words):
    return Corpus((Sentence.from_words(words),))


def test_oov_none_missing():
    table = EmbeddingTable.from_dict({w: [0.0] for w in ["a", "b"]})
    r = oov_rate(_corpus("a", "B", "a"), table)
    assert (r.token_oov_rate, r.type_oov_rate) == (0.0, 0.0)


def test_oov_one_of_four():
    table = EmbeddingTable.from_dict({w: [0.0] for w in ["a", "b", "c"]})
    r = oov_rate(_corpus("a", "b", "c", "d"), table)
    assert r.token_oov_rate == 25.0 and r.type_oov_rate == 25.0
    assert (r.n_tokens, r.n_types) == (4, 4)


def test_oov_empty_corpus():
    r = oov_rate(Corpus(), EmbeddingTable.from_dict({"a": [0.0]}))
    assert (r.token_oov_rate, r.type_oov_rate, r.n_tokens) == (0.0, 0.0, 0)


@settings(max_examples=50)
@given(st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=20),
       st.sets(st.sampled_from("abcdefgh")), st.sets(st.sampled_from("abcdefgh")))
def test_oov_monotone(words, vocab, extra):
    small = EmbeddingTable.from_dict({w: [0.0] for w in vocab | {"z"}})
    big = EmbeddingTable.from_dict({w: [0.0] for w in vocab | extra | {"z"}})
    a, b = oov_rate(_corpus(*words), small), oov_rate(_corpus(*words), big)
    assert b.token_oov_rate <= a.token_oov_rate
    assert b.type_oov_rate <= a.type_oov_rate
    assert 0 <= a.token_oov_rate <= 100 and 0 <= a.type_oov_rate <= 100


def test_char_vocab():
    vocab = build_char_vocab(_corpus("ba"))
    assert vocab.chars == (PAD, UNK, "a", "b")
    assert build_char_vocab(Corpus()).chars == (PAD, UNK)
    assert vocab.encode("abz") == [2, 3, 1]
