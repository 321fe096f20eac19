"""Tokenizer, sentence splitter, vocabulary and featurizer tests.

Golden values were produced by hand-running the stated rules; vocabulary
truncation is cross-checked against a brute-force frequency counter.
"""

import string

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marketqa import textproc
from marketqa.textproc import (
    BagOfNGrams,
    build_vocab,
    featurize,
    load_vocab,
    save_vocab,
    split_sentences,
    tokenize,
)


class TestTokenize:
    def test_basic_question(self):
        assert tokenize("Can you do delivery?") == ["can", "you", "do", "delivery", "?"]

    def test_empty(self):
        assert tokenize("") == []

    def test_hyphenated_golden(self):
        # Hand-run of the rules: punctuation stands alone, words group.
        assert tokenize("cream-white or black") == ["cream", "-", "white", "or", "black"]

    def test_apostrophe_and_currency(self):
        assert tokenize("It's $15!") == ["it", "'", "s", "$", "15", "!"]

    def test_lowercases(self):
        assert tokenize("HELLO World") == ["hello", "world"]

    def test_no_whitespace_in_tokens(self):
        for tok in tokenize("a b\tc\nd  e"):
            assert tok and not any(ch.isspace() for ch in tok)

    @given(st.text(alphabet=string.printable, max_size=80))
    @settings(max_examples=200)
    def test_space_join_retokenize_idempotent(self, text):
        once = tokenize(text)
        assert tokenize(" ".join(once)) == once


class TestSplitSentences:
    def test_two_sentences_from_description(self):
        text = ("At 185cm tall, it's a great vertical gym.\n"
                "8 scratch posts ensure healthy nails.")
        assert split_sentences(text) == [
            "At 185cm tall, it's a great vertical gym.",
            "8 scratch posts ensure healthy nails.",
        ]

    def test_no_terminal_punctuation(self):
        assert split_sentences("no terminal punctuation") == ["no terminal punctuation"]

    def test_terminal_punctuation_golden(self):
        assert split_sentences("A. B! C?") == ["A.", "B!", "C?"]

    def test_decimal_not_split(self):
        assert split_sentences("It is 1.5m wide. Nice.") == ["It is 1.5m wide.", "Nice."]

    def test_empty_and_whitespace(self):
        assert split_sentences("") == []
        assert split_sentences(" \n  \n") == []

    @given(st.text(alphabet=string.printable, max_size=120))
    @settings(max_examples=200)
    def test_never_empty_and_covers_text(self, text):
        sentences = split_sentences(text)
        assert all(s.strip() == s and s for s in sentences)
        # Concatenation covers all non-delimiter text in order.
        remainder = text
        for s in sentences:
            pos = remainder.find(s)
            assert pos >= 0
            remainder = remainder[pos + len(s):]


def brute_force_counts(corpus):
    """Independent frequency count: plain dict loops over token lists."""
    uni, bi = {}, {}
    for doc in corpus:
        toks = tokenize(doc)
        for t in toks:
            uni[t] = uni.get(t, 0) + 1
        for a, b in zip(toks, toks[1:]):
            bi[(a, b)] = bi.get((a, b), 0) + 1
    return uni, bi


class TestBuildVocab:
    def test_small_corpus_with_caps(self):
        vocab = build_vocab(["a b", "a c"], 2, 2)
        # a:2 wins, b/c tie at 1 -> 'b' lexicographically.
        assert vocab.unigram_ids == {"a": 0, "b": 1}
        assert vocab.bigram_ids == {("a", "b"): 2, ("a", "c"): 3}

    def test_caps_respected(self):
        corpus = [f"w{i} w{(i + 1) % 40}" for i in range(40)]
        vocab = build_vocab(corpus, 7, 5)
        assert len(vocab.unigram_ids) == 7
        assert len(vocab.bigram_ids) == 5

    def test_empty_corpus(self):
        vocab = build_vocab([], 10, 10)
        assert vocab.size == 0

    def test_ids_dense_and_ranges_disjoint(self):
        vocab = build_vocab(["the cat sat", "the cat ran", "a dog ran"], 100, 100)
        ids = sorted(vocab.unigram_ids.values()) + sorted(vocab.bigram_ids.values())
        assert ids == list(range(vocab.size))
        assert max(vocab.unigram_ids.values()) < min(vocab.bigram_ids.values())

    def test_matches_brute_force_ranking(self):
        rng = np.random.default_rng(5)
        words = [f"w{i}" for i in range(12)]
        corpus = [" ".join(rng.choice(words, size=8)) for _ in range(30)]
        vocab = build_vocab(corpus, 6, 9)
        uni, bi = brute_force_counts(corpus)
        expected_uni = sorted(uni.items(), key=lambda kv: (-kv[1], kv[0]))[:6]
        expected_bi = sorted(bi.items(), key=lambda kv: (-kv[1], kv[0]))[:9]
        assert [g for g, _ in expected_uni] == list(vocab.unigram_ids)
        assert [g for g, _ in expected_bi] == list(vocab.bigram_ids)
        for gram, freq in expected_uni:
            assert vocab.freqs[vocab.unigram_ids[gram]] == freq

    def test_document_order_insensitive(self):
        corpus = ["the cat sat", "a dog ran fast", "the dog sat", "cats everywhere"]
        a = build_vocab(corpus, 5, 5)
        b = build_vocab(list(reversed(corpus)), 5, 5)
        assert a.unigram_ids == b.unigram_ids
        assert a.bigram_ids == b.bigram_ids

    def test_invalid_caps(self):
        with pytest.raises(ValueError):
            build_vocab(["a"], 0, 5)


class TestFeaturize:
    @pytest.fixture
    def vocab(self):
        return build_vocab(["a b"], 10, 10)  # a:0 b:1 a·b:2

    def test_all_oov(self, vocab):
        assert len(featurize("x y z", vocab)) == 0

    def test_manual_enumeration(self, vocab):
        bag = featurize("a b", vocab)
        assert sorted(bag.ids.tolist()) == [0, 1, 2]

    def test_multiplicity_with_oov_bigram(self, vocab):
        bag = featurize("a a", vocab)  # bigram a·a not in vocab
        assert sorted(bag.ids.tolist()) == [0, 0]

    def test_ids_always_in_range(self, vocab):
        for text in ("a b a b b", "b a", "a . b", ""):
            bag = featurize(text, vocab)
            assert all(0 <= i < vocab.size for i in bag.ids.tolist())

    def test_deterministic(self, vocab):
        a = featurize("a b a", vocab)
        b = featurize("a b a", vocab)
        assert a.ids.tolist() == b.ids.tolist()

    def test_max_tokens_truncates(self, vocab):
        full = featurize("a a a a", vocab)
        capped = featurize("a a a a", vocab, max_tokens=2)
        assert len(capped) < len(full)
        assert capped.ids.tolist() == [0, 0]


class TestVocabFile:
    def test_round_trip(self, tmp_path):
        vocab = build_vocab(["the cat sat on the mat", "a cat ran"], 8, 8)
        path = tmp_path / "vocab.tsv"
        save_vocab(vocab, path)
        loaded = load_vocab(path)
        assert loaded.unigram_ids == vocab.unigram_ids
        assert loaded.bigram_ids == vocab.bigram_ids
        assert loaded.freqs == vocab.freqs

    def test_file_layout(self, tmp_path):
        vocab = build_vocab(["a b"], 4, 4)
        path = tmp_path / "vocab.tsv"
        save_vocab(vocab, path)
        lines = path.read_text("utf-8").splitlines()
        assert lines[0].split("\t") == ["a", "0", "1"]
        assert lines[1].split("\t") == ["b", "1", "1"]
        assert lines[2].split("\t")[0] == "a·b"
        ids = [int(line.split("\t")[1]) for line in lines]
        assert ids == sorted(ids)

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "vocab.tsv"
        path.write_text("just-one-field\n", encoding="utf-8")
        with pytest.raises(ValueError, match="3 tab-separated"):
            load_vocab(path)
