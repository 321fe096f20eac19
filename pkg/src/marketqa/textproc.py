"""Tokenization, sentence splitting and n-gram bag featurization.

Text is reduced to a multiset of unigram/bigram ids drawn from a
frequency-truncated vocabulary. Out-of-vocabulary n-grams are skipped, so
an all-OOV text maps to the empty bag (and later to the zero vector).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

# Words group, any other non-space character stands alone.
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

# Sentence boundary: terminal punctuation followed by whitespace.
_SENT_BOUNDARY_RE = re.compile(r"(?<=[.!?])\s+")

Bigram = tuple[str, str]


def tokenize(text: str) -> list[str]:
    """Lowercase and split into word tokens and single punctuation tokens."""
    return _TOKEN_RE.findall(text.lower())


def split_sentences(text: str) -> list[str]:
    """Split raw text into sentences on newlines and terminal punctuation.

    Terminal punctuation (. ! ?) ends a sentence only when followed by
    whitespace, so decimals like "1.5m" stay intact. Results are stripped
    and empty pieces dropped.
    """
    sentences = []
    for line in text.split("\n"):
        for piece in _SENT_BOUNDARY_RE.split(line):
            piece = piece.strip()
            if piece:
                sentences.append(piece)
    return sentences


@dataclass
class BagOfNGrams:
    """Multiset of n-gram ids for one text; duplicates carry multiplicity."""

    ids: np.ndarray  # int64, shape (m,)

    def __len__(self) -> int:
        return int(self.ids.shape[0])


@dataclass
class NGramVocab:
    """Frequency-truncated unigram + bigram vocabulary with dense ids.

    Unigrams occupy ids [0, n_unigrams); bigrams follow in
    [n_unigrams, size). Truncation keeps the most frequent n-grams up to
    each cap, ties broken lexicographically, so builds are reproducible
    and insensitive to corpus document order.
    """

    unigram_ids: dict[str, int]
    bigram_ids: dict[Bigram, int]
    unigram_cap: int
    bigram_cap: int
    freqs: dict[int, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.unigram_ids) + len(self.bigram_ids)

    def __len__(self) -> int:
        return self.size


def _top_ngrams(counts: Counter, cap: int) -> list:
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:cap]


def build_vocab(corpus: Iterable[str], unigram_cap: int, bigram_cap: int) -> NGramVocab:
    """Count n-grams over the corpus and keep the most frequent ones.

    Bigrams never span document boundaries: each corpus entry is counted
    independently.
    """
    if unigram_cap < 1 or bigram_cap < 1:
        raise ValueError("vocabulary caps must be >= 1")
    uni_counts: Counter = Counter()
    bi_counts: Counter = Counter()
    for doc in corpus:
        tokens = tokenize(doc)
        uni_counts.update(tokens)
        bi_counts.update(zip(tokens, tokens[1:]))

    unigram_ids: dict[str, int] = {}
    bigram_ids: dict[Bigram, int] = {}
    freqs: dict[int, int] = {}
    for gram, freq in _top_ngrams(uni_counts, unigram_cap):
        gram_id = len(unigram_ids)
        unigram_ids[gram] = gram_id
        freqs[gram_id] = freq
    offset = len(unigram_ids)
    for gram, freq in _top_ngrams(bi_counts, bigram_cap):
        gram_id = offset + len(bigram_ids)
        bigram_ids[gram] = gram_id
        freqs[gram_id] = freq
    return NGramVocab(unigram_ids, bigram_ids, unigram_cap, bigram_cap, freqs)


def featurize(text: str, vocab: NGramVocab, max_tokens: int | None = None) -> BagOfNGrams:
    """Map text to the bag of its in-vocabulary unigram and bigram ids.

    Duplicates are kept (multiplicity matters for the embedding sum);
    OOV n-grams are dropped. `max_tokens` truncates the token stream
    before n-gram extraction.
    """
    tokens = tokenize(text)
    if max_tokens is not None:
        tokens = tokens[:max_tokens]
    ids = []
    uni = vocab.unigram_ids
    bi = vocab.bigram_ids
    for tok in tokens:
        gram_id = uni.get(tok)
        if gram_id is not None:
            ids.append(gram_id)
    for pair in zip(tokens, tokens[1:]):
        gram_id = bi.get(pair)
        if gram_id is not None:
            ids.append(gram_id)
    return BagOfNGrams(np.asarray(ids, dtype=np.int64))


_BIGRAM_JOINT = "·"  # ·


def _format_bigram(pair: Bigram) -> str:
    return pair[0] + _BIGRAM_JOINT + pair[1]


def _parse_bigram(raw: str) -> Bigram:
    # Word tokens never contain the joint character; the only token that
    # does is the single punctuation token "·" itself.
    if raw == _BIGRAM_JOINT * 3:
        return (_BIGRAM_JOINT, _BIGRAM_JOINT)
    if raw.startswith(_BIGRAM_JOINT * 2):
        return (_BIGRAM_JOINT, raw[2:])
    if raw.endswith(_BIGRAM_JOINT * 2):
        return (raw[:-2], _BIGRAM_JOINT)
    left, sep, right = raw.partition(_BIGRAM_JOINT)
    if not sep or _BIGRAM_JOINT in right:
        raise ValueError(f"malformed bigram entry: {raw!r}")
    return (left, right)


def save_vocab(vocab: NGramVocab, path) -> None:
    """Write the vocabulary file: `<ngram>\\t<id>\\t<freq>`, sorted by id."""
    with open(path, "w", encoding="utf-8") as fh:
        for gram, gram_id in sorted(vocab.unigram_ids.items(), key=lambda kv: kv[1]):
            fh.write(f"{gram}\t{gram_id}\t{vocab.freqs.get(gram_id, 0)}\n")
        for pair, gram_id in sorted(vocab.bigram_ids.items(), key=lambda kv: kv[1]):
            fh.write(f"{_format_bigram(pair)}\t{gram_id}\t{vocab.freqs.get(gram_id, 0)}\n")


def load_vocab(path) -> NGramVocab:
    """Read a vocabulary file written by `save_vocab`.

    The file does not record the build-time caps, so the loaded vocab
    reports its own sizes as caps.
    """
    unigram_ids: dict[str, int] = {}
    bigram_ids: dict[Bigram, int] = {}
    freqs: dict[int, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            name, raw_id, raw_freq = parts
            gram_id, freq = int(raw_id), int(raw_freq)
            freqs[gram_id] = freq
            if _BIGRAM_JOINT in name and len(name) > 1:
                bigram_ids[_parse_bigram(name)] = gram_id
            else:
                unigram_ids[name] = gram_id
    vocab = NGramVocab(unigram_ids, bigram_ids, max(len(unigram_ids), 1),
                       max(len(bigram_ids), 1), freqs)
    _check_dense_ids(vocab)
    return vocab


def _check_dense_ids(vocab: NGramVocab) -> None:
    ids = sorted(vocab.unigram_ids.values()) + sorted(vocab.bigram_ids.values())
    if ids != list(range(len(ids))):
        raise ValueError("vocabulary ids are not dense in [0, size)")


def vocab_items(vocab: NGramVocab) -> Iterator[tuple[str, int, int]]:
    """Yield (display name, id, freq) in id order; bigrams use the · joint."""
    for gram, gram_id in sorted(vocab.unigram_ids.items(), key=lambda kv: kv[1]):
        yield gram, gram_id, vocab.freqs.get(gram_id, 0)
    for pair, gram_id in sorted(vocab.bigram_ids.items(), key=lambda kv: kv[1]):
        yield _format_bigram(pair), gram_id, vocab.freqs.get(gram_id, 0)
