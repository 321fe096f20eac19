"""Weak supervision from chat logs, a synthetic corpus generator, dataset
serialization and listing-level splitting.

Mining rule: when a seller reply repeats a long enough phrase from one
description sentence, that sentence is labelled the answer to the buyer
message preceding the reply. Replies sharing at most one content word
with every sentence become no-answer examples; a two-word overlap is an
ambiguity buffer and the pair is skipped.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

from marketqa.textproc import split_sentences, tokenize

POSITIVE_MIN_WORDS = 3   # phrase length that labels a sentence
NEGATIVE_MAX_WORDS = 1   # at most this much overlap still counts as no answer

_WORD_RE = re.compile(r"\w")


def _load_stopwords() -> frozenset[str]:
    text = resources.files("marketqa").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w for w in text.split() if w)


STOPWORDS = _load_stopwords()


# ---------------------------------------------------------------------------
# Types


@dataclass
class ChatMessage:
    speaker: str  # "buyer" | "seller"
    text: str
    index: int


@dataclass
class ChatLog:
    listing_id: str
    messages: list[ChatMessage]


@dataclass
class Listing:
    listing_id: str
    title: str
    description: str


@dataclass
class QAExample:
    context: list[tuple[str, str]]  # (speaker, text) before the question
    question: str
    candidates: list[str]
    label: int  # 0 = no answer, else 1-based sentence index
    listing_id: str = ""


@dataclass
class GroundTruth:
    """Generator-known answer for the buyer message at `message_index`."""

    listing_id: str
    message_index: int
    label: int


class DatasetError(ValueError):
    """Malformed dataset line; `records` holds everything parsed before it."""

    def __init__(self, message: str, records: list | None = None):
        super().__init__(message)
        self.records = records if records is not None else []


# ---------------------------------------------------------------------------
# Phrase matching


def _is_word(token: str) -> bool:
    return bool(_WORD_RE.match(token))


def trimmed_word_count(tokens: list[str]) -> int:
    """Words left in a match once stopwords/punctuation at the edges go.

    Interior stopwords still count; punctuation never counts as a word.
    """
    lo, hi = 0, len(tokens)
    while lo < hi and (not _is_word(tokens[lo]) or tokens[lo] in STOPWORDS):
        lo += 1
    while hi > lo and (not _is_word(tokens[hi - 1]) or tokens[hi - 1] in STOPWORDS):
        hi -= 1
    return sum(1 for t in tokens[lo:hi] if _is_word(t))


def match_words(reply_tokens: list[str], sent_tokens: list[str]) -> int:
    """Best trimmed word count over all maximal common contiguous runs."""
    n_b = len(sent_tokens)
    if not reply_tokens or not n_b:
        return 0
    best = 0
    prev = [0] * (n_b + 1)
    for i in range(1, len(reply_tokens) + 1):
        cur = [0] * (n_b + 1)
        tok = reply_tokens[i - 1]
        for j in range(1, n_b + 1):
            if tok == sent_tokens[j - 1]:
                run = prev[j - 1] + 1
                cur[j] = run
                # Maximal runs only: no equal continuation on both sides.
                if (i == len(reply_tokens) or j == n_b
                        or reply_tokens[i] != sent_tokens[j]):
                    count = trimmed_word_count(reply_tokens[i - run:i])
                    if count > best:
                        best = count
        prev = cur
    return best


# ---------------------------------------------------------------------------
# Mining


def mine_examples(chat: ChatLog, listing: Listing, max_history: int = 10) -> list[QAExample]:
    """Extract labelled examples from one chat against one listing.

    Each buyer message directly followed by a seller reply yields at most
    one example; unminable chats yield none.
    """
    sentences = split_sentences(listing.description)
    if not sentences:
        return []
    sent_tokens = [tokenize(s) for s in sentences]
    examples = []
    msgs = chat.messages
    for pos in range(len(msgs) - 1):
        if msgs[pos].speaker != "buyer" or msgs[pos + 1].speaker != "seller":
            continue
        reply_tokens = tokenize(msgs[pos + 1].text)
        best_words, best_idx = 0, -1
        for j, toks in enumerate(sent_tokens):
            words = match_words(reply_tokens, toks)
            if words > best_words:  # ties keep the earliest sentence
                best_words, best_idx = words, j
        if best_words >= POSITIVE_MIN_WORDS:
            label = best_idx + 1
        elif best_words <= NEGATIVE_MAX_WORDS:
            label = 0
        else:
            continue  # ambiguity buffer
        context = [(m.speaker, m.text) for m in msgs[:pos]][-max_history:]
        examples.append(QAExample(context, msgs[pos].text, list(sentences),
                                  label, chat.listing_id))
    return examples


def reply_pairs_from_chats(chats: list[ChatLog]) -> list[tuple[str, str]]:
    """(previous message, reply) for every adjacent message pair."""
    pairs = []
    for chat in chats:
        for prev, nxt in zip(chat.messages, chat.messages[1:]):
            pairs.append((prev.text, nxt.text))
    return pairs


# ---------------------------------------------------------------------------
# Synthetic corpus
#
# Replacement for the real marketplace corpus: listings carry attribute
# sentences from value pools; buyer questions target one attribute with
# lexical overlap; seller replies quote the attribute sentence, so the
# mining rule recovers the intended label.


@dataclass
class _Attribute:
    sentence: str  # template with {v}
    reply: str     # quoting template with {v}
    questions: list[str]
    setup: str     # leading buyer message for follow-up rounds
    values: list[str]


# Question phrasings and description sentences deliberately share no
# content words within an attribute: the ranker has to learn the
# association instead of reading it off a shared embedding row. Listing
# attributes are sampled with a power-law skew, so small training sets
# barely see the tail attributes while a large pretraining corpus does.
ATTRIBUTES: dict[str, _Attribute] = {
    "colour": _Attribute(
        sentence="The finish is {v} all over.",
        reply="The finish is {v} all over, yes.",
        questions=["What colours are available?", "Which colour can I pick?",
                   "What colour is it?"],
        setup="I want to ask about the colour.",
        values=["crimson red", "midnight blue", "forest green", "cream white",
                "charcoal grey", "sunset orange", "royal purple", "dusty pink"],
    ),
    "size": _Attribute(
        sentence="It measures {v} cm across.",
        reply="Yes, it measures {v} cm across.",
        questions=["What size is it?", "Can you tell me the size?",
                   "How big is it overall?"],
        setup="I have a question about the size.",
        values=["120 by 80", "45 by 30", "185 by 60", "90 by 90", "200 by 110",
                "60 by 40"],
    ),
    "price": _Attribute(
        sentence="I will let it go for {v} dollars.",
        reply="I will let it go for {v} dollars, firm.",
        questions=["What is the price?", "How much are you asking?",
                   "What price do you want?"],
        setup="Let me ask about the price.",
        values=["35", "48", "62", "85", "120", "150", "240"],
    ),
    "delivery": _Attribute(
        sentence="Postage to your door is {v} dollars.",
        reply="Postage to your door is {v} dollars, sure.",
        questions=["Do you do delivery?", "Is delivery possible?",
                   "Can you deliver it?"],
        setup="I want to check on delivery.",
        values=["5", "8", "10", "12", "15"],
    ),
    "material": _Attribute(
        sentence="Crafted from {v} throughout.",
        reply="It is crafted from {v} throughout.",
        questions=["What material is it made of?", "Which material is used?",
                   "What is the material?"],
        setup="Quick question about the material.",
        values=["solid oak wood", "brushed steel", "soft cotton",
                "genuine leather", "tempered glass", "recycled plastic"],
    ),
    "condition": _Attribute(
        sentence="Kept pristine, {v}.",
        reply="Kept pristine, {v}, honestly.",
        questions=["What condition is it in?", "Any damage anywhere?",
                   "How worn is it?"],
        setup="Wondering about the condition.",
        values=["zero scratches", "minor scuffs only", "light marks near the base",
                "barely used at all"],
    ),
    "age": _Attribute(
        sentence="Purchased around {v} ago.",
        reply="Purchased around {v} ago, right.",
        questions=["How old is it?", "When did you get it?",
                   "What year is it from?"],
        setup="Curious how old it is.",
        values=["two years", "six months", "one year", "three years",
                "a few weeks"],
    ),
    "brand": _Attribute(
        sentence="Produced by the {v} label.",
        reply="Produced by the {v} label, indeed.",
        questions=["What brand is it?", "Who makes it?", "Which maker is this?"],
        setup="About the brand now.",
        values=["nordika", "fernwood", "castella", "brightline", "oakfield"],
    ),
    "warranty": _Attribute(
        sentence="Guarantee coverage runs until {v}.",
        reply="Guarantee coverage runs until {v}, correct.",
        questions=["Is there any warranty left?", "Does it come with warranty?",
                   "How long is the warranty?"],
        setup="On the warranty topic.",
        values=["next march", "december", "mid next year", "early spring"],
    ),
    "weight": _Attribute(
        sentence="Tips the scale at {v} kg.",
        reply="Tips the scale at {v} kg, yes.",
        questions=["How heavy is it?", "What does it weigh?",
                   "Can one person lift it?"],
        setup="Need to know the weight.",
        values=["12", "7", "25", "40", "3"],
    ),
    "pets": _Attribute(
        sentence="No cats or dogs around it, {v}.",
        reply="No cats or dogs around it, {v}, promise.",
        questions=["Do you have pets at home?", "Any animals in the house?",
                   "Is it from somewhere pet free?"],
        setup="About pets where you live.",
        values=["ever", "never once", "at any point"],
    ),
    "smoking": _Attribute(
        sentence="The flat stays strictly tobacco free, {v}.",
        reply="The flat stays strictly tobacco free, {v}, assured.",
        questions=["Any smoking around the item?", "Was it near smokers?",
                   "Is it from somewhere smoke free?"],
        setup="Regarding smoking near it.",
        values=["always has been", "since day one", "all along"],
    ),
}

# Power-law sampling weight per attribute, in declaration order.
_ATTR_ZIPF_EXPONENT = 1.1

FILLER_SENTENCES = [
    "Thanks for viewing my listing.",
    "First come first served.",
    "No trades please.",
    "Collection near the central station.",
    "Happy to send more photos.",
]

ACK_MESSAGES = ["Hello!", "Thanks!", "Okay noted.", "Sounds good.", "Great, one more thing."]

VAGUE_QUESTIONS = ["What are the options?", "Could you tell me more?",
                   "What can you share about it?"]

NEGATIVE_REPLIES = ["Sorry, no idea about that one.",
                    "Sorry, there was nothing written about that."]

_NOUNS = ["cat tower", "bookshelf", "office chair", "dining table", "road bicycle",
          "sofa bed", "standing desk", "floor lamp"]
_ADJS = ["sturdy", "modern", "vintage", "spacious", "lightweight", "foldable"]


def generate_synthetic(seed: int, n_listings: int, questions_per_listing: int = 4,
                       negative_frac: float = 0.37, follow_up_frac: float = 0.25,
                       attrs_per_listing: int = 3,
                       attr_skew: float = _ATTR_ZIPF_EXPONENT,
                       ) -> tuple[list[ChatLog], list[Listing], list[GroundTruth]]:
    """Deterministic synthetic chats + listings with known answer labels.

    `attr_skew` is the power-law exponent over attributes; 0 samples them
    uniformly.
    """
    rng = np.random.default_rng(seed)
    attr_names = list(ATTRIBUTES)
    weights = np.array([1.0 / (i + 1) ** attr_skew
                        for i in range(len(attr_names))])
    weights /= weights.sum()
    chats, listings, truths = [], [], []
    for li in range(n_listings):
        listing_id = f"L{li:06d}"
        present = [str(a) for a in rng.choice(attr_names, size=attrs_per_listing,
                                              replace=False, p=weights)]
        absent = [a for a in attr_names if a not in present]
        values = {a: ATTRIBUTES[a].values[rng.integers(len(ATTRIBUTES[a].values))]
                  for a in present}
        sentences = [ATTRIBUTES[a].sentence.format(v=values[a]) for a in present]
        sentences += [str(s) for s in rng.choice(FILLER_SENTENCES,
                                                 size=int(rng.integers(1, 3)),
                                                 replace=False)]
        rng.shuffle(sentences)
        title = f"{_ADJS[rng.integers(len(_ADJS))]} {_NOUNS[rng.integers(len(_NOUNS))]}"
        listings.append(Listing(listing_id, title, " ".join(sentences)))

        messages: list[ChatMessage] = []

        def say(speaker: str, text: str) -> int:
            messages.append(ChatMessage(speaker, text, len(messages)))
            return len(messages) - 1

        for _ in range(questions_per_listing):
            negative = rng.random() < negative_frac
            attr = absent[rng.integers(len(absent))] if negative \
                else present[rng.integers(len(present))]
            spec_attr = ATTRIBUTES[attr]
            if rng.random() < follow_up_frac:
                say("buyer", spec_attr.setup)
                q_idx = say("buyer", VAGUE_QUESTIONS[rng.integers(len(VAGUE_QUESTIONS))])
            else:
                say("buyer", ACK_MESSAGES[rng.integers(len(ACK_MESSAGES))])
                q_idx = say("buyer", spec_attr.questions[rng.integers(len(spec_attr.questions))])
            if negative:
                say("seller", NEGATIVE_REPLIES[rng.integers(len(NEGATIVE_REPLIES))])
                label = 0
            else:
                say("seller", spec_attr.reply.format(v=values[attr]))
                label = sentences.index(spec_attr.sentence.format(v=values[attr])) + 1
            truths.append(GroundTruth(listing_id, q_idx, label))
        chats.append(ChatLog(listing_id, messages))
    return chats, listings, truths


# ---------------------------------------------------------------------------
# Split


def _listing_fraction(listing_id: str, seed: int) -> float:
    digest = hashlib.sha256(f"{seed}:{listing_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2.0 ** 64


def split(examples: list[QAExample], train_frac: float = 0.9, seed: int = 0,
          ) -> tuple[list[QAExample], list[QAExample]]:
    """Listing-hash split: no listing straddles train and test."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must be strictly between 0 and 1")
    train, test = [], []
    for ex in examples:
        if _listing_fraction(ex.listing_id, seed) < train_frac:
            train.append(ex)
        else:
            test.append(ex)
    return train, test


# ---------------------------------------------------------------------------
# Line-delimited serialization


def _parse_lines(path, convert, records):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                records.append(convert(obj))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}", records) from exc
    return records


def write_dataset(path, examples: list[QAExample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps({
                "context": [{"speaker": s, "text": t} for s, t in ex.context],
                "question": ex.question,
                "candidates": ex.candidates,
                "label": ex.label,
                "listing_id": ex.listing_id,
            }, ensure_ascii=False) + "\n")


def _example_from_json(obj: dict) -> QAExample:
    ex = QAExample(
        context=[(m["speaker"], m["text"]) for m in obj.get("context", [])],
        question=obj["question"],
        candidates=list(obj["candidates"]),
        label=int(obj["label"]),
        listing_id=str(obj.get("listing_id", "")),
    )
    if not 0 <= ex.label <= len(ex.candidates):
        raise ValueError(f"label {ex.label} out of range for "
                         f"{len(ex.candidates)} candidates")
    return ex


def read_dataset(path) -> list[QAExample]:
    return _parse_lines(path, _example_from_json, [])


def write_listings(path, listings: list[Listing]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for li in listings:
            fh.write(json.dumps({"listing_id": li.listing_id, "title": li.title,
                                 "description": li.description},
                                ensure_ascii=False) + "\n")


def read_listings(path) -> list[Listing]:
    return _parse_lines(
        path,
        lambda o: Listing(str(o["listing_id"]), o.get("title", ""), o["description"]),
        [])


def write_chats(path, chats: list[ChatLog]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for chat in chats:
            fh.write(json.dumps({
                "listing_id": chat.listing_id,
                "messages": [{"speaker": m.speaker, "text": m.text, "index": m.index}
                             for m in chat.messages],
            }, ensure_ascii=False) + "\n")


def _chat_from_json(obj: dict) -> ChatLog:
    messages = [ChatMessage(m["speaker"], m["text"], int(m["index"]))
                for m in obj["messages"]]
    indices = [m.index for m in messages]
    if indices != sorted(set(indices)):
        raise ValueError("message indices must be strictly increasing")
    return ChatLog(str(obj["listing_id"]), messages)


def read_chats(path) -> list[ChatLog]:
    return _parse_lines(path, _chat_from_json, [])


def write_truths(path, truths: list[GroundTruth]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in truths:
            fh.write(json.dumps({"listing_id": t.listing_id,
                                 "message_index": t.message_index,
                                 "label": t.label}) + "\n")


def read_truths(path) -> list[GroundTruth]:
    return _parse_lines(
        path,
        lambda o: GroundTruth(str(o["listing_id"]), int(o["message_index"]),
                              int(o["label"])),
        [])


def write_pairs(path, pairs: list[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ctx, reply in pairs:
            fh.write(json.dumps({"context": ctx, "reply": reply},
                                ensure_ascii=False) + "\n")


def read_pairs(path) -> list[tuple[str, str]]:
    return _parse_lines(path, lambda o: (o["context"], o["reply"]), [])
