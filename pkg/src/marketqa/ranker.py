"""Dual-tower dot-product ranker with a learned no-answer slot.

A question tower h(.) and a candidate tower g(.) map n-gram bags to a
shared space; candidate i scores h.g_i, with slot 0 held by a free
learned no-answer vector. Softmax over the N+1 scores gives the answer
distribution. Optional encoders: a bi-LSTM over the candidate sequence
(seeded by a projection of the question embedding), a single-head
self-attention layer over candidates, and an LSTM over conversation
history that replaces the raw question embedding.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import asdict, dataclass

import numpy as np

from marketqa import textproc
from marketqa.nn.layers import (
    NumericError,
    attention_backward,
    attention_forward,
    bilstm_backward,
    bilstm_forward,
    cross_entropy,
    embedding_sum,
    embedding_sum_backward,
    feed_forward_backward,
    feed_forward_cached,
    lstm_backward,
    lstm_forward,
    softmax,
)
from marketqa.nn.tensor import ParamTensor, uniform_init, xavier_uniform
from marketqa.textproc import BagOfNGrams, NGramVocab


@dataclass
class ModelConfig:
    """Sizes and variant flags; defaults follow the full-scale setup."""

    embed_dim: int = 256
    ff_layers: int = 2
    ff_size: int = 500
    lstm_hidden: int = 256
    use_answer_lstm: bool = False
    use_attention: bool = False
    use_conv_context: bool = False
    max_history: int = 10
    unigram_cap: int = 100_000
    bigram_cap: int = 200_000
    max_candidates: int = 50
    max_sentence_tokens: int = 60

    def variant_name(self) -> str:
        parts = []
        if self.use_answer_lstm:
            parts.append("lstm")
        if self.use_attention:
            parts.append("attention")
        if self.use_conv_context:
            parts.append("context")
        return "+".join(parts) if parts else "baseline"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in raw.items() if k in known})


@dataclass
class QAInput:
    """One scoring request: history, question and candidate sentences.

    With the context flag off the caller is expected to have folded the
    final two buyer messages into `question`; `context` is then ignored.
    """

    context: list[tuple[str, str]]
    question: str
    candidates: list[str]


@dataclass
class ScoreResult:
    scores: np.ndarray  # raw h.g_i, slot 0 = no-answer
    probs: np.ndarray   # softmax of scores
    argmax: int         # lowest index on ties; 0 means no answer


@dataclass
class Prepared:
    """Featurized form of one example; reused across epochs."""

    q_bag: BagOfNGrams
    ctx_bags: list[BagOfNGrams]
    cand_bags: list[BagOfNGrams]
    label: int = 0


def effective_question(context: list[tuple[str, str]], question: str) -> str:
    """Concatenate the final two buyer messages into one question string.

    The question itself is the last buyer message; the closest buyer
    message before it in the history is prepended when present.
    """
    for speaker, text in reversed(context):
        if speaker == "buyer":
            return text + " " + question
    return question


def input_from_example(context, question, candidates, config: ModelConfig) -> QAInput:
    """Build the model input, applying the variant's history policy."""
    if config.use_conv_context:
        return QAInput(list(context[-config.max_history:]), question, list(candidates))
    return QAInput([], effective_question(context, question), list(candidates))


class Model:
    """Parameters plus the forward/backward passes for one config."""

    def __init__(self, config: ModelConfig, vocab: NGramVocab,
                 rng: np.random.Generator | None = None):
        self.config = config
        self.vocab = vocab
        self.tensors: OrderedDict[str, ParamTensor] = OrderedDict()
        self._build_params(rng)

    # -- parameter construction ------------------------------------------

    def _add(self, name: str, value: np.ndarray) -> ParamTensor:
        t = ParamTensor(name, value)
        self.tensors[name] = t
        return t

    def _build_params(self, rng: np.random.Generator | None) -> None:
        cfg = self.config
        v = max(self.vocab.size, 1)

        def weights(shape):
            return xavier_uniform(rng, shape) if rng is not None else np.zeros(shape)

        def embeddings(shape):
            return uniform_init(rng, shape) if rng is not None else np.zeros(shape)

        self._add("embedding", embeddings((v, cfg.embed_dim)))

        q_in = cfg.lstm_hidden if cfg.use_conv_context else cfg.embed_dim
        for i in range(cfg.ff_layers):
            self._add(f"q_ff{i}_w", weights((cfg.ff_size, q_in)))
            self._add(f"q_ff{i}_b", np.zeros(cfg.ff_size))
            q_in = cfg.ff_size

        cand_dim = cfg.embed_dim
        if cfg.use_answer_lstm:
            h = cfg.lstm_hidden
            self._add("h0_proj", weights((h, cfg.embed_dim)))
            self._add("ans_lstm_fwd_w", weights((4 * h, cfg.embed_dim + h)))
            self._add("ans_lstm_fwd_b", np.zeros(4 * h))
            self._add("ans_lstm_bwd_w", weights((4 * h, cfg.embed_dim + h)))
            self._add("ans_lstm_bwd_b", np.zeros(4 * h))
            cand_dim = 2 * h
        if cfg.use_attention:
            m = cand_dim
            for name in ("attn_wq", "attn_wk", "attn_wv"):
                self._add(name, weights((m, m)))
            self._add("attn_ff1_w", weights((m, m)))
            self._add("attn_ff1_b", np.zeros(m))
            self._add("attn_ff2_w", weights((m, m)))
            self._add("attn_ff2_b", np.zeros(m))
        a_in = cand_dim
        for i in range(cfg.ff_layers):
            self._add(f"a_ff{i}_w", weights((cfg.ff_size, a_in)))
            self._add(f"a_ff{i}_b", np.zeros(cfg.ff_size))
            a_in = cfg.ff_size

        if cfg.use_conv_context:
            h = cfg.lstm_hidden
            self._add("ctx_lstm_w", weights((4 * h, cfg.embed_dim + h)))
            self._add("ctx_lstm_b", np.zeros(4 * h))

        self._add("g0", embeddings((cfg.ff_size,)))

    # -- parameter plumbing ----------------------------------------------

    def zero_grad(self) -> None:
        for t in self.tensors.values():
            t.zero_grad()

    def tensor_values(self) -> dict[str, np.ndarray]:
        return {name: t.value.copy() for name, t in self.tensors.items()}

    def set_tensor_values(self, values: dict[str, np.ndarray]) -> None:
        for name, arr in values.items():
            self.tensors[name].value[...] = arr

    def load_compatible(self, other: "Model") -> list[str]:
        """Copy tensors matching in name and shape from another model.

        g0 is never transferred: the no-answer vector is only meaningful
        after fine-tuning. Returns the names that were transferred.
        """
        moved = []
        for name, t in self.tensors.items():
            if name == "g0":
                continue
            src = other.tensors.get(name)
            if src is not None and src.value.shape == t.value.shape:
                t.value[...] = src.value
                moved.append(name)
        return moved

    def flat_values(self) -> np.ndarray:
        return np.concatenate([t.value.ravel() for t in self.tensors.values()])

    def set_flat_values(self, vec: np.ndarray) -> None:
        pos = 0
        for t in self.tensors.values():
            n = t.value.size
            t.value[...] = vec[pos:pos + n].reshape(t.value.shape)
            pos += n

    def flat_grads(self) -> np.ndarray:
        return np.concatenate([t.grad.ravel() for t in self.tensors.values()])

    # -- featurization ------------------------------------------------------

    def bag(self, text: str, cap_tokens: bool = False) -> BagOfNGrams:
        max_tokens = self.config.max_sentence_tokens if cap_tokens else None
        return textproc.featurize(text, self.vocab, max_tokens=max_tokens)

    def prepare(self, inp: QAInput) -> Prepared:
        cfg = self.config
        cands = inp.candidates[:cfg.max_candidates]
        ctx_bags = []
        if cfg.use_conv_context:
            ctx_bags = [self.bag(text) for _, text in inp.context[-cfg.max_history:]]
        return Prepared(
            q_bag=self.bag(inp.question),
            ctx_bags=ctx_bags,
            cand_bags=[self.bag(s, cap_tokens=True) for s in cands],
        )

    def prepare_example(self, context, question, candidates, label: int) -> Prepared:
        prep = self.prepare(input_from_example(context, question, candidates, self.config))
        prep.label = label
        return prep

    # -- forward ------------------------------------------------------------

    def _value(self, name: str) -> np.ndarray:
        return self.tensors[name].value

    def _forward(self, prep: Prepared, with_cache: bool):
        cfg = self.config
        emb = self._value("embedding")
        cache: dict = {}

        psi_q = embedding_sum(prep.q_bag.ids, emb)

        # Question tower.
        if cfg.use_conv_context:
            seq = np.empty((len(prep.ctx_bags) + 1, cfg.embed_dim))
            for i, b in enumerate(prep.ctx_bags):
                seq[i] = embedding_sum(b.ids, emb)
            seq[-1] = psi_q
            hs, ctx_cache = lstm_forward(seq, self._value("ctx_lstm_w"),
                                         self._value("ctx_lstm_b"),
                                         np.zeros(cfg.lstm_hidden))
            u = hs[-1]
            if with_cache:
                cache["ctx"] = ctx_cache
        else:
            u = psi_q
        h = u
        q_caches = []
        for i in range(cfg.ff_layers):
            h, c = feed_forward_cached(h, self._value(f"q_ff{i}_w"),
                                       self._value(f"q_ff{i}_b"))
            q_caches.append(c)

        # Candidate tower.
        n = len(prep.cand_bags)
        g_mat = None
        a_caches: list = []
        if n:
            x = np.empty((n, cfg.embed_dim))
            for i, b in enumerate(prep.cand_bags):
                x[i] = embedding_sum(b.ids, emb)
            y = x
            if cfg.use_answer_lstm:
                h0 = self._value("h0_proj") @ psi_q
                y, lstm_cache = bilstm_forward(
                    x, self._value("ans_lstm_fwd_w"), self._value("ans_lstm_fwd_b"),
                    self._value("ans_lstm_bwd_w"), self._value("ans_lstm_bwd_b"), h0)
                if with_cache:
                    cache["ans_lstm"] = lstm_cache
            z = y
            if cfg.use_attention:
                z, attn_cache = attention_forward(
                    y, self._value("attn_wq"), self._value("attn_wk"),
                    self._value("attn_wv"), self._value("attn_ff1_w"),
                    self._value("attn_ff1_b"), self._value("attn_ff2_w"),
                    self._value("attn_ff2_b"))
                if with_cache:
                    cache["attn"] = attn_cache
            g_mat = z
            for i in range(cfg.ff_layers):
                g_mat, c = feed_forward_cached(g_mat, self._value(f"a_ff{i}_w"),
                                               self._value(f"a_ff{i}_b"))
                a_caches.append(c)

        logits = np.empty(n + 1)
        logits[0] = float(h @ self._value("g0"))
        if n:
            logits[1:] = g_mat @ h
        if not np.isfinite(logits).all():
            raise NumericError(
                "non-finite candidate scores; suspect tensors: "
                + ", ".join(self._non_finite_tensors()) )
        probs = softmax(logits)
        if with_cache:
            cache.update(psi_q=psi_q, h=h, q_caches=q_caches, a_caches=a_caches,
                         g_mat=g_mat, logits=logits, probs=probs, n=n)
        return logits, probs, cache

    def _non_finite_tensors(self) -> list[str]:
        bad = [name for name, t in self.tensors.items()
               if not np.isfinite(t.value).all()]
        return bad or ["(all parameters finite; non-finite input?)"]

    # -- public scoring ------------------------------------------------------

    def score_prepared(self, prep: Prepared) -> ScoreResult:
        logits, probs, _ = self._forward(prep, with_cache=False)
        return ScoreResult(scores=logits, probs=probs, argmax=int(np.argmax(probs)))

    def score(self, inp: QAInput) -> ScoreResult:
        return self.score_prepared(self.prepare(inp))

    def predict(self, inp: QAInput) -> int:
        return self.score(inp).argmax

    def encode_question(self, inp: QAInput) -> np.ndarray:
        """Question-tower output h; exposed for inspection and tests."""
        prep = self.prepare(inp)
        _, _, cache = self._forward(prep, with_cache=True)
        return cache["h"]

    def encode_candidates(self, inp: QAInput) -> tuple[np.ndarray, np.ndarray]:
        """(g0, candidate-tower outputs g_1..g_N as rows)."""
        prep = self.prepare(inp)
        _, _, cache = self._forward(prep, with_cache=True)
        n = cache["n"]
        g_mat = cache["g_mat"] if n else np.zeros((0, self.config.ff_size))
        return self._value("g0").copy(), g_mat

    # -- loss / backward -----------------------------------------------------

    def loss_prepared(self, prep: Prepared) -> float:
        _, probs, _ = self._forward(prep, with_cache=False)
        return cross_entropy(probs, prep.label)

    def loss_and_grad_prepared(self, prep: Prepared) -> float:
        """Cross-entropy at the label; accumulates into tensor .grad."""
        cfg = self.config
        n = len(prep.cand_bags)
        if not 0 <= prep.label <= n:
            raise ValueError(f"label {prep.label} out of range for {n} candidates")
        logits, probs, cache = self._forward(prep, with_cache=True)
        loss = cross_entropy(probs, prep.label)

        d_logits = probs.copy()
        d_logits[prep.label] -= 1.0

        h = cache["h"]
        g0 = self.tensors["g0"]
        g0.grad += d_logits[0] * h
        d_h = d_logits[0] * g0.value
        emb_grad = self.tensors["embedding"].grad
        d_psi_q = np.zeros(cfg.embed_dim)

        if n:
            g_mat = cache["g_mat"]
            d_g = np.outer(d_logits[1:], h)
            d_h = d_h + g_mat.T @ d_logits[1:]
            for i in range(cfg.ff_layers - 1, -1, -1):
                d_g, d_w, d_b = feed_forward_backward(cache["a_caches"][i], d_g)
                self.tensors[f"a_ff{i}_w"].grad += d_w
                self.tensors[f"a_ff{i}_b"].grad += d_b
            if cfg.use_attention:
                d_g, d_wq, d_wk, d_wv, d_w1, d_b1, d_w2, d_b2 = attention_backward(
                    cache["attn"], d_g)
                self.tensors["attn_wq"].grad += d_wq
                self.tensors["attn_wk"].grad += d_wk
                self.tensors["attn_wv"].grad += d_wv
                self.tensors["attn_ff1_w"].grad += d_w1
                self.tensors["attn_ff1_b"].grad += d_b1
                self.tensors["attn_ff2_w"].grad += d_w2
                self.tensors["attn_ff2_b"].grad += d_b2
            if cfg.use_answer_lstm:
                d_x, d_wf, d_bf, d_wb, d_bb, d_h0 = bilstm_backward(cache["ans_lstm"], d_g)
                self.tensors["ans_lstm_fwd_w"].grad += d_wf
                self.tensors["ans_lstm_fwd_b"].grad += d_bf
                self.tensors["ans_lstm_bwd_w"].grad += d_wb
                self.tensors["ans_lstm_bwd_b"].grad += d_bb
                proj = self.tensors["h0_proj"]
                proj.grad += np.outer(d_h0, cache["psi_q"])
                d_psi_q += proj.value.T @ d_h0
            else:
                d_x = d_g
            for i, b in enumerate(prep.cand_bags):
                embedding_sum_backward(b.ids, d_x[i], emb_grad)

        # Question tower backward.
        d_u = d_h
        for i in range(cfg.ff_layers - 1, -1, -1):
            d_u, d_w, d_b = feed_forward_backward(cache["q_caches"][i], d_u)
            self.tensors[f"q_ff{i}_w"].grad += d_w
            self.tensors[f"q_ff{i}_b"].grad += d_b
        if cfg.use_conv_context:
            t_len = len(prep.ctx_bags) + 1
            d_seq, d_w, d_b, _ = lstm_backward(
                cache["ctx"], np.zeros((t_len, cfg.lstm_hidden)), d_h_final=d_u)
            self.tensors["ctx_lstm_w"].grad += d_w
            self.tensors["ctx_lstm_b"].grad += d_b
            for i, b in enumerate(prep.ctx_bags):
                embedding_sum_backward(b.ids, d_seq[i], emb_grad)
            d_psi_q += d_seq[-1]
        else:
            d_psi_q += d_u
        embedding_sum_backward(prep.q_bag.ids, d_psi_q, emb_grad)
        return loss

    def loss_and_grad(self, context, question, candidates, label: int) -> float:
        return self.loss_and_grad_prepared(
            self.prepare_example(context, question, candidates, label))
