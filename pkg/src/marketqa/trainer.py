"""Two-phase training.

Phase 1 pre-trains the embedding table and both feed-forward towers on
next-reply ranking with in-batch negatives: within a batch of (context,
reply) pairs, every other reply serves as a negative. Phase 2 fine-tunes
on labelled answer-selection examples; variant layers (LSTM, attention,
context) always start fresh in phase 2, and the no-answer vector is only
ever trained here.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from marketqa import checkpoint as ckpt
from marketqa import evalkit, textproc
from marketqa.nn.layers import (
    cross_entropy,
    embedding_sum,
    embedding_sum_backward,
    feed_forward_backward,
    feed_forward_cached,
    row_softmax,
)
from marketqa.nn.optim import AdamState, adam_step, clip_global_norm
from marketqa.ranker import Model, ModelConfig


@dataclass
class TrainConfig:
    batch_size: int = 64
    epochs: int = 30
    lr: float = 1e-3
    seed: int = 0
    patience: int = 5
    grad_clip: float = 5.0
    phase: str = "finetune"  # or "pretrain"
    target_dev_acc: float | None = None  # stop once dev accuracy reaches this


@dataclass
class ReplyPair:
    context: str
    reply: str


class ConfigError(ValueError):
    pass


def _scale_grads(model: Model, factor: float) -> None:
    for t in model.tensors.values():
        t.grad *= factor


# ---------------------------------------------------------------------------
# Pre-training


def pretrain(pairs: list[ReplyPair], model_config: ModelConfig,
             train_config: TrainConfig,
             vocab: textproc.NGramVocab | None = None) -> tuple[Model, list[dict]]:
    """Reply-ranking pre-training; returns a baseline-shape model.

    Variant flags are forced off: only the embedding table and the two
    feed-forward towers are learned here.
    """
    if train_config.batch_size < 2:
        raise ConfigError("pretraining needs batch_size >= 2 for in-batch negatives")
    if len(pairs) < train_config.batch_size:
        raise ConfigError(f"need at least one full batch "
                          f"({train_config.batch_size} pairs), got {len(pairs)}")
    config = replace(model_config, use_answer_lstm=False, use_attention=False,
                     use_conv_context=False)
    if vocab is None:
        corpus = [p.context for p in pairs] + [p.reply for p in pairs]
        vocab = textproc.build_vocab(corpus, config.unigram_cap, config.bigram_cap)
    rng = np.random.default_rng(train_config.seed)
    model = Model(config, vocab, rng)
    opt = AdamState(lr=train_config.lr)

    ctx_bags = [model.bag(p.context) for p in pairs]
    reply_bags = [model.bag(p.reply) for p in pairs]

    history = []
    n = len(pairs)
    bsz = train_config.batch_size
    for epoch in range(train_config.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n - bsz + 1, bsz):
            idx = order[start:start + bsz]
            loss = _pretrain_batch(model, [ctx_bags[i] for i in idx],
                                   [reply_bags[i] for i in idx])
            clip_global_norm(model.tensors.values(), train_config.grad_clip)
            adam_step(model.tensors.values(), opt)
            model.zero_grad()
            losses.append(loss)
        history.append({"epoch": epoch, "train_loss": float(np.mean(losses))})
    return model, history


def _pretrain_batch(model: Model, ctx_bags, reply_bags) -> float:
    """Mean row-wise cross-entropy of S = H G^T at the diagonal."""
    cfg = model.config
    emb = model.tensors["embedding"].value
    bsz = len(ctx_bags)

    h_in = np.empty((bsz, cfg.embed_dim))
    g_in = np.empty((bsz, cfg.embed_dim))
    for i in range(bsz):
        h_in[i] = embedding_sum(ctx_bags[i].ids, emb)
        g_in[i] = embedding_sum(reply_bags[i].ids, emb)

    h, q_caches = h_in, []
    for i in range(cfg.ff_layers):
        h, c = feed_forward_cached(h, model.tensors[f"q_ff{i}_w"].value,
                                   model.tensors[f"q_ff{i}_b"].value)
        q_caches.append(c)
    g, a_caches = g_in, []
    for i in range(cfg.ff_layers):
        g, c = feed_forward_cached(g, model.tensors[f"a_ff{i}_w"].value,
                                   model.tensors[f"a_ff{i}_b"].value)
        a_caches.append(c)

    scores = h @ g.T
    probs = row_softmax(scores)
    loss = float(np.mean([cross_entropy(probs[i], i) for i in range(bsz)]))

    d_scores = probs.copy()
    d_scores[np.arange(bsz), np.arange(bsz)] -= 1.0
    d_scores /= bsz
    d_h = d_scores @ g
    d_g = d_scores.T @ h
    for i in range(cfg.ff_layers - 1, -1, -1):
        d_h, d_w, d_b = feed_forward_backward(q_caches[i], d_h)
        model.tensors[f"q_ff{i}_w"].grad += d_w
        model.tensors[f"q_ff{i}_b"].grad += d_b
    for i in range(cfg.ff_layers - 1, -1, -1):
        d_g, d_w, d_b = feed_forward_backward(a_caches[i], d_g)
        model.tensors[f"a_ff{i}_w"].grad += d_w
        model.tensors[f"a_ff{i}_b"].grad += d_b
    emb_grad = model.tensors["embedding"].grad
    for i in range(bsz):
        embedding_sum_backward(ctx_bags[i].ids, d_h[i], emb_grad)
        embedding_sum_backward(reply_bags[i].ids, d_g[i], emb_grad)
    return loss


# ---------------------------------------------------------------------------
# Fine-tuning


def _vocab_corpus(examples):
    for ex in examples:
        yield ex.question
        yield from ex.candidates
        for _, text in ex.context:
            yield text


def finetune(train_set, dev_set, model_config: ModelConfig,
             train_config: TrainConfig,
             init: Model | None = None) -> tuple[Model, list[dict]]:
    """Supervised training with per-epoch dev evaluation and early stop.

    `init` transfers every shape-compatible tensor (and fixes the
    vocabulary); the rest initialize fresh.
    """
    if not train_set:
        raise ValueError("training set is empty")
    for pos, ex in enumerate(train_set):
        if not 0 <= ex.label <= len(ex.candidates):
            raise ValueError(
                f"train example {pos} (listing {ex.listing_id!r}): label "
                f"{ex.label} out of range for {len(ex.candidates)} candidates")

    if init is not None:
        vocab = init.vocab
    else:
        vocab = textproc.build_vocab(_vocab_corpus(train_set),
                                     model_config.unigram_cap,
                                     model_config.bigram_cap)
    rng = np.random.default_rng(train_config.seed)
    model = Model(model_config, vocab, rng)
    if init is not None:
        model.load_compatible(init)
    opt = AdamState(lr=train_config.lr)

    train_prep = [model.prepare_example(ex.context, ex.question, ex.candidates,
                                        ex.label) for ex in train_set]
    dev_prep = [model.prepare_example(ex.context, ex.question, ex.candidates,
                                      ex.label) for ex in dev_set]

    history = []
    best_acc = -1.0
    best_values = model.tensor_values()
    stale_epochs = 0
    n = len(train_prep)
    bsz = min(train_config.batch_size, n)
    for epoch in range(train_config.epochs):
        started = time.perf_counter()
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, bsz):
            idx = order[start:start + bsz]
            batch_loss = 0.0
            for i in idx:
                batch_loss += model.loss_and_grad_prepared(train_prep[i])
            _scale_grads(model, 1.0 / len(idx))
            clip_global_norm(model.tensors.values(), train_config.grad_clip)
            adam_step(model.tensors.values(), opt)
            model.zero_grad()
            losses.append(batch_loss / len(idx))
        entry = {"epoch": epoch, "train_loss": float(np.mean(losses)),
                 "seconds": time.perf_counter() - started}
        if dev_prep:
            report = evalkit.evaluate_prepared(model, dev_prep)
            entry["dev_overall_acc"] = report.overall_acc
            if report.overall_acc is not None and report.overall_acc > best_acc:
                best_acc = report.overall_acc
                best_values = model.tensor_values()
                stale_epochs = 0
            else:
                stale_epochs += 1
        history.append(entry)
        if dev_prep and (train_config.target_dev_acc is not None
                         and best_acc >= train_config.target_dev_acc):
            break
        if dev_prep and stale_epochs >= train_config.patience:
            break
    if dev_prep:
        model.set_tensor_values(best_values)
    return model, history


# ---------------------------------------------------------------------------
# Checkpointing (thin wrappers over the binary format)


def checkpoint_save(path, model: Model) -> None:
    ckpt.save_checkpoint(path, model)


def checkpoint_load(path) -> Model:
    return ckpt.load_checkpoint(path)
