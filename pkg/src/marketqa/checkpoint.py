"""Binary model checkpoints.

Layout (all integers little-endian):

    magic   4 bytes  "MQAR"
    version u32      currently 1
    clen    u32      length of the UTF-8 config JSON
    config  clen bytes
    count   u32      number of tensors
    per tensor:
        nlen  u16, name nlen bytes
        rank  u8, dims rank * u32
        data  f64 row-major

The config JSON carries the model config and the full n-gram vocabulary,
so a checkpoint is self-contained. Round-trips are bit-identical.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from marketqa.ranker import Model, ModelConfig
from marketqa.textproc import NGramVocab

MAGIC = b"MQAR"
VERSION = 1


class CheckpointFormatError(ValueError):
    """Not a checkpoint file, or an unsupported version."""


class CheckpointValidationError(ValueError):
    """Structurally valid file whose contents contradict its config."""


def _vocab_to_json(vocab: NGramVocab) -> dict:
    return {
        "unigram_cap": vocab.unigram_cap,
        "bigram_cap": vocab.bigram_cap,
        "unigrams": [[g, i, vocab.freqs.get(i, 0)]
                     for g, i in sorted(vocab.unigram_ids.items(), key=lambda kv: kv[1])],
        "bigrams": [[a, b, i, vocab.freqs.get(i, 0)]
                    for (a, b), i in sorted(vocab.bigram_ids.items(), key=lambda kv: kv[1])],
    }


def _vocab_from_json(raw: dict) -> NGramVocab:
    freqs = {}
    unigram_ids = {}
    for g, i, f in raw["unigrams"]:
        unigram_ids[g] = i
        freqs[i] = f
    bigram_ids = {}
    for a, b, i, f in raw["bigrams"]:
        bigram_ids[(a, b)] = i
        freqs[i] = f
    return NGramVocab(unigram_ids, bigram_ids, raw["unigram_cap"], raw["bigram_cap"], freqs)


def save_checkpoint(path, model: Model) -> None:
    config_json = json.dumps({
        "config": model.config.to_dict(),
        "vocab": _vocab_to_json(model.vocab),
    }).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(config_json)))
        fh.write(config_json)
        fh.write(struct.pack("<I", len(model.tensors)))
        for name, tensor in model.tensors.items():
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            value = np.ascontiguousarray(tensor.value, dtype="<f8")
            fh.write(struct.pack("<B", value.ndim))
            for dim in value.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(value.tobytes())


def _read(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CheckpointFormatError(f"truncated checkpoint while reading {what}")
    return data


def load_checkpoint(path) -> Model:
    with open(path, "rb") as fh:
        if _read(fh, 4, "magic") != MAGIC:
            raise CheckpointFormatError("bad magic: not a model checkpoint")
        (version,) = struct.unpack("<I", _read(fh, 4, "version"))
        if version != VERSION:
            raise CheckpointFormatError(
                f"unsupported checkpoint version {version} (supported: {VERSION})")
        (clen,) = struct.unpack("<I", _read(fh, 4, "config length"))
        try:
            header = json.loads(_read(fh, clen, "config").decode("utf-8"))
            config = ModelConfig.from_dict(header["config"])
            vocab = _vocab_from_json(header["vocab"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CheckpointFormatError(f"malformed config block: {exc}") from exc
        (count,) = struct.unpack("<I", _read(fh, 4, "tensor count"))
        loaded: dict[str, np.ndarray] = {}
        for _ in range(count):
            (nlen,) = struct.unpack("<H", _read(fh, 2, "tensor name length"))
            name = _read(fh, nlen, "tensor name").decode("utf-8")
            (rank,) = struct.unpack("<B", _read(fh, 1, "tensor rank"))
            shape = tuple(struct.unpack("<I", _read(fh, 4, "tensor dim"))[0]
                          for _ in range(rank))
            n_items = int(np.prod(shape)) if shape else 1
            data = _read(fh, 8 * n_items, f"tensor {name} payload")
            loaded[name] = np.frombuffer(data, dtype="<f8").reshape(shape).copy()

    model = Model(config, vocab, rng=None)
    expected = set(model.tensors)
    got = set(loaded)
    if expected != got:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise CheckpointValidationError(
            f"tensor set mismatch for variant {config.variant_name()!r}: "
            f"missing {missing}, unexpected {extra}")
    for name, tensor in model.tensors.items():
        if loaded[name].shape != tensor.value.shape:
            raise CheckpointValidationError(
                f"tensor {name} shape {loaded[name].shape} inconsistent with "
                f"config (expected {tensor.value.shape})")
        tensor.value[...] = loaded[name]
    return model
