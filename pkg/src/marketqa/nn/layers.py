"""Forward/backward kernels: embedding sum, affine+tanh, LSTM, attention,
softmax and cross-entropy.

Conventions: inputs/outputs are float64 ndarrays; sequence inputs are
[T, dim] matrices; every `*_forward` returns `(out, cache)` and the
matching `*_backward` consumes the cache and an upstream gradient,
returning input gradients followed by parameter gradients. Parameter
gradients are returned, not accumulated; callers own the accumulators.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit as sigmoid


class DimensionError(ValueError):
    """Operand shapes disagree with the layer contract."""


class NumericError(ArithmeticError):
    """Non-finite values crossed a layer boundary."""


def _require_finite(name: str, x: np.ndarray) -> None:
    if not np.isfinite(x).all():
        raise NumericError(f"non-finite values in {name}")


# ---------------------------------------------------------------------------
# Embedding sum


def embedding_sum(ids: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Sum the table rows picked by `ids` (with multiplicity).

    An empty id list yields the zero vector: all-OOV text maps to 0.
    """
    if ids.size == 0:
        return np.zeros(table.shape[1])
    if ids.max() >= table.shape[0] or ids.min() < 0:
        raise DimensionError(
            f"n-gram id out of range: max {int(ids.max())} vs table rows {table.shape[0]}"
        )
    return table[ids].sum(axis=0)


def embedding_sum_backward(ids: np.ndarray, d_out: np.ndarray, grad_table: np.ndarray) -> None:
    """Scatter the upstream vector into every referenced row, in place."""
    if ids.size:
        np.add.at(grad_table, ids, d_out)


# ---------------------------------------------------------------------------
# Feed-forward


def feed_forward_cached(x, w, b, activation="tanh"):
    """activation(x @ w.T + b) for a vector or a [n, in] matrix."""
    x = np.asarray(x)
    if x.shape[-1] != w.shape[1]:
        raise DimensionError(f"input dim {x.shape[-1]} vs weight in-dim {w.shape[1]}")
    if b.shape[0] != w.shape[0]:
        raise DimensionError(f"bias dim {b.shape[0]} vs weight out-dim {w.shape[0]}")
    _require_finite("feed_forward input", x)
    a = x @ w.T + b
    if activation == "tanh":
        y = np.tanh(a)
    elif activation == "identity":
        y = a
    else:
        raise ValueError(f"unknown activation {activation!r}")
    return y, (x, y, w, activation)


def feed_forward(x, w, b, activation="tanh"):
    y, _ = feed_forward_cached(x, w, b, activation)
    return y


def feed_forward_backward(cache, d_y):
    """Returns (d_x, d_w, d_b)."""
    x, y, w, activation = cache
    d_a = d_y * (1.0 - y * y) if activation == "tanh" else d_y
    if d_a.ndim == 1:
        d_w = np.outer(d_a, x)
        d_b = d_a.copy()
    else:
        d_w = d_a.T @ x
        d_b = d_a.sum(axis=0)
    d_x = d_a @ w
    return d_x, d_w, d_b


# ---------------------------------------------------------------------------
# LSTM
#
# One combined gate matrix per direction, shaped [4h, in+h], gate order
# (input, forget, output, candidate). Cell state always starts at zero;
# the initial hidden state is a parameter of the call.


def lstm_forward(xs: np.ndarray, w: np.ndarray, b: np.ndarray, h0: np.ndarray):
    """Run the recurrence over xs [T, in]; returns (hs [T, h], cache)."""
    t_len, in_dim = xs.shape
    if t_len == 0:
        raise DimensionError("LSTM input sequence must be non-empty")
    hidden = h0.shape[0]
    if w.shape != (4 * hidden, in_dim + hidden):
        raise DimensionError(
            f"LSTM weight shape {w.shape} vs expected {(4 * hidden, in_dim + hidden)}"
        )
    _require_finite("lstm input", xs)
    hs = np.empty((t_len, hidden))
    steps = []
    h_prev = h0
    c_prev = np.zeros(hidden)
    for t in range(t_len):
        z = np.concatenate((xs[t], h_prev))
        pre = w @ z + b
        i = sigmoid(pre[:hidden])
        f = sigmoid(pre[hidden:2 * hidden])
        o = sigmoid(pre[2 * hidden:3 * hidden])
        g = np.tanh(pre[3 * hidden:])
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        hs[t] = h
        steps.append((z, i, f, o, g, c_prev, tanh_c))
        h_prev, c_prev = h, c
    return hs, (steps, w, in_dim, hidden)


def lstm_backward(cache, d_hs, d_h_final=None):
    """BPTT. `d_hs` is [T, h] (may be zeros); `d_h_final` adds an extra
    gradient on the last hidden state. Returns (d_xs, d_w, d_b, d_h0).
    """
    steps, w, in_dim, hidden = cache
    t_len = len(steps)
    d_xs = np.empty((t_len, in_dim))
    d_w = np.zeros_like(w)
    d_b = np.zeros(4 * hidden)
    d_h_next = np.zeros(hidden) if d_h_final is None else d_h_final.copy()
    d_c_next = np.zeros(hidden)
    for t in range(t_len - 1, -1, -1):
        z, i, f, o, g, c_prev, tanh_c = steps[t]
        d_h = d_hs[t] + d_h_next
        d_o = d_h * tanh_c
        d_c = d_c_next + d_h * o * (1.0 - tanh_c * tanh_c)
        d_f = d_c * c_prev
        d_i = d_c * g
        d_g = d_c * i
        d_pre = np.concatenate((
            d_i * i * (1.0 - i),
            d_f * f * (1.0 - f),
            d_o * o * (1.0 - o),
            d_g * (1.0 - g * g),
        ))
        d_w += np.outer(d_pre, z)
        d_b += d_pre
        d_z = w.T @ d_pre
        d_xs[t] = d_z[:in_dim]
        d_h_next = d_z[in_dim:]
        d_c_next = d_c * f
    return d_xs, d_w, d_b, d_h_next


def lstm_final(xs, w, b, h0=None):
    """Unidirectional pass returning only the final hidden state."""
    hidden = w.shape[0] // 4
    if h0 is None:
        h0 = np.zeros(hidden)
    hs, _ = lstm_forward(xs, w, b, h0)
    return hs[-1]


def bilstm_forward(xs, w_fwd, b_fwd, w_bwd, b_bwd, h0):
    """Both directions start from the same h0 and zero cell state.

    Output [T, 2h] concatenates forward and backward hidden states per
    position.
    """
    hs_f, cache_f = lstm_forward(xs, w_fwd, b_fwd, h0)
    hs_b_rev, cache_b = lstm_forward(xs[::-1], w_bwd, b_bwd, h0)
    out = np.concatenate((hs_f, hs_b_rev[::-1]), axis=1)
    return out, (cache_f, cache_b)


def bilstm_backward(cache, d_out):
    """Returns (d_xs, d_w_fwd, d_b_fwd, d_w_bwd, d_b_bwd, d_h0)."""
    cache_f, cache_b = cache
    hidden = d_out.shape[1] // 2
    d_xs_f, d_w_f, d_b_f, d_h0_f = lstm_backward(cache_f, d_out[:, :hidden])
    d_xs_b, d_w_b, d_b_b, d_h0_b = lstm_backward(cache_b, d_out[::-1, hidden:])
    d_xs = d_xs_f + d_xs_b[::-1]
    return d_xs, d_w_f, d_b_f, d_w_b, d_b_b, d_h0_f + d_h0_b


def bilstm(xs, w_fwd, b_fwd, w_bwd, b_bwd, h0):
    out, _ = bilstm_forward(xs, w_fwd, b_fwd, w_bwd, b_bwd, h0)
    return out


# ---------------------------------------------------------------------------
# Self-attention
#
# Single head, scaled dot product, no positional encoding or layer norm.
# Queries/keys/values are learned linear maps; the weighted value sum goes
# through a position-wise tanh feed-forward map, added back onto the input
# through a residual connection.


def attention_forward(xs, w_q, w_k, w_v, w_1, b_1, w_2, b_2):
    t_len, dim = xs.shape
    if t_len == 0:
        raise DimensionError("attention input sequence must be non-empty")
    if w_q.shape != (dim, dim):
        raise DimensionError(f"attention map shape {w_q.shape} vs input dim {dim}")
    _require_finite("attention input", xs)
    scale = 1.0 / math.sqrt(dim)
    q = xs @ w_q.T
    k = xs @ w_k.T
    v = xs @ w_v.T
    scores = (q @ k.T) * scale
    weights = row_softmax(scores)
    z = weights @ v
    u = np.tanh(z @ w_1.T + b_1)
    f = u @ w_2.T + b_2
    out = xs + f
    return out, (xs, q, k, v, weights, z, u, scale, w_q, w_k, w_v, w_1, w_2)


def attention_backward(cache, d_out):
    """Returns (d_xs, d_wq, d_wk, d_wv, d_w1, d_b1, d_w2, d_b2)."""
    xs, q, k, v, weights, z, u, scale, w_q, w_k, w_v, w_1, w_2 = cache
    d_xs = d_out.copy()
    d_w2 = d_out.T @ u
    d_b2 = d_out.sum(axis=0)
    d_u = d_out @ w_2
    d_pre = d_u * (1.0 - u * u)
    d_w1 = d_pre.T @ z
    d_b1 = d_pre.sum(axis=0)
    d_z = d_pre @ w_1
    d_weights = d_z @ v.T
    d_v = weights.T @ d_z
    # Row-wise softmax jacobian.
    d_scores = (d_weights - (d_weights * weights).sum(axis=1, keepdims=True)) * weights
    d_scores *= scale
    d_q = d_scores @ k
    d_k = d_scores.T @ q
    d_wq = d_q.T @ xs
    d_wk = d_k.T @ xs
    d_wv = d_v.T @ xs
    d_xs += d_q @ w_q + d_k @ w_k + d_v @ w_v
    return d_xs, d_wq, d_wk, d_wv, d_w1, d_b1, d_w2, d_b2


def self_attention(xs, w_q, w_k, w_v, w_1, b_1, w_2, b_2):
    out, _ = attention_forward(xs, w_q, w_k, w_v, w_1, b_1, w_2, b_2)
    return out


# ---------------------------------------------------------------------------
# Softmax / cross-entropy


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax over a 1-D vector.

    The denominator uses math.fsum, so it is independent of element
    order: permuting the logits permutes the probabilities bit-for-bit.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1 or logits.size == 0:
        raise DimensionError("softmax expects a non-empty 1-D vector")
    _require_finite("softmax logits", logits)
    exps = np.exp(logits - logits.max())
    return exps / math.fsum(exps)


def row_softmax(scores: np.ndarray) -> np.ndarray:
    """Vectorized softmax over each row of a matrix."""
    shifted = scores - scores.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=1, keepdims=True)


_PROB_FLOOR = 1e-30


def cross_entropy(probs: np.ndarray, k: int) -> float:
    """-log probs[k]; the probability is floored at 1e-30."""
    n = probs.shape[0]
    if not 0 <= k < n:
        raise ValueError(f"label {k} out of range for {n} classes")
    return -math.log(max(float(probs[k]), _PROB_FLOOR))
