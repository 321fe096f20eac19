"""Dense numeric kernels with exact analytic gradients.

Everything is float64 numpy. Layers come as forward/backward function
pairs (the forward returns a cache consumed by the backward); the model
layer owns parameter bookkeeping. A finite-difference checker verifies
every analytic gradient.
"""

from marketqa.nn.layers import (
    DimensionError,
    NumericError,
    attention_backward,
    attention_forward,
    bilstm,
    bilstm_backward,
    bilstm_forward,
    cross_entropy,
    embedding_sum,
    embedding_sum_backward,
    feed_forward,
    feed_forward_backward,
    feed_forward_cached,
    lstm_backward,
    lstm_final,
    lstm_forward,
    row_softmax,
    self_attention,
    softmax,
)
from marketqa.nn.optim import AdamState, adam_step, clip_global_norm
from marketqa.nn.gradcheck import grad_check
from marketqa.nn.tensor import ParamTensor, uniform_init, xavier_uniform

__all__ = [
    "AdamState",
    "DimensionError",
    "NumericError",
    "ParamTensor",
    "adam_step",
    "attention_backward",
    "attention_forward",
    "bilstm",
    "bilstm_backward",
    "bilstm_forward",
    "clip_global_norm",
    "cross_entropy",
    "embedding_sum",
    "embedding_sum_backward",
    "feed_forward",
    "feed_forward_backward",
    "feed_forward_cached",
    "grad_check",
    "lstm_backward",
    "lstm_final",
    "lstm_forward",
    "row_softmax",
    "self_attention",
    "softmax",
    "uniform_init",
    "xavier_uniform",
]
