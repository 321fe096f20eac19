"""Answer-sentence selection for marketplace chat.

A dual-tower dot-product ranker scores sentences of a product description
as candidate answers to a buyer question, with a learned no-answer slot.
Submodules: textproc (n-gram features), nn (numeric kernels), ranker (the
model), datapipe (weak-supervision mining + synthetic data), evalkit
(metrics), trainer (pretrain/finetune), service (HTTP API), cli.
"""

__version__ = "0.1.0"
