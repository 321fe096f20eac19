"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

FD_STEP = 1e-5


def grad_check(fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
               point: np.ndarray, step: float = FD_STEP) -> float:
    """Compare fn's analytic gradient against central differences.

    `fn` maps a flat parameter vector to (scalar, gradient vector) and
    must be pure. Returns the max relative error over all components,
    with the denominator floored at 1 so that near-zero gradients are
    judged on absolute error.
    """
    point = np.asarray(point, dtype=np.float64)
    _, analytic = fn(point)
    analytic = np.asarray(analytic, dtype=np.float64)
    if analytic.shape != point.shape:
        raise ValueError(f"gradient shape {analytic.shape} vs point {point.shape}")
    numeric = np.empty_like(point)
    probe = point.copy()
    for i in range(point.size):
        orig = probe[i]
        probe[i] = orig + step
        f_plus, _ = fn(probe)
        probe[i] = orig - step
        f_minus, _ = fn(probe)
        probe[i] = orig
        numeric[i] = (f_plus - f_minus) / (2.0 * step)
    denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / denom))
