"""Central finite differences, the oracle for every analytic gradient."""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from ._tensor import Tensor, backward, no_grad


def numerical_gradient(fn: Callable[[], Tensor], tensor: Tensor, h: float = 1e-3) -> np.ndarray:
    """``∂fn/∂tensor`` by central differences, perturbing ``tensor.data`` in place.

    ``fn`` takes no arguments and returns a scalar Tensor built from ``tensor``.
    """
    grad = np.zeros(tensor.shape, dtype=np.float64)
    flat = tensor.data.reshape(-1)
    out = grad.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            plus = float(fn().data)
            flat[i] = orig - h
            minus = float(fn().data)
            flat[i] = orig
            out[i] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """``max|a − n| / max(max|a|, max|n|, floor)``."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    scale = max(np.abs(a).max(initial=0.0), np.abs(n).max(initial=0.0), floor)
    return float(np.abs(a - n).max(initial=0.0) / scale)


def check_gradients(fn: Callable[[], Tensor], params: Iterable[Tensor], h: float = 1e-3) -> float:
    """Worst relative error between backward() and central differences over
    ``params``."""
    params = list(params)
    for p in params:
        p.grad = None
    backward(fn())
    worst = 0.0
    for p in params:
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        worst = max(worst, relative_error(analytic, numerical_gradient(fn, p, h)))
    return worst
