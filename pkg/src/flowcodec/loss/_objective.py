"""Training objective.

Per pixel, ``ρ(δ) = mean over channels of |δ| + λ·δ²`` with ``δ = pred − gt``.

* combined: ``mean_batch(w · ρ(composite − gt))``
* layer i:  ``mean_batch(α_i · w · ρ(rgb_i − gt))`` with ``α_i`` post-softmax
* total:    ``combined + γ · Σ_i layer_i``

Defaults λ = 0.25, γ = 0.1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, List

import numpy as np

from .._errors import ShapeError
from ..model import CompositeOutput
from ..numerics import Tensor, as_tensor, ops

LAMBDA = 0.25
GAMMA = 0.1


@dataclass
class LossReport:
    combined: float
    per_layer: List[float]
    total: float
    lam: float = LAMBDA
    gamma: float = GAMMA
    loss: Tensor | None = field(default=None, repr=False)  # the scalar to backprop


def _weight_column(op: str, w: Any, n: int) -> Tensor:
    w = as_tensor(w)
    if w.shape == (n,):
        w = Tensor(w.data.reshape(n, 1), dtype=w.dtype) if not w.requires_grad else w
    if w.shape != (n, 1):
        raise ShapeError(op, w.shape, (n, 1), detail="weights must be (N,) or (N, 1)")
    return w


def _pixel_error(op: str, pred: Tensor, gt: Any, lam: float) -> Tensor:
    gt = as_tensor(gt)
    if pred.shape != gt.shape or pred.ndim != 2:
        raise ShapeError(op, pred.shape, gt.shape, detail="pred and gt must both be (N, C)")
    delta = ops.sub(pred, gt)
    per = ops.add(ops.abs(delta), ops.mul(lam, ops.square(delta)))
    return ops.mean(per, axis=-1, keepdims=True)  # (N, 1)


def combined_loss(pred: Tensor, gt: Any, w: Any, lam: float = LAMBDA) -> Tensor:
    """``mean(w · (|δ| + λ·δ²))``, channels averaged first.

    Raises:
        ShapeError: pred/gt differ, or w is not one weight per row.
    """
    pred = as_tensor(pred)
    rho = _pixel_error("combined_loss", pred, gt, lam)
    return ops.mean(ops.mul(_weight_column("combined_loss", w, pred.shape[0]), rho))


def layer_loss(layer_rgb: Tensor, gt: Any, w: Any, softmax_alpha: Any,
               lam: float = LAMBDA) -> Tensor:
    """Layer-specific loss: reconstruction error scaled by the layer's softmax
    weight. Gradients flow into ``softmax_alpha`` as well as ``layer_rgb``."""
    layer_rgb = as_tensor(layer_rgb)
    n = layer_rgb.shape[0]
    rho = _pixel_error("layer_loss", layer_rgb, gt, lam)
    alpha = _weight_column("layer_loss", softmax_alpha, n)
    weighted = ops.mul(_weight_column("layer_loss", w, n), rho)
    return ops.mean(ops.mul(alpha, weighted))


def total_loss(outputs: CompositeOutput, gt: Any, w: Any, *, lam: float = LAMBDA,
               gamma: float = GAMMA) -> LossReport:
    """``combined(composite) + γ·Σ layer_loss(layer i)`` from one forward pass."""
    combined = combined_loss(outputs.rgb, gt, w, lam)
    layers = [
        layer_loss(rgb, gt, w, ops.columns(outputs.weights, i, i + 1), lam)
        for i, rgb in enumerate(outputs.layer_rgb)
    ]
    layer_sum = layers[0]
    for term in layers[1:]:
        layer_sum = ops.add(layer_sum, term)
    total = ops.add(combined, ops.mul(gamma, layer_sum))
    return LossReport(
        combined=float(combined.data),
        per_layer=[float(t.data) for t in layers],
        total=float(total.data),
        lam=lam,
        gamma=gamma,
        loss=total,
    )


def batch_stats(pred: Tensor, gt: np.ndarray, w: np.ndarray) -> dict:
    """Summary used in divergence diagnostics."""
    p = np.asarray(pred.data, dtype=np.float64)
    finite = np.isfinite(p)
    return {
        "gt_mean": float(np.mean(gt)),
        "weight_mean": float(np.mean(w)),
        "pred_min": float(p[finite].min()) if finite.any() else float("nan"),
        "pred_max": float(p[finite].max()) if finite.any() else float("nan"),
        "pred_nonfinite": float((~finite).sum()),
    }
