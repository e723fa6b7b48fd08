"""Symmetric per-tensor int8 quantization.

``scale = max|w| / 127`` (float32), ``q = clamp(round(w / scale), −127, 127)``,
``ŵ = scale · q``. An all-zero tensor gets ``scale = 1`` and all-zero ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Tuple

import numpy as np

from .._errors import NumericError
from ..model import FlowModel, model_from_bytes, model_to_bytes
from ..numerics import Tensor

QMAX = 127


@dataclass(frozen=True)
class QuantizedTensor:
    values: np.ndarray  # int8, original shape
    scale: float        # a float32 value
    zero_point: int = 0

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape


def quantize(t: Any) -> QuantizedTensor:
    """Raises ``NumericError`` on non-finite input."""
    w = np.asarray(t.data if isinstance(t, Tensor) else t, dtype=np.float32)
    if not np.all(np.isfinite(w)):
        raise NumericError("cannot quantize a tensor with non-finite values")
    peak = float(np.max(np.abs(w))) if w.size else 0.0
    if peak == 0.0:
        return QuantizedTensor(np.zeros(w.shape, dtype=np.int8), 1.0)
    scale = np.float32(peak / QMAX)
    q = np.clip(np.rint(w / scale), -QMAX, QMAX).astype(np.int8)
    return QuantizedTensor(q, float(scale))


def dequantize(q: QuantizedTensor) -> np.ndarray:
    """``scale · q`` in float32, the exact values the decoder reproduces."""
    return q.values.astype(np.float32) * np.float32(q.scale)


def quantize_model(model: FlowModel) -> FlowModel:
    """A copy of ``model`` whose color weights are replaced by their
    dequantized values; flow weights are untouched."""
    out = model_from_bytes(model_to_bytes(model))
    for _, t, component in out.named_tensors():
        if component == "color":
            t.data[...] = dequantize(quantize(t))
    return out
