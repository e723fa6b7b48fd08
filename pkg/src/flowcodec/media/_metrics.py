"""PSNR and luma. Every module reports through these."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .._errors import ShapeError

PSNR_CAP = 100.0
REC601 = np.array([0.299, 0.587, 0.114])


def luma(frames: np.ndarray) -> np.ndarray:
    """Rec.601 luma over the last axis: ``0.299R + 0.587G + 0.114B``."""
    return np.asarray(frames, dtype=np.float64) @ REC601


def mse(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError("psnr", a.shape, b.shape)
    d = a - b
    return float(np.mean(d * d))


def psnr(a: np.ndarray, b: np.ndarray, *, cap: Optional[float] = PSNR_CAP) -> float:
    """``10·log10(1/MSE)`` on normalized values. A perfect match is ``+inf``,
    reported as ``cap`` unless ``cap=None``."""
    err = mse(a, b)
    value = math.inf if err == 0.0 else 10.0 * math.log10(1.0 / err)
    return value if cap is None else min(value, cap)
