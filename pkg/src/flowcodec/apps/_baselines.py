"""Classical reference methods the learned products are measured against."""

from __future__ import annotations

from typing import Tuple

import numpy as np
from scipy import fft, ndimage

from .._errors import ConfigError, ShapeError
from ..media import luma


def bilinear_upsample(frames: np.ndarray, stride: int, shape: Tuple[int, int]) -> np.ndarray:
    """Bilinear interpolation of ``(T, h, w, 3)`` frames holding every
    ``stride``-th pixel of a ``(H, W)`` grid back onto the full grid.
    Beyond the last sampled pixel the edge value is held."""
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    f = np.asarray(frames, dtype=np.float32)
    if f.ndim != 4:
        raise ShapeError("bilinear_upsample", f.shape, detail="frames must be (T, h, w, C)")
    H, W = shape
    rows = np.arange(H, dtype=np.float64) / stride
    cols = np.arange(W, dtype=np.float64) / stride
    gr, gc = np.meshgrid(rows, cols, indexing="ij")
    out = np.empty((f.shape[0], H, W, f.shape[3]), dtype=np.float32)
    for k in range(f.shape[0]):
        for c in range(f.shape[3]):
            out[k, :, :, c] = ndimage.map_coordinates(f[k, :, :, c], [gr, gc], order=1, mode="nearest")
    return out


def nearest_frame(frames: np.ndarray, frame_stride: int, n_frames: int) -> np.ndarray:
    """Fill a ``n_frames`` sequence from frames kept every ``frame_stride``-th
    by copying the closest kept frame (ties go to the earlier one)."""
    if frame_stride < 1:
        raise ConfigError(f"frame_stride must be >= 1, got {frame_stride}")
    f = np.asarray(frames)
    src = np.ceil(np.arange(n_frames) / frame_stride - 0.5).astype(np.int64)
    return f[np.clip(src, 0, f.shape[0] - 1)].copy()


def _parabolic(c_minus: float, c0: float, c_plus: float) -> float:
    denom = c_minus - 2.0 * c0 + c_plus
    if denom == 0.0:
        return 0.0
    return float(np.clip(0.5 * (c_minus - c_plus) / denom, -0.5, 0.5))


def estimate_shifts(frames: np.ndarray) -> np.ndarray:
    """``(T−1, 2)`` frame-to-frame ``(dx, dy)`` translations by phase
    correlation on luma, refined to sub-pixel with a parabola through the peak.

    A frame that is frame ``k`` rolled by ``(dx, dy)`` gives exactly
    ``(dx, dy)``."""
    gray = luma(np.asarray(frames, dtype=np.float64))
    if gray.ndim != 3:
        raise ShapeError("estimate_shifts", gray.shape, detail="frames must be (T, H, W, 3)")
    T, H, W = gray.shape
    spectra = fft.fft2(gray - gray.mean(axis=(1, 2), keepdims=True))
    out = np.zeros((max(T - 1, 0), 2))
    for k in range(T - 1):
        cross = spectra[k + 1] * np.conj(spectra[k])
        mag = np.abs(cross)
        cross = np.where(mag > 1e-12, cross / np.maximum(mag, 1e-12), 0.0)
        corr = fft.ifft2(cross).real
        r, c = np.unravel_index(int(np.argmax(corr)), corr.shape)
        dr = _parabolic(corr[(r - 1) % H, c], corr[r, c], corr[(r + 1) % H, c])
        dc = _parabolic(corr[r, (c - 1) % W], corr[r, c], corr[r, (c + 1) % W])
        dy = (r + H // 2) % H - H // 2 + dr
        dx = (c + W // 2) % W - W // 2 + dc
        out[k] = (dx, dy)
    return out
