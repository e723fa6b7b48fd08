"""Per-pixel loss weights.

    w = bias + a_lap·|∇²I|ₙ + a_canny·edges + a_tv·tvarₙ

on Rec.601 luma, where ``ₙ`` marks normalization to ``[0, 1]`` over the whole
video (a component whose maximum is ~0 contributes 0) and ``edges`` is a
``{0, 1}`` Canny mask. The map is computed once from ground truth and never
touches the tape.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
from PIL import Image
from scipy import ndimage

from .._errors import ConfigError, MediaError
from ..config import Runtime
from ..media import FRAME_PATTERN, VideoVolume, luma, to_uint8

# components with a max below this are numerically flat
_FLAT = 1e-10


@dataclass(frozen=True)
class WeightCoefficients:
    laplacian: float = 1.0
    canny: float = 1.0
    temporal: float = 1.0
    bias: float = 0.5
    canny_sigma: float = 1.4
    canny_low_pct: float = 70.0
    canny_high_pct: float = 90.0
    temporal_radius: int = 2

    def __post_init__(self):
        if self.bias <= 0:
            raise ConfigError(f"weight bias must be > 0, got {self.bias}")
        if min(self.laplacian, self.canny, self.temporal) < 0:
            raise ConfigError("weight coefficients must be >= 0")
        if not (0 <= self.canny_low_pct <= self.canny_high_pct <= 100):
            raise ConfigError(
                f"need 0 <= canny_low_pct <= canny_high_pct <= 100, got "
                f"{self.canny_low_pct}/{self.canny_high_pct}"
            )
        if self.canny_sigma <= 0 or self.temporal_radius < 0:
            raise ConfigError("canny_sigma must be > 0 and temporal_radius >= 0")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class WeightMap:
    weights: np.ndarray                      # (T, H, W) float32
    coefficients: WeightCoefficients = field(default_factory=WeightCoefficients)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float32)
        if w.ndim != 3:
            raise ConfigError(f"weight map must be (T, H, W), got {w.shape}")
        self.weights = w

    @property
    def shape(self):
        return self.weights.shape


def laplacian_magnitude(gray: np.ndarray) -> np.ndarray:
    """``|∇²I|`` with the 3×3 kernel ``[0,1,0; 1,−4,1; 0,1,0]``, edges replicated."""
    return np.abs(ndimage.laplace(np.asarray(gray, dtype=np.float64), mode="nearest"))


def _non_max_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    p = np.pad(mag, 1, mode="constant")
    h, w = mag.shape

    def at(dr: int, dc: int) -> np.ndarray:
        return p[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]

    # neighbours along the gradient direction, (row, col) offsets
    horiz = (angle < 22.5) | (angle >= 157.5)
    diag = (angle >= 22.5) & (angle < 67.5)
    vert = (angle >= 67.5) & (angle < 112.5)
    anti = (angle >= 112.5) & (angle < 157.5)
    keep = np.zeros_like(mag, dtype=bool)
    keep |= horiz & (mag >= at(0, 1)) & (mag >= at(0, -1))
    keep |= diag & (mag >= at(1, 1)) & (mag >= at(-1, -1))
    keep |= vert & (mag >= at(1, 0)) & (mag >= at(-1, 0))
    keep |= anti & (mag >= at(1, -1)) & (mag >= at(-1, 1))
    return np.where(keep, mag, 0.0)


def canny_edges(gray: np.ndarray, sigma: float = 1.4, low_pct: float = 70.0,
                high_pct: float = 90.0) -> np.ndarray:
    """Boolean Canny mask: Gaussian smoothing, Sobel gradients, non-maximum
    suppression, and hysteresis with thresholds at percentiles of the non-zero
    gradient magnitude."""
    smoothed = ndimage.gaussian_filter(np.asarray(gray, dtype=np.float64), sigma, mode="nearest")
    gx = ndimage.sobel(smoothed, axis=1, mode="nearest")
    gy = ndimage.sobel(smoothed, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    active = mag[mag > _FLAT]
    if active.size == 0:
        return np.zeros(mag.shape, dtype=bool)
    nms = _non_max_suppression(mag, gx, gy)
    low, high = np.percentile(active, [low_pct, high_pct])
    weak = nms >= max(low, _FLAT)
    strong = nms >= max(high, _FLAT)
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    keep = np.unique(labels[strong])
    return np.isin(labels, keep[keep > 0])


def temporal_variance(gray: np.ndarray, radius: int = 2) -> np.ndarray:
    """Per-pixel luma variance over ``±radius`` frames (windows shrink at the
    ends). A single-frame video has zero variance everywhere."""
    g = np.asarray(gray, dtype=np.float64)
    T = g.shape[0]
    out = np.zeros_like(g)
    if T < 2 or radius == 0:
        return out
    for k in range(T):
        lo, hi = max(0, k - radius), min(T, k + radius + 1)
        out[k] = g[lo:hi].var(axis=0)
    return out


def _normalized(component: np.ndarray) -> np.ndarray:
    peak = float(component.max()) if component.size else 0.0
    if peak <= _FLAT:
        return np.zeros_like(component)
    return component / peak


def build_weight_map(video: VideoVolume, coeffs: WeightCoefficients | None = None) -> WeightMap:
    """Weight map for ``video``. Spatial components run frame-parallel over
    ``Runtime.threads`` workers."""
    c = coeffs or WeightCoefficients()
    gray = luma(video.frames)  # (T, H, W)

    def spatial(k: int):
        lap = laplacian_magnitude(gray[k]) if c.laplacian else np.zeros(gray.shape[1:])
        edges = (canny_edges(gray[k], c.canny_sigma, c.canny_low_pct, c.canny_high_pct)
                 if c.canny else np.zeros(gray.shape[1:], dtype=bool))
        return lap, edges

    with ThreadPoolExecutor(max_workers=Runtime.worker_count()) as pool:
        parts = list(pool.map(spatial, range(gray.shape[0])))
    lap = np.stack([p[0] for p in parts])
    edges = np.stack([p[1] for p in parts]).astype(np.float64)
    tv = temporal_variance(gray, c.temporal_radius) if c.temporal else np.zeros_like(gray)

    w = (c.bias
         + c.laplacian * _normalized(lap)
         + c.canny * edges
         + c.temporal * _normalized(tv))
    return WeightMap(w.astype(np.float32), c)


def export_weight_map(wm: WeightMap, directory: Union[str, Path]) -> List[Path]:
    """Debug export: one grayscale PNG per frame, scaled by the map maximum."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise MediaError(f"cannot create '{d}': {e}") from e
    peak = float(wm.weights.max()) or 1.0
    data = to_uint8(wm.weights / peak)
    paths = []
    for k in range(data.shape[0]):
        p = d / FRAME_PATTERN.format(k)
        Image.fromarray(data[k]).save(p, format="PNG")
        paths.append(p)
    return paths
