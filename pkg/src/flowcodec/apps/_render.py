"""Dense evaluation of a trained model.

Every product here goes through one per-frame evaluator, so ``render``,
``upsample`` at scale 1 and ``stabilize`` with window 1 produce bit-identical
frames. Frames are evaluated in parallel over ``Runtime.threads`` workers;
inside a frame, pixels are processed in fixed-size chunks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .._errors import ConfigError
from ..config import Runtime
from ..log import RunLog
from ..model import FlowModel, composite_forward, layer_forward, normalize_coords
from ..model._pe import encode
from ..numerics import Tensor, no_grad

CHUNK = 65536

Resolution = Tuple[int, int]  # (width, height)
# per frame: per layer (U=1, 4) warp coefficients, or None for the layer's own flow
FrameCoefficients = Optional[Sequence[Optional[np.ndarray]]]


@dataclass
class SegmentationMap:
    index: np.ndarray    # (K, H, W) int, argmax layer
    weights: np.ndarray  # (K, H, W, n) softmax weights

    @property
    def n_layers(self) -> int:
        return self.weights.shape[-1]


def frame_times(n_frames: int, scale: int = 1) -> np.ndarray:
    """Normalized times of the ``n_frames`` training frames, or of
    ``(n_frames − 1)·scale + 1`` evenly interleaved times. Training frames
    land on exactly the same values at every scale."""
    if scale < 1:
        raise ConfigError(f"temporal scale must be >= 1, got {scale}")
    count = (n_frames - 1) * scale + 1
    return normalize_coords(np.arange(count, dtype=np.float64) / scale, n_frames)


def pixel_grid(resolution: Resolution) -> Tuple[np.ndarray, np.ndarray]:
    """Flattened normalized ``(x, y)`` of a ``width × height`` grid, row-major."""
    w, h = resolution
    if w < 1 or h < 1:
        raise ConfigError(f"resolution must be at least 1x1, got {w}x{h}")
    xs = normalize_coords(np.arange(w), w)
    ys = normalize_coords(np.arange(h), h)
    gx, gy = np.meshgrid(xs, ys)
    return gx.reshape(-1), gy.reshape(-1)


def _resolve(model: FlowModel, times, resolution) -> Tuple[np.ndarray, Resolution]:
    t = frame_times(model.frames) if times is None else np.asarray(times, dtype=np.float64).reshape(-1)
    res = (model.width, model.height) if resolution is None else (int(resolution[0]), int(resolution[1]))
    return t, res


def _evaluate(model: FlowModel, times: np.ndarray, resolution: Resolution,
              per_chunk: Callable[[np.ndarray, np.ndarray, np.ndarray, FrameCoefficients], np.ndarray],
              channels: int, coefficients: Optional[Sequence[FrameCoefficients]] = None) -> np.ndarray:
    xs, ys = pixel_grid(resolution)
    w, h = resolution
    n = xs.size

    def frame(k: int) -> np.ndarray:
        t = np.full(n, times[k])
        coef = coefficients[k] if coefficients is not None else None
        out = np.empty((n, channels), dtype=np.float32)
        for lo in range(0, n, CHUNK):
            hi = min(lo + CHUNK, n)
            out[lo:hi] = per_chunk(xs[lo:hi], ys[lo:hi], t[lo:hi], coef)
        return out.reshape(h, w, channels)

    with no_grad():
        with ThreadPoolExecutor(max_workers=Runtime.worker_count()) as pool:
            frames = list(pool.map(frame, range(times.size)))
    if not frames:
        return np.zeros((0, h, w, channels), dtype=np.float32)
    return np.stack(frames)


def render(model: FlowModel, times=None, resolution: Optional[Resolution] = None, *,
           coefficients: Optional[Sequence[FrameCoefficients]] = None) -> np.ndarray:
    """Composite RGB frames ``(K, H, W, 3)``. Defaults: the training times and
    resolution. Pure: identical inputs give bit-identical frames."""
    t, res = _resolve(model, times, resolution)

    def rgb(x, y, tt, coef):
        return composite_forward(model, x, y, tt, coefficients=coef).rgb.data

    return _evaluate(model, t, res, rgb, 3, coefficients)


def upsample(model: FlowModel, scale_xy: int = 1, scale_t: int = 1) -> np.ndarray:
    """Render on a ``scale_xy``-times denser pixel grid and/or with
    ``scale_t − 1`` interpolated frames between training frames."""
    if scale_xy < 1 or scale_t < 1:
        raise ConfigError(f"upsampling scales must be >= 1, got {scale_xy}, {scale_t}")
    res = (model.width * scale_xy, model.height * scale_xy)
    return render(model, frame_times(model.frames, scale_t), res)


def segment(model: FlowModel, times=None, resolution: Optional[Resolution] = None, *,
            run_log: Optional[RunLog] = None) -> SegmentationMap:
    """Per-pixel softmax layer weights and their argmax. A single-layer model
    gives an all-zero index map (and a warning)."""
    t, res = _resolve(model, times, resolution)
    if model.n_layers == 1:
        (run_log or RunLog()).log(metadata={"layers": 1}).warn(
            "segmentation of a single-layer model is a constant map"
        )

    def weights(x, y, tt, coef):
        return composite_forward(model, x, y, tt).weights.data

    wts = _evaluate(model, t, res, weights, model.n_layers)
    return SegmentationMap(index=np.argmax(wts, axis=-1).astype(np.int64), weights=wts)


def _check_layer(model: FlowModel, layer_index: int) -> None:
    if not (0 <= layer_index < model.n_layers):
        raise ConfigError(f"layer index {layer_index} out of range for a {model.n_layers}-layer model")


def inpaint(model: FlowModel, layer_index: int, times=None,
            resolution: Optional[Resolution] = None) -> np.ndarray:
    """Render one layer's RGB alone, no compositing. On the background layer
    this fills in what foreground objects occlude."""
    _check_layer(model, layer_index)
    t, res = _resolve(model, times, resolution)
    layer = model.layers[layer_index]

    def rgb(x, y, tt, coef):
        return layer_forward(layer, x, y, tt).rgb.data

    return _evaluate(model, t, res, rgb, 3)


def render_canonical(model: FlowModel, layer_index: int, t: float = 0.0,
                     resolution: Optional[Resolution] = None, extent: float = 1.5) -> np.ndarray:
    """Debug view of one color net with the flow bypassed, sampled over
    ``[-extent, extent]²``. Outside ``[-1, 1]`` fidelity is best-effort."""
    _check_layer(model, layer_index)
    if extent <= 0:
        raise ConfigError(f"extent must be > 0, got {extent}")
    w, h = (model.width, model.height) if resolution is None else resolution
    xs, ys = pixel_grid((w, h))
    color = model.layers[layer_index].color
    out = np.empty((xs.size, 3), dtype=np.float32)
    with no_grad():
        for lo in range(0, xs.size, CHUNK):
            hi = min(lo + CHUNK, xs.size)
            n = hi - lo
            tf = encode(Tensor(np.full((n, 1), t)), color.temporal_pe)
            rgb, _ = color(Tensor(xs[lo:hi, None] * extent), Tensor(ys[lo:hi, None] * extent), tf)
            out[lo:hi] = rgb.data
    return out.reshape(h, w, 3)


def layer_frames(model: FlowModel, times=None, resolution: Optional[Resolution] = None) -> List[np.ndarray]:
    """Every layer rendered alone, in layer order."""
    return [inpaint(model, i, times, resolution) for i in range(model.n_layers)]
