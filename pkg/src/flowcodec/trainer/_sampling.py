"""Random coordinate batches and the fixed validation grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._errors import ConfigError, MediaError
from ..media import VideoVolume
from ..model import normalize_coords

# videos up to this many (strided) pixels validate on every pixel
FULL_VALIDATION_LIMIT = 2_000_000
VALIDATION_FRACTION = 0.01


@dataclass
class Batch:
    """``coords`` is ``(N, 3)`` normalized ``(x, y, t)``; ``frame``, ``row``
    and ``col`` are the pixel indices they came from."""

    coords: np.ndarray
    gt: np.ndarray       # (N, 3)
    weights: np.ndarray  # (N,)
    frame: np.ndarray
    row: np.ndarray
    col: np.ndarray

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.coords[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.coords[:, 1]

    @property
    def t(self) -> np.ndarray:
        return self.coords[:, 2]


def _grid_sizes(video: VideoVolume, stride: int, frame_stride: int):
    if stride < 1 or frame_stride < 1:
        raise ConfigError(f"stride and frame_stride must be >= 1, got {stride}, {frame_stride}")
    T, H, W = video.frames.shape[:3]
    if T * H * W == 0:
        raise MediaError(f"{video.source}: cannot sample from an empty video")
    return -(-T // frame_stride), -(-H // stride), -(-W // stride)


def trainable_pixels(video: VideoVolume, stride: int = 1, frame_stride: int = 1) -> int:
    nt, nh, nw = _grid_sizes(video, stride, frame_stride)
    return nt * nh * nw


def _gather(video: VideoVolume, frame, row, col) -> Batch:
    T, H, W = video.frames.shape[:3]
    coords = np.stack([normalize_coords(col, W), normalize_coords(row, H),
                       normalize_coords(frame, T)], axis=1)
    gt = video.frames[frame, row, col]
    if video.weight_map is not None:
        w = video.weight_map[frame, row, col]
    else:
        w = np.ones(frame.shape[0], dtype=np.float32)
    return Batch(coords=coords, gt=gt, weights=w, frame=frame, row=row, col=col)


def sample_batch(video: VideoVolume, rng: np.random.Generator, batch_size: int,
                 stride: int = 1, frame_stride: int = 1) -> Batch:
    """``batch_size`` pixels drawn uniformly (with replacement) from the
    strided grid. Without a weight map every weight is 1.

    Raises:
        MediaError: the video is empty.
        ConfigError: batch_size or a stride below 1.
    """
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
    nt, nh, nw = _grid_sizes(video, stride, frame_stride)
    frame = rng.integers(0, nt, batch_size) * frame_stride
    row = rng.integers(0, nh, batch_size) * stride
    col = rng.integers(0, nw, batch_size) * stride
    return _gather(video, frame, row, col)


def validation_grid(video: VideoVolume, stride: int = 1, frame_stride: int = 1,
                    *, seed: int = 0) -> Batch:
    """Every strided pixel, or a fixed seeded 1% subsample above
    ``FULL_VALIDATION_LIMIT``."""
    nt, nh, nw = _grid_sizes(video, stride, frame_stride)
    total = nt * nh * nw
    if total <= FULL_VALIDATION_LIMIT:
        flat = np.arange(total)
    else:
        rng = np.random.default_rng([seed, 3])
        flat = np.sort(rng.choice(total, size=max(1, int(total * VALIDATION_FRACTION)), replace=False))
    k, rem = np.divmod(flat, nh * nw)
    r, c = np.divmod(rem, nw)
    return _gather(video, k * frame_stride, r * stride, c * stride)
