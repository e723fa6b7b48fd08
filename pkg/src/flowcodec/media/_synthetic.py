"""Synthetic videos with known motion.

A smooth random background texture moves by a per-frame similarity
(translation, rotation about the frame center, zoom); an independently
textured sprite translates on top of it. Optional camera jitter offsets both,
and optional Gaussian noise is added last. Everything wraps at the frame edges,
and integer translations are exact rolls, so the true motion is known exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from .._errors import ConfigError
from ._video import VideoVolume


@dataclass
class SyntheticSpec:
    width: int = 96
    height: int = 96
    frames: int = 60
    seed: int = 0
    texture_sigma: float = 2.0
    background_velocity: Tuple[float, float] = (1.0, 0.0)   # (x, y) px / frame
    background_rotation: float = 0.0                        # rad / frame
    background_zoom: float = 0.0                            # log-scale / frame
    sprite: bool = True
    sprite_size: int = 24
    sprite_shape: str = "square"                            # square | disk
    sprite_start: Optional[Tuple[float, float]] = None      # top-left (x, y)
    sprite_velocity: Tuple[float, float] = (-1.0, 1.0)
    jitter: float = 0.0                                     # px, uniform ± per frame
    noise_sigma: float = 0.0
    fps: float = 30.0

    def validate(self) -> None:
        if self.width < 1 or self.height < 1 or self.frames < 1:
            raise ConfigError(f"synthetic video needs positive dims, got "
                              f"{self.width}x{self.height}x{self.frames}")
        if self.sprite and not (1 <= self.sprite_size <= min(self.width, self.height)):
            raise ConfigError(
                f"sprite of size {self.sprite_size} does not fit a {self.width}x{self.height} frame"
            )
        if self.sprite_shape not in ("square", "disk"):
            raise ConfigError(f"sprite_shape must be 'square' or 'disk', got {self.sprite_shape!r}")
        if self.jitter < 0 or self.noise_sigma < 0 or self.texture_sigma < 0:
            raise ConfigError("jitter, noise_sigma and texture_sigma must be >= 0")


@dataclass
class SyntheticTruth:
    clean: np.ndarray               # (T, H, W, 3) before noise
    background: np.ndarray          # (T, H, W, 3) background only
    background_offsets: np.ndarray  # (T, 2) (x, y) px, jitter included
    sprite_offsets: np.ndarray      # (T, 2) (x, y) px of the sprite's top-left
    sprite_masks: np.ndarray        # (T, H, W) bool
    jitter: np.ndarray              # (T, 2) (x, y) px


def _is_whole(v: float) -> bool:
    return float(v).is_integer()


def warp_wrapped(img: np.ndarray, offset: Tuple[float, float], angle: float = 0.0,
                 log_scale: float = 0.0) -> np.ndarray:
    """Move image content by ``offset`` (x, y) px after rotating/zooming about
    the center, wrapping at the edges. Integer pure translations are exact."""
    ox, oy = offset
    if angle == 0.0 and log_scale == 0.0:
        if _is_whole(ox) and _is_whole(oy):
            return np.roll(img, (int(oy), int(ox)), axis=(0, 1))
        shift = (oy, ox) + (0.0,) * (img.ndim - 2)
        return ndimage.shift(img, shift, order=1, mode="grid-wrap")

    h, w = img.shape[:2]
    c, n = math.cos(angle), math.sin(angle)
    s = math.exp(log_scale)
    # (row, col) form of the inverse similarity
    inv = np.array([[c, -n], [n, c]]) / s
    center = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    off = center - inv @ (center + np.array([oy, ox]))
    if img.ndim == 2:
        return ndimage.affine_transform(img, inv, offset=off, order=1, mode="grid-wrap")
    return np.stack(
        [ndimage.affine_transform(img[..., ch], inv, offset=off, order=1, mode="grid-wrap")
         for ch in range(img.shape[-1])],
        axis=-1,
    )


def _texture(rng: np.random.Generator, h: int, w: int, sigma: float) -> np.ndarray:
    tex = rng.standard_normal((h, w, 3))
    if sigma > 0:
        tex = ndimage.gaussian_filter(tex, sigma=(sigma, sigma, 0), mode="wrap")
    lo = tex.min(axis=(0, 1), keepdims=True)
    hi = tex.max(axis=(0, 1), keepdims=True)
    return (tex - lo) / np.maximum(hi - lo, 1e-12)


def make_synthetic(spec: SyntheticSpec) -> Tuple[VideoVolume, SyntheticTruth]:
    """Render ``spec``; deterministic for a fixed seed.

    Raises:
        ConfigError: invalid spec, e.g. a sprite larger than the frame.
    """
    spec.validate()
    H, W, T = spec.height, spec.width, spec.frames
    rng = np.random.default_rng([spec.seed, 2])

    background_tex = 0.1 + 0.8 * _texture(rng, H, W, spec.texture_sigma)

    S = spec.sprite_size
    sprite_canvas = np.zeros((H, W, 3))
    mask_canvas = np.zeros((H, W))
    if spec.sprite:
        tint = rng.uniform(0.0, 1.0, size=3)
        patch = 0.35 * _texture(rng, S, S, 1.0) + 0.65 * tint
        if spec.sprite_shape == "disk":
            yy, xx = np.mgrid[0:S, 0:S]
            r = (S - 1) / 2.0
            shape_mask = ((yy - r) ** 2 + (xx - r) ** 2 <= r * r).astype(np.float64)
        else:
            shape_mask = np.ones((S, S))
        sprite_canvas[:S, :S] = patch
        mask_canvas[:S, :S] = shape_mask

    jitter = (rng.uniform(-spec.jitter, spec.jitter, size=(T, 2))
              if spec.jitter > 0 else np.zeros((T, 2)))
    start = np.array(spec.sprite_start if spec.sprite_start is not None
                     else ((W - S) / 2.0, (H - S) / 2.0), dtype=np.float64)
    if spec.sprite_start is None:
        start = np.floor(start)

    k = np.arange(T, dtype=np.float64)[:, None]
    bg_offsets = k * np.asarray(spec.background_velocity, dtype=np.float64) + jitter
    sp_offsets = start + k * np.asarray(spec.sprite_velocity, dtype=np.float64) + jitter

    background = np.empty((T, H, W, 3))
    clean = np.empty((T, H, W, 3))
    masks = np.zeros((T, H, W), dtype=bool)
    for i in range(T):
        bg = warp_wrapped(background_tex, tuple(bg_offsets[i]),
                          angle=i * spec.background_rotation, log_scale=i * spec.background_zoom)
        background[i] = bg
        if spec.sprite:
            off = tuple(sp_offsets[i])
            alpha = np.clip(warp_wrapped(mask_canvas, off), 0.0, 1.0)
            fg = warp_wrapped(sprite_canvas, off)
            clean[i] = alpha[..., None] * fg + (1.0 - alpha[..., None]) * bg
            masks[i] = alpha > 0.5
        else:
            clean[i] = bg
    clean = np.clip(clean, 0.0, 1.0)

    noisy = clean
    if spec.noise_sigma > 0:
        noisy = np.clip(clean + rng.normal(0.0, spec.noise_sigma, size=clean.shape), 0.0, 1.0)

    truth = SyntheticTruth(
        clean=clean.astype(np.float32),
        background=np.clip(background, 0.0, 1.0).astype(np.float32),
        background_offsets=bg_offsets,
        sprite_offsets=sp_offsets,
        sprite_masks=masks,
        jitter=jitter,
    )
    video = VideoVolume(noisy.astype(np.float32), fps=spec.fps, source=f"synthetic(seed={spec.seed})")
    return video, truth
