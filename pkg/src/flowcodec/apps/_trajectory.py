"""Per-frame similarity trajectories and stabilization.

A layer's flow net yields one ``(s_raw, θ, Δx, Δy)`` row per frame time.
Smoothing works on those rows, never on matrix entries, so every smoothed
entry is still a similarity transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .._errors import ConfigError
from ..model import FlowModel, SimilarityTransform, coefficients_from_params, flow_transform
from ..numerics import default_dtype
from ._render import Resolution, _check_layer, frame_times, render

SMOOTHING_KINDS = ("box", "gaussian")


@dataclass
class Trajectory:
    times: np.ndarray   # (K,) normalized frame times
    params: np.ndarray  # (K, 4) rows of (s_raw, θ, Δx, Δy)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        self.params = np.asarray(self.params, dtype=np.float64).reshape(-1, 4)
        if self.params.shape[0] != self.times.size:
            raise ConfigError(
                f"trajectory has {self.times.size} times but {self.params.shape[0]} parameter rows"
            )

    @classmethod
    def from_transforms(cls, times, transforms: Sequence[SimilarityTransform]) -> "Trajectory":
        rows = [(tr.s_raw, tr.theta, tr.dx, tr.dy) for tr in transforms]
        return cls(times, np.array(rows, dtype=np.float64).reshape(-1, 4))

    def __len__(self) -> int:
        return self.times.size

    @property
    def transforms(self) -> List[SimilarityTransform]:
        return [SimilarityTransform(*map(float, row)) for row in self.params]

    @property
    def matrices(self) -> np.ndarray:
        """``(K, 2, 3)`` similarity matrices."""
        if len(self) == 0:
            return np.zeros((0, 2, 3))
        return np.stack([tr.matrix for tr in self.transforms])


def extract_trajectory(model: FlowModel, layer_index: int, times=None) -> Trajectory:
    """The layer's similarity transform at each time (default: training frames).

    Raises:
        NumericError: the flow net produced a non-finite value.
    """
    _check_layer(model, layer_index)
    t = frame_times(model.frames) if times is None else np.asarray(times, dtype=np.float64).reshape(-1)
    layer = model.layers[layer_index]
    return Trajectory.from_transforms(t, [flow_transform(layer, float(tk)) for tk in t])


def _kernel(kind: str, window: int, sigma: Optional[float]) -> np.ndarray:
    half = window // 2
    if kind == "box":
        return np.ones(window)
    s = sigma if sigma is not None else max(window / 4.0, 1e-6)
    if s <= 0:
        raise ConfigError(f"gaussian sigma must be > 0, got {s}")
    d = np.arange(-half, half + 1, dtype=np.float64)
    return np.exp(-0.5 * (d / s) ** 2)


def smooth_trajectory(traj: Trajectory, window: int, *, kind: str = "box",
                      sigma: Optional[float] = None) -> Trajectory:
    """Moving average over the parameter rows. ``window`` is odd; at the ends
    the window shrinks to the frames that exist (weights renormalized).
    ``window=1`` returns an unchanged copy."""
    if window < 1 or window % 2 == 0:
        raise ConfigError(f"smoothing window must be an odd integer >= 1, got {window}")
    if kind not in SMOOTHING_KINDS:
        raise ConfigError(f"unknown smoothing kind '{kind}', expected one of {SMOOTHING_KINDS}")
    if window == 1 or len(traj) == 0:
        return Trajectory(traj.times.copy(), traj.params.copy())

    kernel = _kernel(kind, window, sigma)
    half = window // 2
    K = len(traj)
    out = np.empty_like(traj.params)
    for k in range(K):
        lo, hi = max(0, k - half), min(K, k + half + 1)
        w = kernel[lo - (k - half):hi - (k - half)]
        out[k] = (w[:, None] * traj.params[lo:hi]).sum(axis=0) / w.sum()
    return Trajectory(traj.times.copy(), out)


def stabilize(model: FlowModel, window: int, times=None, resolution: Optional[Resolution] = None,
              *, kind: str = "box", sigma: Optional[float] = None) -> np.ndarray:
    """Render with every layer's flow replaced by its smoothed trajectory.

    Smoothed transforms may sample outside ``[-1, 1]``; nothing is clamped.
    ``window=1`` is bit-identical to :func:`render`.
    """
    t = frame_times(model.frames) if times is None else np.asarray(times, dtype=np.float64).reshape(-1)
    if window == 1 and kind in SMOOTHING_KINDS:
        return render(model, t, resolution)

    dtype = default_dtype()
    per_layer: List[Optional[np.ndarray]] = []
    for i, layer in enumerate(model.layers):
        if layer.flow_frozen:
            per_layer.append(None)
            continue
        smoothed = smooth_trajectory(extract_trajectory(model, i, t), window, kind=kind, sigma=sigma)
        per_layer.append(coefficients_from_params(smoothed.params.astype(dtype)))

    coefficients = [
        [None if c is None else c[k:k + 1] for c in per_layer]
        for k in range(t.size)
    ]
    return render(model, t, resolution, coefficients=coefficients)
