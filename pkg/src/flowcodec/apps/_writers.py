"""On-disk exports for segmentation maps and trajectories."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List, Union

import numpy as np
from PIL import Image

from .._errors import MediaError
from ..media import FRAME_PATTERN
from ._render import SegmentationMap
from ._trajectory import Trajectory

# distinct colors for the first layers; later layers cycle
_PALETTE = [
    (0, 0, 0), (230, 25, 75), (60, 180, 75), (255, 225, 25),
    (0, 130, 200), (245, 130, 48), (145, 30, 180), (70, 240, 240),
]

TRAJECTORY_COLUMNS = ("t", "s", "theta", "dx", "dy")


def _mkdir(d: Path) -> None:
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise MediaError(f"cannot create '{d}': {e}") from e


def save_segmentation(seg: SegmentationMap, directory: Union[str, Path]) -> List[Path]:
    """Indexed PNG per frame (palette index = layer) plus ``weights.npy``
    holding the float32 softmax weights ``(K, H, W, n)``."""
    d = Path(directory)
    _mkdir(d)
    palette = [c for i in range(256) for c in _PALETTE[i % len(_PALETTE)]]
    paths = []
    for k in range(seg.index.shape[0]):
        idx = np.ascontiguousarray(seg.index[k], dtype=np.uint8)
        im = Image.frombytes("P", (idx.shape[1], idx.shape[0]), idx.tobytes())
        im.putpalette(palette)
        p = d / FRAME_PATTERN.format(k)
        im.save(p, format="PNG")
        paths.append(p)
    weights_path = d / "weights.npy"
    np.save(weights_path, seg.weights.astype(np.float32))
    paths.append(weights_path)
    return paths


def save_trajectory_csv(traj: Trajectory, path: Union[str, Path]) -> Path:
    """CSV with columns ``t,s,theta,dx,dy`` (``s = exp(s_raw)``)."""
    p = Path(path)
    _mkdir(p.parent)
    with p.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(TRAJECTORY_COLUMNS)
        for t, tr in zip(traj.times, traj.transforms):
            writer.writerow([repr(float(t)), repr(tr.s), repr(tr.theta), repr(tr.dx), repr(tr.dy)])
    return p
