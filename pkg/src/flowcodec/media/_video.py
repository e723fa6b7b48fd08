"""Frame I/O.

Two on-disk forms:

* a directory of numbered frames (``frame_000000.png`` ...), ordered by the
  number in the filename; PNG and PPM/PNM are read, PNG is written;
* a raw RGB24 file (``clip.rgb``) with a JSON sidecar (``clip.json``) holding
  ``{"width", "height", "frames", "fps"}``.

Samples are float32 in ``[0, 1]``; writing rounds half-up to 8 bits.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from PIL import Image

from .._errors import MediaError
from ..config import Runtime

FRAME_PATTERN = "frame_{:06d}.png"
_FRAME_SUFFIXES = {".png", ".ppm", ".pnm"}
_NUMBER = re.compile(r"(\d+)(?!.*\d)")


@dataclass
class VideoVolume:
    """``frames`` is ``(T, H, W, 3)`` float32 in ``[0, 1]``.

    ``weight_map`` (``(T, H, W)``) is attached by the trainer once built.
    """

    frames: np.ndarray
    fps: float = 30.0
    source: str = "<memory>"
    weight_map: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=np.float32)
        if f.ndim != 4 or f.shape[-1] != 3:
            raise MediaError(f"{self.source}: frames must be (T, H, W, 3), got {f.shape}")
        if f.size == 0:
            raise MediaError(f"{self.source}: video has no samples")
        if not np.all(np.isfinite(f)) or f.min() < 0.0 or f.max() > 1.0:
            raise MediaError(f"{self.source}: samples must be finite and within [0, 1]")
        self.frames = f
        if self.weight_map is not None:
            wm = np.asarray(self.weight_map, dtype=np.float32)
            if wm.shape != f.shape[:3]:
                raise MediaError(f"{self.source}: weight map {wm.shape} does not match frames {f.shape[:3]}")
            self.weight_map = wm

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def num_pixels(self) -> int:
        return self.n_frames * self.height * self.width

    def __repr__(self) -> str:
        return (f"VideoVolume({self.width}x{self.height}x{self.n_frames}, fps={self.fps:g}, "
                f"source={self.source!r})")


def to_uint8(frames: np.ndarray) -> np.ndarray:
    """Round half-up to 8 bits: ``floor(v·255 + 0.5)``."""
    v = np.clip(np.asarray(frames, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def from_uint8(frames: np.ndarray) -> np.ndarray:
    return (np.asarray(frames, dtype=np.float32) / np.float32(255.0)).astype(np.float32)


def _frame_number(p: Path) -> int:
    m = _NUMBER.search(p.stem)
    if m is None:
        raise MediaError(f"frame file '{p.name}' has no frame number")
    return int(m.group(1))


def _read_frame(p: Path) -> np.ndarray:
    try:
        with Image.open(p) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (OSError, ValueError) as e:
        raise MediaError(f"cannot read frame '{p}': {e}") from e


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def load_video(path: Union[str, Path], *, fps: Optional[float] = None) -> VideoVolume:
    """Load a frame directory or a raw ``.rgb`` file with its JSON sidecar.

    Raises:
        MediaError: missing/unreadable files, inconsistent frame sizes, missing
            or inconsistent sidecar metadata.
    """
    p = Path(path)
    if p.is_dir():
        files = [f for f in p.iterdir() if f.suffix.lower() in _FRAME_SUFFIXES]
        if not files:
            raise MediaError(f"'{p}' contains no PNG/PPM frames")
        files.sort(key=_frame_number)
        with ThreadPoolExecutor(max_workers=Runtime.worker_count()) as pool:
            frames = list(pool.map(_read_frame, files))
        shapes = {f.shape for f in frames}
        if len(shapes) != 1:
            raise MediaError(f"'{p}': frames have inconsistent sizes {sorted(shapes)}")
        return VideoVolume(from_uint8(np.stack(frames)), fps=fps or 30.0, source=str(p))

    if p.suffix.lower() == ".rgb":
        meta_path = _sidecar(p)
        if not meta_path.is_file():
            raise MediaError(f"raw video '{p}' needs sidecar metadata '{meta_path}'")
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            w, h, t = int(meta["width"]), int(meta["height"]), int(meta["frames"])
            meta_fps = float(meta.get("fps", 30.0))
        except (ValueError, KeyError, TypeError) as e:
            raise MediaError(f"sidecar '{meta_path}' is missing width/height/frames: {e}") from e
        if not p.is_file():
            raise MediaError(f"raw video '{p}' does not exist")
        raw = p.read_bytes()
        if len(raw) != w * h * t * 3:
            raise MediaError(
                f"'{p}' holds {len(raw)} bytes, sidecar promises {w}x{h}x{t}x3 = {w * h * t * 3}"
            )
        arr = np.frombuffer(raw, dtype=np.uint8).reshape(t, h, w, 3)
        return VideoVolume(from_uint8(arr), fps=fps or meta_fps, source=str(p))

    if not p.exists():
        raise MediaError(f"'{p}' does not exist")
    raise MediaError(f"'{p}' is neither a frame directory nor a raw .rgb file")


def _frames_of(video: Any) -> tuple[np.ndarray, float]:
    if isinstance(video, VideoVolume):
        return video.frames, video.fps
    arr = np.asarray(video)
    if arr.ndim == 3:
        arr = arr[None]
    if arr.ndim != 4 or arr.shape[-1] != 3:
        raise MediaError(f"frames must be (T, H, W, 3), got {arr.shape}")
    return arr, 30.0


def save_video(video: Any, path: Union[str, Path], *, fps: Optional[float] = None) -> List[Path]:
    """Write frames as a numbered PNG directory, or raw RGB24 + sidecar when
    ``path`` ends in ``.rgb``. Returns the files written."""
    frames, own_fps = _frames_of(video)
    fps = fps if fps is not None else own_fps
    data = to_uint8(frames)
    p = Path(path)
    if p.suffix.lower() == ".rgb":
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(np.ascontiguousarray(data).tobytes())
        meta: Dict[str, Any] = {"width": data.shape[2], "height": data.shape[1],
                                "frames": data.shape[0], "fps": fps}
        _sidecar(p).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        return [p, _sidecar(p)]

    p.mkdir(parents=True, exist_ok=True)
    targets = [p / FRAME_PATTERN.format(k) for k in range(data.shape[0])]

    def write(k: int) -> None:
        Image.fromarray(data[k]).save(targets[k], format="PNG")

    with ThreadPoolExecutor(max_workers=Runtime.worker_count()) as pool:
        list(pool.map(write, range(data.shape[0])))
    return targets
