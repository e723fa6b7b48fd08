"""Raw model files (``.cfm``).

Layout, little endian::

    b"CFM1" | u16 version | u32 meta_len | msgpack meta | float32 blobs

``meta`` holds the ModelSpec, the video dims and fps, and the shape of every
tensor. Blobs follow :meth:`FlowModel.named_tensors` order: per layer, flow
linears then color linears, weight ``(in, out)`` before bias ``(out,)``.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Any, Dict, Union

import msgpack
import numpy as np

from .._errors import CodecError, TruncatedStreamError, VersionError
from ._layer import FlowModel
from ._presets import ModelSpec, build_model

MODEL_MAGIC = b"CFM1"
MODEL_VERSION = 1
_HEADER = struct.Struct("<4sHI")


def model_metadata(model: FlowModel) -> Dict[str, Any]:
    return {
        "spec": model.spec.to_dict(),
        "width": model.width,
        "height": model.height,
        "frames": model.frames,
        "fps": model.fps,
    }


def model_from_metadata(meta: Dict[str, Any]) -> FlowModel:
    """An architecture-correct model (weights still at init) for ``meta``.

    Raises:
        CodecError: ``meta`` lacks a field or has one of the wrong type.
    """
    try:
        spec = ModelSpec.from_dict(meta["spec"])
        return build_model(spec, width=meta["width"], height=meta["height"],
                           frames=meta["frames"], fps=meta["fps"])
    except (KeyError, TypeError) as e:
        raise CodecError(f"model metadata is incomplete or malformed: {e!r}") from e


def model_to_bytes(model: FlowModel) -> bytes:
    meta = model_metadata(model)
    meta["shapes"] = [list(t.shape) for _, t, _ in model.named_tensors()]
    packed = msgpack.packb(meta, use_bin_type=True)
    blobs = b"".join(t.data.astype("<f4").tobytes() for _, t, _ in model.named_tensors())
    return _HEADER.pack(MODEL_MAGIC, MODEL_VERSION, len(packed)) + packed + blobs


def model_from_bytes(buf: bytes) -> FlowModel:
    """Inverse of :func:`model_to_bytes`.

    Raises:
        VersionError: wrong magic or unsupported version.
        TruncatedStreamError: fewer weight bytes than the header describes.
    """
    if len(buf) < _HEADER.size:
        raise TruncatedStreamError(f"model file is {len(buf)} bytes, shorter than its header")
    magic, version, meta_len = _HEADER.unpack_from(buf, 0)
    if magic != MODEL_MAGIC:
        raise VersionError(f"not a flowcodec model file (magic {magic!r})")
    if version != MODEL_VERSION:
        raise VersionError(f"model file version {version} is not supported (expected {MODEL_VERSION})")
    off = _HEADER.size
    if len(buf) < off + meta_len:
        raise TruncatedStreamError("model file ends inside its metadata")
    try:
        meta = msgpack.unpackb(buf[off:off + meta_len], raw=False)
    except (msgpack.ExtraData, msgpack.FormatError, msgpack.StackError,
            UnicodeDecodeError, ValueError, TypeError) as e:
        raise CodecError(f"model file metadata is not valid msgpack: {e}") from e
    if not isinstance(meta, dict) or "shapes" not in meta:
        raise CodecError("model file metadata is not a map with tensor shapes")
    off += meta_len

    model = model_from_metadata(meta)
    tensors = list(model.named_tensors())
    if [list(t.shape) for _, t, _ in tensors] != meta["shapes"]:
        raise VersionError("model file tensor shapes disagree with its architecture")
    for _, t, _ in tensors:
        nbytes = t.size * 4
        if len(buf) < off + nbytes:
            raise TruncatedStreamError("model file ends inside its weights")
        t.data[...] = np.frombuffer(buf, dtype="<f4", count=t.size, offset=off).reshape(t.shape)
        off += nbytes
    return model


def save_model(model: FlowModel, path: Union[str, Path]) -> int:
    """Write a ``.cfm`` file; returns its size in bytes."""
    data = model_to_bytes(model)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(data)
    return len(data)


def load_model(path: Union[str, Path]) -> FlowModel:
    return model_from_bytes(Path(path).read_bytes())
