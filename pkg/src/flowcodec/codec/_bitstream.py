"""The ``CFV1`` container.

Little endian::

    b"CFV1" | u16 version | u16 flags | u32 meta_len | msgpack meta
    u32 record_count
    record_count × (u16 id, u8 dtype, u8 ndim, u32 dims[ndim], f32 scale,
                    u32 offset, u32 length)
    u32 coded_len | entropy-coded int8 section
    u32 raw_len   | raw float32 section
    u32 crc32 of every preceding byte

``dtype`` 0 is an int8-quantized color tensor (offset/length index the decoded
int8 section), 1 a raw float32 flow tensor (offset/length index the raw
section, in bytes). Record ids follow :meth:`FlowModel.named_tensors` order.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import msgpack
import numpy as np

from .._errors import ChecksumError, CodecError, ConfigError, TruncatedStreamError, VersionError
from ..model import FlowModel, model_from_metadata, model_metadata
from ._quantize import QuantizedTensor, dequantize, quantize
from ._range import entropy_decode, entropy_encode

MAGIC = b"CFV1"
VERSION = 1
DTYPE_INT8 = 0
DTYPE_FLOAT32 = 1

_HEADER = struct.Struct("<4sHHI")
_U32 = struct.Struct("<I")
_RECORD_HEAD = struct.Struct("<HBB")
_RECORD_TAIL = struct.Struct("<fII")


@dataclass(frozen=True)
class TensorRecord:
    id: int
    dtype: int
    shape: Tuple[int, ...]
    scale: float
    offset: int
    length: int

    def encode(self) -> bytes:
        return (_RECORD_HEAD.pack(self.id, self.dtype, len(self.shape))
                + b"".join(_U32.pack(d) for d in self.shape)
                + _RECORD_TAIL.pack(self.scale, self.offset, self.length))


@dataclass
class Bitstream:
    meta: Dict[str, Any]
    records: List[TensorRecord]
    coded: bytes          # entropy-coded int8 section
    raw: bytes            # float32 section
    flags: int = 0
    _size: Dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def to_bytes(self) -> bytes:
        meta = msgpack.packb(self.meta, use_bin_type=True)
        head = _HEADER.pack(MAGIC, VERSION, self.flags, len(meta)) + meta
        recs = _U32.pack(len(self.records)) + b"".join(r.encode() for r in self.records)
        body = (head + recs
                + _U32.pack(len(self.coded)) + self.coded
                + _U32.pack(len(self.raw)) + self.raw)
        self._size = {
            "header": _HEADER.size, "meta": len(meta), "records": len(recs),
            "color_coded": 4 + len(self.coded), "flow_raw": 4 + len(self.raw), "crc": 4,
        }
        return body + _U32.pack(zlib.crc32(body) & 0xFFFFFFFF)

    def __len__(self) -> int:
        return len(self.to_bytes())

    @classmethod
    def from_bytes(cls, buf: bytes) -> "Bitstream":
        """Parse and verify a container.

        Raises:
            VersionError: wrong magic or version.
            TruncatedStreamError: a section runs past the end of ``buf``.
            ChecksumError: trailing CRC32 mismatch.
        """
        buf = bytes(buf)
        reader = _Reader(buf)
        magic, version, flags, meta_len = reader.unpack(_HEADER, "header")
        if magic != MAGIC:
            raise VersionError(f"not a flowcodec bitstream (magic {magic!r})")
        if version != VERSION:
            raise VersionError(f"bitstream version {version} is not supported (expected {VERSION})")
        meta_blob = reader.take(meta_len, "metadata")
        (count,) = reader.unpack(_U32, "record count")
        records = []
        for _ in range(count):
            rid, dtype, ndim = reader.unpack(_RECORD_HEAD, "record")
            shape = tuple(reader.unpack(_U32, "record dims")[0] for _ in range(ndim))
            scale, offset, length = reader.unpack(_RECORD_TAIL, "record")
            records.append(TensorRecord(rid, dtype, shape, scale, offset, length))
        (coded_len,) = reader.unpack(_U32, "coded length")
        coded = reader.take(coded_len, "coded section")
        (raw_len,) = reader.unpack(_U32, "raw length")
        raw = reader.take(raw_len, "raw section")
        body_end = reader.pos
        (crc,) = reader.unpack(_U32, "checksum")
        if zlib.crc32(buf[:body_end]) & 0xFFFFFFFF != crc:
            raise ChecksumError(f"bitstream checksum mismatch (stored {crc:#010x})")
        if reader.pos != len(buf):
            raise CodecError(f"{len(buf) - reader.pos} trailing bytes after the bitstream checksum")
        return cls(meta=_decode_meta(meta_blob), records=records, coded=coded, raw=raw, flags=flags)


def _decode_meta(blob: bytes) -> Dict[str, Any]:
    # only reached once the checksum has matched
    try:
        meta = msgpack.unpackb(blob, raw=False)
    except (msgpack.ExtraData, msgpack.FormatError, msgpack.StackError,
            UnicodeDecodeError, ValueError, TypeError) as e:
        raise CodecError(f"bitstream metadata is not valid msgpack: {e}") from e
    if not isinstance(meta, dict):
        raise CodecError(f"bitstream metadata must be a map, got {type(meta).__name__}")
    return meta


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.buf):
            raise TruncatedStreamError(
                f"bitstream ends inside its {what} (need {n} bytes at {self.pos}, have {len(self.buf)})"
            )
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, st: struct.Struct, what: str) -> tuple:
        return st.unpack(self.take(st.size, what))


def pack(model: FlowModel) -> Bitstream:
    """Color tensors int8-quantized then entropy coded; flow tensors raw
    float32. Deterministic."""
    records: List[TensorRecord] = []
    int8 = bytearray()
    raw = bytearray()
    for rid, (_, t, component) in enumerate(model.named_tensors()):
        if component == "color":
            q = quantize(t)
            data = q.values.tobytes()
            records.append(TensorRecord(rid, DTYPE_INT8, t.shape, q.scale, len(int8), len(data)))
            int8 += data
        else:
            data = np.asarray(t.data, dtype="<f4").tobytes()
            records.append(TensorRecord(rid, DTYPE_FLOAT32, t.shape, 1.0, len(raw), len(data)))
            raw += data
    return Bitstream(meta=model_metadata(model), records=records,
                     coded=entropy_encode(bytes(int8)), raw=bytes(raw))


def unpack(stream: Union[Bitstream, bytes]) -> FlowModel:
    """A runnable model from a container. Color weights come back as exactly
    their dequantized values, flow weights bit-exact.

    Raises:
        CodecError: the records do not describe the model in the metadata.
    """
    bs = stream if isinstance(stream, Bitstream) else Bitstream.from_bytes(stream)
    model = model_from_metadata(bs.meta)
    tensors = list(model.named_tensors())
    if len(bs.records) != len(tensors):
        raise CodecError(f"bitstream has {len(bs.records)} tensor records, model needs {len(tensors)}")
    int8 = entropy_decode(bs.coded)
    for rec, (name, t, component) in zip(bs.records, tensors):
        if tuple(rec.shape) != t.shape:
            raise CodecError(f"record {rec.id} ({name}) has shape {rec.shape}, expected {t.shape}")
        want = DTYPE_INT8 if component == "color" else DTYPE_FLOAT32
        if rec.dtype != want:
            raise CodecError(f"record {rec.id} ({name}) has dtype {rec.dtype}, expected {want}")
        section = int8 if rec.dtype == DTYPE_INT8 else bs.raw
        if rec.offset + rec.length > len(section):
            raise TruncatedStreamError(f"record {rec.id} ({name}) points past the end of its section")
        chunk = section[rec.offset:rec.offset + rec.length]
        if rec.dtype == DTYPE_INT8:
            values = np.frombuffer(chunk, dtype=np.int8).reshape(t.shape)
            t.data[...] = dequantize(QuantizedTensor(values, rec.scale))
        else:
            t.data[...] = np.frombuffer(chunk, dtype="<f4").reshape(t.shape)
    return model


def write_bitstream(stream: Bitstream, path: Union[str, Path]) -> int:
    """Write a ``.cfv`` file; returns its size in bytes."""
    data = stream.to_bytes()
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(data)
    return len(data)


def read_bitstream(path: Union[str, Path]) -> Bitstream:
    try:
        buf = Path(path).read_bytes()
    except OSError as e:
        raise CodecError(f"cannot read bitstream '{path}': {e}") from e
    return Bitstream.from_bytes(buf)


def bpp(stream: Union[Bitstream, bytes, int], width: int, height: int, frames: int) -> float:
    """``8 · file bytes / (W · H · T)``."""
    if width < 1 or height < 1 or frames < 1:
        raise ConfigError(f"bpp needs positive dims, got {width}x{height}x{frames}")
    if isinstance(stream, int):
        nbytes = stream
    elif isinstance(stream, Bitstream):
        nbytes = len(stream.to_bytes())
    else:
        nbytes = len(stream)
    return 8.0 * nbytes / (width * height * frames)


def size_report(stream: Bitstream) -> Dict[str, int]:
    """Byte count per container section, plus the int8 payload before
    entropy coding and the total."""
    total = len(stream.to_bytes())
    report = dict(stream._size)
    report["color_int8"] = sum(r.length for r in stream.records if r.dtype == DTYPE_INT8)
    report["total"] = total
    return report
