"""Tests for flowcodec.codec: int8 quantization, the range coder and the CFV1 container."""

import struct
import zlib

import numpy as np
import pytest

from flowcodec import (
    ChecksumError,
    CodecError,
    ConfigError,
    NumericError,
    TruncatedStreamError,
    VersionError,
)
from flowcodec.codec import (
    DTYPE_FLOAT32,
    DTYPE_INT8,
    MAGIC,
    QMAX,
    AdaptiveModel,
    Bitstream,
    bpp,
    dequantize,
    entropy_decode,
    entropy_encode,
    pack,
    quantize,
    quantize_model,
    read_bitstream,
    size_report,
    unpack,
    write_bitstream,
)


# ─── quantization ────────────────────────────────────────────────────


def test_quantize_unit_values():
    q = quantize(np.array([-1.0, 0.0, 1.0], dtype=np.float32))
    assert q.values.tolist() == [-QMAX, 0, QMAX]
    assert q.values.dtype == np.int8
    assert q.scale == pytest.approx(1 / 127)


def test_quantize_all_zero_tensor():
    q = quantize(np.zeros((3, 4), dtype=np.float32))
    assert q.scale == 1.0
    assert not q.values.any()
    assert np.array_equal(dequantize(q), np.zeros((3, 4), dtype=np.float32))


def test_quantization_error_is_half_a_step():
    w = np.random.default_rng(0).normal(0.0, 0.3, size=(64, 32)).astype(np.float32)
    q = quantize(w)
    err = np.abs(dequantize(q).astype(np.float64) - w)
    assert err.max() <= q.scale / 2 + 1e-6
    assert np.abs(q.values).max() == QMAX


def test_quantize_rejects_non_finite():
    with pytest.raises(NumericError):
        quantize(np.array([1.0, np.inf], dtype=np.float32))


def test_quantize_model_touches_only_color(tiny_model):
    q = quantize_model(tiny_model)
    for (_, a, kind), (_, b, _) in zip(tiny_model.named_tensors(), q.named_tensors()):
        if kind == "flow":
            assert np.array_equal(a.data, b.data)
        else:
            assert np.array_equal(b.data, dequantize(quantize(a)))


# ─── range coder ─────────────────────────────────────────────────────


def test_random_round_trips():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        n = int(rng.integers(0, 64))
        alphabet = int(rng.integers(1, 257))
        data = rng.integers(0, alphabet, size=n, dtype=np.int64).astype(np.uint8).tobytes()
        assert entropy_decode(entropy_encode(data)) == data


def test_long_round_trip():
    data = np.random.default_rng(2).integers(0, 256, size=20_000).astype(np.uint8).tobytes()
    assert entropy_decode(entropy_encode(data)) == data


def test_empty_stream():
    coded = entropy_encode(b"")
    assert len(coded) == 8
    assert entropy_decode(coded) == b""


def test_repeated_byte_compresses_hard():
    data = b"\x07" * 10_000
    coded = entropy_encode(data)
    assert len(coded) < 0.05 * len(data)
    assert entropy_decode(coded) == data


def test_skewed_source_beats_raw_bytes():
    rng = np.random.default_rng(3)
    data = rng.choice(4, size=5000, p=[0.7, 0.1, 0.1, 0.1]).astype(np.uint8).tobytes()
    assert len(entropy_encode(data)) < len(data) // 2


def test_corrupt_checksum_detected():
    coded = bytearray(entropy_encode(b"hello, range coder"))
    coded[4] ^= 0xFF
    with pytest.raises(ChecksumError):
        entropy_decode(bytes(coded))


def test_corrupt_payload_detected():
    coded = bytearray(entropy_encode(bytes(range(200))))
    coded[10] ^= 0x55
    with pytest.raises(ChecksumError):
        entropy_decode(bytes(coded))


def test_truncated_stream_detected():
    coded = entropy_encode(b"some bytes")
    with pytest.raises(TruncatedStreamError):
        entropy_decode(coded[:5])
    with pytest.raises(TruncatedStreamError, match="no payload"):
        entropy_decode(coded[:8])


def test_adaptive_model_find_inverts_cumulative():
    model = AdaptiveModel()
    for sym in [3, 3, 200, 0, 255, 3]:
        model.update(sym)
    for sym in [0, 3, 4, 200, 255]:
        lo = model.cumulative(sym)
        assert model.find(lo) == sym
        assert model.find(lo + model.freq[sym] - 1) == sym
    assert model.cumulative(256) == model.total


def test_adaptive_model_rescales_below_limit():
    model = AdaptiveModel()
    for _ in range(5000):
        model.update(9)
    assert model.total <= model.limit
    assert min(model.freq) >= 1


# ─── container ───────────────────────────────────────────────────────


def test_pack_is_deterministic(tiny_model):
    assert pack(tiny_model).to_bytes() == pack(tiny_model).to_bytes()


def test_records_follow_component_dtypes(tiny_model):
    bs = pack(tiny_model)
    kinds = [kind for _, _, kind in tiny_model.named_tensors()]
    assert [r.dtype for r in bs.records] == [
        DTYPE_INT8 if k == "color" else DTYPE_FLOAT32 for k in kinds]
    assert [r.id for r in bs.records] == list(range(len(kinds)))


def test_unpack_restores_quantized_model(tiny_model):
    decoded = unpack(pack(tiny_model).to_bytes())
    expected = quantize_model(tiny_model)
    assert decoded.spec == tiny_model.spec
    assert (decoded.width, decoded.height, decoded.frames) == (16, 12, 4)
    for (_, a, kind), (_, b, _), (_, orig, _) in zip(
            decoded.named_tensors(), expected.named_tensors(), tiny_model.named_tensors()):
        assert np.array_equal(a.data, b.data)
        if kind == "flow":
            assert np.array_equal(a.data, orig.data)


def test_header_layout(tiny_model):
    buf = pack(tiny_model).to_bytes()
    magic, version, flags, meta_len = struct.unpack_from("<4sHHI", buf)
    assert (magic, version, flags) == (MAGIC, 1, 0)
    assert meta_len > 0


def test_container_round_trip(tiny_model):
    bs = pack(tiny_model)
    again = Bitstream.from_bytes(bs.to_bytes())
    assert again == bs


def test_bad_magic(tiny_model):
    buf = b"XXXX" + pack(tiny_model).to_bytes()[4:]
    with pytest.raises(VersionError, match="magic"):
        Bitstream.from_bytes(buf)


def test_unsupported_version(tiny_model):
    buf = bytearray(pack(tiny_model).to_bytes())
    struct.pack_into("<H", buf, 4, 2)
    with pytest.raises(VersionError, match="version 2"):
        Bitstream.from_bytes(bytes(buf))


def test_flipped_byte_fails_the_checksum(tiny_model):
    buf = bytearray(pack(tiny_model).to_bytes())
    buf[-5] ^= 0x01
    with pytest.raises(ChecksumError):
        Bitstream.from_bytes(bytes(buf))


def test_corrupt_metadata_fails_the_checksum(tiny_model):
    """Damage inside the msgpack metadata is caught by the CRC before decoding."""
    buf = bytearray(pack(tiny_model).to_bytes())
    for pos in (12, 13, 20):
        bad = bytearray(buf)
        bad[pos] = 0xC1
        with pytest.raises(ChecksumError):
            Bitstream.from_bytes(bytes(bad))


def test_undecodable_metadata_with_valid_checksum(tiny_model):
    buf = bytearray(pack(tiny_model).to_bytes())
    buf[12] = 0xC1
    struct.pack_into("<I", buf, len(buf) - 4, zlib.crc32(bytes(buf[:-4])) & 0xFFFFFFFF)
    with pytest.raises(CodecError, match="msgpack"):
        Bitstream.from_bytes(bytes(buf))


def test_truncated_container(tiny_model):
    buf = pack(tiny_model).to_bytes()
    with pytest.raises(TruncatedStreamError):
        Bitstream.from_bytes(buf[:-1])
    with pytest.raises(TruncatedStreamError):
        Bitstream.from_bytes(buf[:6])


def test_trailing_bytes_rejected(tiny_model):
    with pytest.raises(CodecError, match="trailing"):
        Bitstream.from_bytes(pack(tiny_model).to_bytes() + b"\x00")


def test_file_round_trip(tmp_path, tiny_model):
    bs = pack(tiny_model)
    size = write_bitstream(bs, tmp_path / "out" / "clip.cfv")
    assert size == (tmp_path / "out" / "clip.cfv").stat().st_size == len(bs)
    assert read_bitstream(tmp_path / "out" / "clip.cfv") == bs


def test_missing_file():
    with pytest.raises(CodecError, match="cannot read"):
        read_bitstream("/nonexistent/clip.cfv")


def test_size_report_adds_up(tiny_model):
    report = size_report(pack(tiny_model))
    sections = ["header", "meta", "records", "color_coded", "flow_raw", "crc"]
    assert sum(report[k] for k in sections) == report["total"]
    color = sum(t.data.size for _, t, kind in tiny_model.named_tensors() if kind == "color")
    assert report["color_int8"] == color
    flow = sum(t.data.size for _, t, kind in tiny_model.named_tensors() if kind == "flow")
    assert report["flow_raw"] == 4 + 4 * flow


# ─── bits per pixel ──────────────────────────────────────────────────


def test_bpp_examples():
    assert bpp(1000, 100, 100, 10) == pytest.approx(0.08)
    assert bpp(b"\x00" * 12, 2, 2, 3) == pytest.approx(8.0)


def test_bpp_of_a_bitstream(tiny_model):
    bs = pack(tiny_model)
    assert bpp(bs, 16, 12, 4) == pytest.approx(8 * len(bs) / (16 * 12 * 4))


def test_bpp_rejects_empty_video():
    with pytest.raises(ConfigError):
        bpp(100, 0, 10, 10)
