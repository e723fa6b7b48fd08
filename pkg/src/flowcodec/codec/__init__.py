"""Post-training compression: int8 color weights, range coding, the CFV1 container."""

from ._bitstream import (
    DTYPE_FLOAT32,
    DTYPE_INT8,
    MAGIC,
    VERSION,
    Bitstream,
    TensorRecord,
    bpp,
    pack,
    read_bitstream,
    size_report,
    unpack,
    write_bitstream,
)
from ._quantize import QMAX, QuantizedTensor, dequantize, quantize, quantize_model
from ._range import AdaptiveModel, RangeDecoder, RangeEncoder, entropy_decode, entropy_encode

__all__ = [
    "QuantizedTensor", "quantize", "dequantize", "quantize_model", "QMAX",
    "entropy_encode", "entropy_decode", "AdaptiveModel", "RangeEncoder", "RangeDecoder",
    "Bitstream", "TensorRecord", "pack", "unpack", "write_bitstream", "read_bitstream",
    "bpp", "size_report", "MAGIC", "VERSION", "DTYPE_INT8", "DTYPE_FLOAT32",
]
