"""Order-0 adaptive range coder (carryless, 32-bit).

Stream layout::

    u32 length | u32 crc32(original bytes) | coder bytes

Symbols are bytes. Every symbol starts with frequency 1; each coded symbol
adds ``INCREMENT`` and the table is halved before the total would exceed
``BOT`` so that ``range // total`` never reaches zero.
"""

from __future__ import annotations

import struct
import zlib
from typing import List

from .._errors import ChecksumError, TruncatedStreamError

TOP = 1 << 24
BOT = 1 << 16
MASK = 0xFFFFFFFF
INCREMENT = 24
SYMBOLS = 256

_STREAM_HEADER = struct.Struct("<II")


class AdaptiveModel:
    """Byte frequencies in a Fenwick tree: cumulative lookups and symbol
    search in ``O(log n)``."""

    def __init__(self, symbols: int = SYMBOLS, increment: int = INCREMENT, limit: int = BOT):
        self.symbols = symbols
        self.increment = increment
        self.limit = limit
        self.freq = [1] * symbols
        self.total = symbols
        self._tree: List[int] = []
        self._rebuild()

    def _rebuild(self) -> None:
        n = self.symbols
        tree = [0] * (n + 1)
        for i, f in enumerate(self.freq, 1):
            tree[i] += f
            j = i + (i & -i)
            if j <= n:
                tree[j] += tree[i]
        self._tree = tree
        self.total = sum(self.freq)

    def cumulative(self, sym: int) -> int:
        """Sum of frequencies of symbols ``< sym``."""
        s, i = 0, sym
        tree = self._tree
        while i > 0:
            s += tree[i]
            i -= i & -i
        return s

    def find(self, target: int) -> int:
        """The symbol whose interval ``[cum, cum + freq)`` contains ``target``."""
        pos, rem = 0, target
        tree = self._tree
        step = 1 << (self.symbols.bit_length() - 1)
        while step:
            nxt = pos + step
            if nxt <= self.symbols and tree[nxt] <= rem:
                pos = nxt
                rem -= tree[nxt]
            step >>= 1
        return pos

    def update(self, sym: int) -> None:
        if self.total + self.increment > self.limit:
            self.freq = [(f + 1) >> 1 for f in self.freq]
            self._rebuild()
        self.freq[sym] += self.increment
        self.total += self.increment
        i, tree = sym + 1, self._tree
        while i <= self.symbols:
            tree[i] += self.increment
            i += i & -i


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = MASK
        self.out = bytearray()

    def encode(self, cum: int, freq: int, total: int) -> None:
        self.range //= total
        self.low = (self.low + cum * self.range) & MASK
        self.range *= freq
        self._normalize()

    def _normalize(self) -> None:
        while True:
            if (self.low ^ (self.low + self.range)) < TOP:
                pass
            elif self.range < BOT:
                self.range = -self.low & (BOT - 1)
            else:
                break
            self.out.append(self.low >> 24)
            self.range = (self.range << 8) & MASK
            self.low = (self.low << 8) & MASK

    def finish(self) -> bytes:
        for _ in range(4):
            self.out.append(self.low >> 24)
            self.low = (self.low << 8) & MASK
        return bytes(self.out)


class RangeDecoder:
    """Reads past the end as zero bytes; a corrupt stream is caught by the
    caller's checksum."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.low = 0
        self.range = MASK
        self.code = 0
        for _ in range(4):
            self.code = (self.code << 8) | self._byte()

    def _byte(self) -> int:
        if self.pos < len(self.data):
            b = self.data[self.pos]
        else:
            b = 0
        self.pos += 1
        return b

    def target(self, total: int) -> int:
        self.range //= total
        return ((self.code - self.low) & MASK) // self.range

    def consume(self, cum: int, freq: int) -> None:
        self.low = (self.low + cum * self.range) & MASK
        self.range *= freq
        while True:
            if (self.low ^ (self.low + self.range)) < TOP:
                pass
            elif self.range < BOT:
                self.range = -self.low & (BOT - 1)
            else:
                break
            self.code = ((self.code << 8) | self._byte()) & MASK
            self.range = (self.range << 8) & MASK
            self.low = (self.low << 8) & MASK


def entropy_encode(data: bytes) -> bytes:
    """Lossless. Empty input gives the bare 8-byte header."""
    data = bytes(data)
    header = _STREAM_HEADER.pack(len(data), zlib.crc32(data) & MASK)
    if not data:
        return header
    model = AdaptiveModel()
    enc = RangeEncoder()
    for sym in data:
        enc.encode(model.cumulative(sym), model.freq[sym], model.total)
        model.update(sym)
    return header + enc.finish()


def entropy_decode(coded: bytes) -> bytes:
    """Inverse of :func:`entropy_encode`.

    Raises:
        TruncatedStreamError: shorter than the 8-byte header.
        ChecksumError: the decoded bytes do not match the stored CRC32.
    """
    coded = bytes(coded)
    if len(coded) < _STREAM_HEADER.size:
        raise TruncatedStreamError(f"entropy stream is {len(coded)} bytes, shorter than its header")
    length, crc = _STREAM_HEADER.unpack_from(coded, 0)
    body = coded[_STREAM_HEADER.size:]
    if length and not body:
        raise TruncatedStreamError(f"entropy stream promises {length} bytes but has no payload")
    out = bytearray()
    if length:
        model = AdaptiveModel()
        dec = RangeDecoder(body)
        for _ in range(length):
            target = dec.target(model.total)
            if target >= model.total:
                raise ChecksumError("entropy stream is corrupt (symbol outside the model)")
            sym = model.find(target)
            dec.consume(model.cumulative(sym), model.freq[sym])
            model.update(sym)
            out.append(sym)
    if zlib.crc32(out) & MASK != crc:
        raise ChecksumError(f"entropy stream checksum mismatch (stored {crc:#010x})")
    return bytes(out)
