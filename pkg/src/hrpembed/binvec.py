"""Bit packing and Hamming kernels.

Bit ``j`` of a vector lives in byte ``j // 8`` at position ``j % 8``
(LSB-first).  Padding bits past the vector width are always zero.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ShapeError


def n_bytes(d_t):
    return (int(d_t) + 7) // 8


def padding_mask(d_t):
    """Mask of the valid bits in the final byte of a ``d_t``-bit code."""
    rem = d_t % 8
    return 0xFF if rem == 0 else (1 << rem) - 1


def pack_bits(bits):
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ShapeError(f"expected a 1-D bit sequence, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise InvalidArgumentError("bit sequence may only contain 0 and 1")
    return np.packbits(arr.astype(np.uint8), bitorder="little").tobytes()


def unpack_bits(data, d_t):
    if d_t < 1:
        raise InvalidArgumentError(f"bit width must be positive, got {d_t}")
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    if buf.size != n_bytes(d_t):
        raise ShapeError(f"{buf.size} bytes cannot hold exactly {d_t} bits")
    return np.unpackbits(buf, count=d_t, bitorder="little")


def pack_rows(bit_matrix):
    """Pack a (n, d_t) 0/1 matrix into (n, ceil(d_t/8)) uint8 rows."""
    return np.packbits(np.asarray(bit_matrix, dtype=np.uint8), axis=1, bitorder="little")


def unpack_rows(codes, d_t):
    return np.unpackbits(np.asarray(codes, dtype=np.uint8), axis=1, count=d_t, bitorder="little")


def check_padding(codes, d_t):
    """Index of the first row with a nonzero padding bit, or -1."""
    codes = np.asarray(codes, dtype=np.uint8).reshape(-1, n_bytes(d_t))
    mask = padding_mask(d_t)
    if mask == 0xFF or codes.shape[0] == 0:
        return -1
    bad = np.flatnonzero(codes[:, -1] & ~np.uint8(mask))
    return int(bad[0]) if bad.size else -1


@dataclass(frozen=True)
class BinaryEmbedding:
    """A packed ``d_t``-bit code."""

    bits: bytes
    d_t: int

    def __post_init__(self):
        if self.d_t < 1:
            raise InvalidArgumentError(f"bit width must be positive, got {self.d_t}")
        object.__setattr__(self, "bits", bytes(self.bits))
        if len(self.bits) != n_bytes(self.d_t):
            raise ShapeError(f"{len(self.bits)} bytes cannot hold exactly {self.d_t} bits")
        if self.bits and self.bits[-1] & ~padding_mask(self.d_t) & 0xFF:
            raise InvalidArgumentError("padding bits beyond the vector width must be zero")

    @classmethod
    def from_bits(cls, bits):
        bits = np.asarray(bits)
        return cls(pack_bits(bits), int(bits.size))

    def to_bits(self):
        return unpack_bits(self.bits, self.d_t)

    def as_array(self):
        return np.frombuffer(self.bits, dtype=np.uint8)

    def __invert__(self):
        flipped = ~self.as_array()
        flipped[-1] &= padding_mask(self.d_t)
        return BinaryEmbedding(flipped.tobytes(), self.d_t)

    def __len__(self):
        return self.d_t


def _as_words(buf):
    """View a uint8 buffer (last axis) as uint64 words, zero-extending if needed."""
    buf = np.ascontiguousarray(buf, dtype=np.uint8)
    extra = -buf.shape[-1] % 8
    if extra:
        pad = [(0, 0)] * (buf.ndim - 1) + [(0, extra)]
        buf = np.pad(buf, pad)
    return buf.view(np.uint64)


def hamming(a, b):
    if a.d_t != b.d_t:
        raise ShapeError(f"width mismatch: {a.d_t} vs {b.d_t} bits")
    x = _as_words(a.as_array()) ^ _as_words(b.as_array())
    return int(np.bitwise_count(x).sum())


def hamming_many(codes, query):
    """Hamming distance from every row of ``codes`` to one packed ``query`` row."""
    codes = np.asarray(codes, dtype=np.uint8)
    query = np.asarray(query, dtype=np.uint8)
    if codes.ndim != 2 or query.shape != (codes.shape[1],):
        raise ShapeError(f"query of shape {query.shape} does not match codes of shape {codes.shape}")
    x = _as_words(codes) ^ _as_words(query)
    return np.bitwise_count(x).sum(axis=1, dtype=np.int64)


def hamming_rows(a, b):
    """Row-wise Hamming distance between two equally shaped packed matrices."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.bitwise_count(_as_words(a) ^ _as_words(b)).sum(axis=-1, dtype=np.int64)
