"""On-disk formats.

fvecs
    Repeated records of ``<u32 d><d x f32>``, little-endian, one shared ``d``.

HRPB
    A 31-byte little-endian header followed by ``count`` packed codes of
    ``ceil(d_t/8)`` bytes each (LSB-first bit order)::

        magic    4s   b"HRPB"
        version  u16  1
        method   u8   0 = hrp, 1 = sigmoid
        d_s      u32
        d_t      u32
        seed     u64
        count    u64

    External ids are not persisted; a store read back has ids ``0..count-1``.
"""

import os
import struct
from pathlib import Path

import numpy as np

from .binvec import check_padding, n_bytes
from .errors import CorruptionError, ParseError, UnsupportedFormatError
from .projection import CompressionConfig, Method, as_embedding_matrix
from .retrieval import BinaryStore

HRPB_MAGIC = b"HRPB"
HRPB_VERSION = 1
HRPB_HEADER = struct.Struct("<4sHBIIQQ")
HEADER_SIZE = HRPB_HEADER.size  # 31


def read_fvecs(path):
    """Decode an fvecs file into an (n, d) float32 array."""
    raw = Path(path).read_bytes()
    if not raw:
        return np.empty((0, 0), dtype=np.float32)
    if len(raw) < 4:
        raise ParseError(f"{path}: truncated dimension prefix", offset=0)
    d = struct.unpack_from("<I", raw, 0)[0]
    if d == 0:
        raise ParseError(f"{path}: record dimension is zero", offset=0)
    rec = 4 * (d + 1)
    n_full = len(raw) // rec
    body = np.frombuffer(raw, dtype="<u4", count=n_full * (d + 1)).reshape(n_full, d + 1)
    bad = np.flatnonzero(body[:, 0] != d)
    if bad.size:
        i = int(bad[0])
        raise ParseError(f"{path}: record {i} has dimension {body[i, 0]}, expected {d}", offset=i * rec)
    if len(raw) % rec:
        raise ParseError(f"{path}: truncated record {n_full}", offset=n_full * rec)
    return body[:, 1:].view("<f4").astype(np.float32)


def write_fvecs(path, xs):
    X = as_embedding_matrix(xs)
    n, d = X.shape
    out = np.empty((n, d + 1), dtype="<u4")
    out[:, 0] = d
    out[:, 1:] = X.astype("<f4").view("<u4")
    data = out.tobytes()
    try:
        Path(path).write_bytes(data)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror}") from e
    return len(data)


def read_text_vectors(path):
    """One vector per line, whitespace- or comma-separated decimals."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.replace(",", " ").split()])
        except ValueError as e:
            raise ParseError(f"{path}:{lineno}: {e}") from None
    if not rows:
        return np.empty((0, 0), dtype=np.float32)
    d = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != d:
            raise ParseError(f"{path}: vector {i} has {len(r)} values, expected {d}")
    return np.asarray(rows, dtype=np.float32)


def read_embeddings(path):
    """Read fvecs, or the text format when the suffix is .txt/.csv/.tsv."""
    if Path(path).suffix.lower() in (".txt", ".csv", ".tsv"):
        return read_text_vectors(path)
    return read_fvecs(path)


def encode_hrpb(store):
    cfg = store.config
    header = HRPB_HEADER.pack(HRPB_MAGIC, HRPB_VERSION, cfg.method.code, cfg.d_s, cfg.d_t, cfg.seed, store.count)
    return header + store.codes.tobytes()


def decode_hrpb(data, source="<bytes>"):
    if len(data) < HEADER_SIZE:
        raise UnsupportedFormatError(f"{source}: too short for an HRPB header")
    magic, version, method, d_s, d_t, seed, count = HRPB_HEADER.unpack_from(data, 0)
    if magic != HRPB_MAGIC:
        raise UnsupportedFormatError(f"{source}: bad magic {magic!r}")
    if version != HRPB_VERSION:
        raise UnsupportedFormatError(f"{source}: unsupported HRPB version {version}")
    if method not in (0, 1):
        raise UnsupportedFormatError(f"{source}: unknown method code {method}")
    try:
        cfg = CompressionConfig(Method.from_code(method), d_s, d_t, seed)
    except ValueError as e:
        raise CorruptionError(f"{source}: invalid header: {e}") from None
    width = n_bytes(d_t)
    expected = HEADER_SIZE + count * width
    if len(data) != expected:
        raise CorruptionError(f"{source}: size {len(data)} does not match header (expected {expected})")
    codes = np.frombuffer(data, dtype=np.uint8, offset=HEADER_SIZE).reshape(count, width)
    bad = check_padding(codes, d_t)
    if bad >= 0:
        raise CorruptionError(f"{source}: code {bad} has nonzero padding bits")
    return BinaryStore(codes.copy(), cfg)


def write_hrpb(path, store):
    data = encode_hrpb(store)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror}") from e
    return len(data)


def read_hrpb(path):
    return decode_hrpb(Path(path).read_bytes(), source=str(path))


def read_hrpb_header(path):
    with open(path, "rb") as f:
        head = f.read(HEADER_SIZE)
    if len(head) < HEADER_SIZE:
        raise UnsupportedFormatError(f"{path}: too short for an HRPB header")
    magic, version, method, d_s, d_t, seed, count = HRPB_HEADER.unpack(head)
    if magic != HRPB_MAGIC:
        raise UnsupportedFormatError(f"{path}: bad magic {magic!r}")
    if version != HRPB_VERSION:
        raise UnsupportedFormatError(f"{path}: unsupported HRPB version {version}")
    if method not in (0, 1):
        raise UnsupportedFormatError(f"{path}: unknown method code {method}")
    return {"version": version, "method": Method.from_code(method).value, "d_s": d_s,
            "d_t": d_t, "seed": seed, "count": count}

