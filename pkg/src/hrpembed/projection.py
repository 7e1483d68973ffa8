"""Random hyperplane projection and Heaviside quantization."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import rng
from .binvec import BinaryEmbedding, pack_rows
from .errors import InvalidArgumentError, ShapeError


class Method(str, Enum):
    HRP = "hrp"
    SIGMOID = "sigmoid"

    @property
    def code(self):
        return 0 if self is Method.HRP else 1

    @classmethod
    def from_code(cls, code):
        return {0: cls.HRP, 1: cls.SIGMOID}[code]


def as_embedding(x, dim=None):
    """Validate a single float embedding and return it as float32."""
    arr = np.asarray(x, dtype=np.float32)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError(f"embedding must be a non-empty 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise ShapeError(f"embedding has dimension {arr.size}, expected {dim}")
    if not np.isfinite(arr).all():
        raise InvalidArgumentError("embedding contains NaN or Inf")
    return arr


def as_embedding_matrix(xs, dim=None):
    """Stack a batch of embeddings into an (n, d) float32 matrix.

    Rows of differing dimension raise a ShapeError naming the first offender.
    """
    if isinstance(xs, np.ndarray) and xs.ndim == 2:
        mat = xs.astype(np.float32, copy=False)
        if dim is not None and mat.shape[1] != dim and mat.shape[0]:
            raise ShapeError(f"embedding 0 has dimension {mat.shape[1]}, expected {dim}")
    else:
        rows = [np.asarray(x, dtype=np.float32) for x in xs]
        if not rows:
            return np.empty((0, dim or 0), dtype=np.float32)
        expected = dim if dim is not None else rows[0].size
        for i, r in enumerate(rows):
            if r.ndim != 1 or r.size != expected:
                raise ShapeError(f"embedding {i} has dimension {r.size}, expected {expected}")
        mat = np.stack(rows)
    bad = np.flatnonzero(~np.isfinite(mat).all(axis=1))
    if bad.size:
        raise InvalidArgumentError(f"embedding {bad[0]} contains NaN or Inf")
    return mat


@dataclass(frozen=True)
class CompressionConfig:
    method: Method
    d_s: int
    d_t: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.d_s < 1 or self.d_t < 1:
            raise InvalidArgumentError(f"dimensions must be positive, got d_s={self.d_s} d_t={self.d_t}")
        rng._check_seed(self.seed)
        if self.method is Method.SIGMOID and self.d_t != self.d_s:
            raise InvalidArgumentError("sigmoid quantization keeps the source dimension (d_t must equal d_s)")

    @classmethod
    def hrp(cls, d_s, d_t, seed=0):
        return cls(Method.HRP, d_s, d_t, seed)

    @classmethod
    def sigmoid(cls, d_s):
        return cls(Method.SIGMOID, d_s, d_s, 0)


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """A d_s x d_t float32 matrix of N(0, 1) draws."""

    entries: np.ndarray
    seed: int | None = None

    @property
    def d_s(self):
        return self.entries.shape[0]

    @property
    def d_t(self):
        return self.entries.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ProjectionMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and self.entries.tobytes() == other.entries.tobytes()

    @classmethod
    def from_array(cls, entries, seed=None):
        arr = np.array(entries, dtype=np.float32, ndmin=2)
        if arr.ndim != 2:
            raise ShapeError(f"projection must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        return cls(arr, seed)


def init_projection(seed, d_s, d_t):
    if d_s < 1 or d_t < 1:
        raise InvalidArgumentError(f"dimensions must be positive, got d_s={d_s} d_t={d_t}")
    entries = rng.standard_normals(seed, d_s * d_t).astype(np.float32).reshape(d_s, d_t)
    entries.setflags(write=False)
    return ProjectionMatrix(entries, int(seed))


def heaviside(z):
    z = float(z)
    if math.isnan(z):
        raise InvalidArgumentError("heaviside is undefined for NaN")
    return 1 if z >= 0.0 else 0


def project(x, W):
    x = as_embedding(x)
    if x.size != W.d_s:
        raise ShapeError(f"embedding dimension {x.size} does not match projection rows {W.d_s}")
    return x.astype(np.float64) @ W.entries.astype(np.float64)


def project_matrix(X, W):
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != W.d_s:
        raise ShapeError(f"embeddings of shape {X.shape} do not match projection rows {W.d_s}")
    return X.astype(np.float64) @ W.entries.astype(np.float64)


def hrp_quantize(x, W):
    z = project(x, W)
    return BinaryEmbedding(pack_rows((z >= 0.0)[None, :])[0].tobytes(), W.d_t)


def sigmoid_quantize(x):
    # sigmoid(z) >= 0.5 exactly when z >= 0, so no exponential is evaluated
    x = as_embedding(x)
    return BinaryEmbedding(pack_rows((x >= 0.0)[None, :])[0].tobytes(), x.size)


def quantize_matrix(X, cfg, W=None):
    """Quantize an (n, d_s) matrix into (n, ceil(d_t/8)) packed uint8 rows."""
    X = as_embedding_matrix(X, cfg.d_s)
    if cfg.method is Method.SIGMOID:
        return pack_rows(X >= 0.0) if X.shape[0] else np.empty((0, (cfg.d_t + 7) // 8), np.uint8)
    if W is None:
        W = init_projection(cfg.seed, cfg.d_s, cfg.d_t)
    if X.shape[0] == 0:
        return np.empty((0, (cfg.d_t + 7) // 8), np.uint8)
    return pack_rows(project_matrix(X, W) >= 0.0)


def batch_quantize(xs, cfg):
    codes = quantize_matrix(xs, cfg)
    return [BinaryEmbedding(row.tobytes(), cfg.d_t) for row in codes]
