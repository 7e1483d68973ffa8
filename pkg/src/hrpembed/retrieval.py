"""Exact k-nearest-neighbour search in Hamming space."""

from dataclasses import dataclass

import numpy as np

from .binvec import BinaryEmbedding, check_padding, hamming_many, n_bytes
from .errors import InvalidArgumentError, ShapeError
from .projection import CompressionConfig


@dataclass(frozen=True, eq=False)
class BinaryStore:
    """Immutable collection of codes sharing one compression config.

    ``codes`` is a (count, ceil(d_t/8)) uint8 array.  ``ids`` defaults to
    ``0..count-1``.
    """

    codes: np.ndarray
    config: CompressionConfig
    ids: np.ndarray | None = None

    def __post_init__(self):
        codes = np.ascontiguousarray(self.codes, dtype=np.uint8)
        if codes.ndim == 1 and codes.size == 0:
            codes = codes.reshape(0, n_bytes(self.d_t))
        if codes.ndim != 2 or codes.shape[1] != n_bytes(self.d_t):
            raise ShapeError(f"codes of shape {codes.shape} do not hold {self.d_t}-bit rows")
        bad = check_padding(codes, self.d_t)
        if bad >= 0:
            raise InvalidArgumentError(f"code {bad} has nonzero padding bits")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        if self.ids is None:
            ids = np.arange(codes.shape[0], dtype=np.int64)
        else:
            ids = np.asarray(self.ids, dtype=np.int64)
            if ids.shape != (codes.shape[0],):
                raise ShapeError(f"{ids.size} ids given for {codes.shape[0]} codes")
            if np.unique(ids).size != ids.size:
                raise InvalidArgumentError("ids must be unique")
        ids.setflags(write=False)
        object.__setattr__(self, "ids", ids)

    @property
    def d_t(self):
        return self.config.d_t

    @property
    def count(self):
        return self.codes.shape[0]

    def __len__(self):
        return self.count

    def __getitem__(self, i):
        return BinaryEmbedding(self.codes[i].tobytes(), self.d_t)

    def __eq__(self, other):
        if not isinstance(other, BinaryStore):
            return NotImplemented
        return (
            self.config == other.config
            and self.codes.shape == other.codes.shape
            and np.array_equal(self.codes, other.codes)
            and np.array_equal(self.ids, other.ids)
        )

    @classmethod
    def from_embeddings(cls, embeddings, config, ids=None):
        rows = []
        for i, e in enumerate(embeddings):
            if e.d_t != config.d_t:
                raise ShapeError(f"embedding {i} has {e.d_t} bits, store expects {config.d_t}")
            rows.append(np.frombuffer(e.bits, dtype=np.uint8))
        codes = np.stack(rows) if rows else np.empty((0, n_bytes(config.d_t)), np.uint8)
        return cls(codes, config, ids)


def _distances(store, query):
    if query.d_t != store.d_t:
        raise ShapeError(f"query has {query.d_t} bits, store holds {store.d_t}-bit codes")
    return hamming_many(store.codes, query.as_array())


def _ordered(ids, dist):
    order = np.lexsort((ids, dist))
    return [(int(ids[i]), int(dist[i])) for i in order]


def knn(store, query, k):
    """The ``k`` closest codes as ``(id, distance)``, nearest first, ties by id."""
    if k < 1:
        raise InvalidArgumentError(f"k must be positive, got {k}")
    dist = _distances(store, query)
    if store.count == 0:
        return []
    if k < store.count:
        kth = np.partition(dist, k - 1)[k - 1]
        keep = np.flatnonzero(dist <= kth)
        return _ordered(store.ids[keep], dist[keep])[:k]
    return _ordered(store.ids, dist)


def range_search(store, query, radius):
    if radius < 0:
        raise InvalidArgumentError(f"radius must be non-negative, got {radius}")
    dist = _distances(store, query)
    keep = np.flatnonzero(dist <= radius)
    return _ordered(store.ids[keep], dist[keep])
