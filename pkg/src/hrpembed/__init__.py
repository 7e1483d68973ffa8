"""Compress float embeddings into binary codes with seeded random hyperplanes."""

from .binvec import BinaryEmbedding, hamming, pack_bits, unpack_bits
from .errors import (
    CorruptionError,
    HrpError,
    InvalidArgumentError,
    ParseError,
    ShapeError,
    TrainingDivergedError,
    UndefinedCorrelationError,
    UnsupportedFormatError,
)
from .projection import (
    CompressionConfig,
    Method,
    ProjectionMatrix,
    batch_quantize,
    heaviside,
    hrp_quantize,
    init_projection,
    project,
    sigmoid_quantize,
)
from .retrieval import BinaryStore, knn, range_search
from .similarity import MemoryReport, cosine, estimate_angle, estimate_cosine, memory_consumption_rate, spearman

__version__ = "0.1.0"
