"""Similarity measures in float and Hamming space, plus memory accounting."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .binvec import hamming, hamming_rows
from .errors import InvalidArgumentError, ShapeError, UndefinedCorrelationError
from .projection import Method


def cosine(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise InvalidArgumentError("cosine is undefined for a zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def cosine_rows(A, B):
    """Row-wise cosine between two (n, d) matrices."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise ShapeError(f"shape mismatch: {A.shape} vs {B.shape}")
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    if (na == 0).any() or (nb == 0).any():
        raise InvalidArgumentError("cosine is undefined for a zero vector")
    return np.clip(np.einsum("ij,ij->i", A, B) / (na * nb), -1.0, 1.0)


def estimate_angle(a, b):
    """Angle in radians implied by the fraction of disagreeing hyperplane bits."""
    return math.pi * hamming(a, b) / a.d_t


def estimate_cosine(a, b):
    return math.cos(estimate_angle(a, b))


def estimate_cosine_rows(codes_a, codes_b, d_t):
    return np.cos(np.pi * hamming_rows(codes_a, codes_b) / d_t)


def rank_average(x):
    """1-based ranks where tied values share the mean of their rank span."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], xs.size]
    mean_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(x.size)
    ranks[order] = np.repeat(mean_rank, ends - starts)
    return ranks


def spearman(xs, ys):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise ShapeError(f"shape mismatch: {xs.shape} vs {ys.shape}")
    if xs.size < 2:
        raise InvalidArgumentError("spearman needs at least two observations")
    rx = rank_average(xs) - (xs.size + 1) / 2.0
    ry = rank_average(ys) - (ys.size + 1) / 2.0
    sx, sy = math.sqrt(rx @ rx), math.sqrt(ry @ ry)
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("spearman correlation is undefined for a constant sequence")
    return float(np.clip(rx @ ry / (sx * sy), -1.0, 1.0))


@dataclass(frozen=True)
class MemoryReport:
    d_o: int
    d_h: int
    method: Method
    rate: Fraction

    @property
    def reduction(self):
        return 1 - self.rate

    @property
    def reduction_percent(self):
        return float(100 * self.reduction)

    @property
    def rate_float(self):
        return float(self.rate)

    def describe(self):
        return f"rate={float(self.rate):.6f} reduction={self.reduction_percent:.2f}%"

    def as_dict(self):
        return {
            "method": self.method.value,
            "d_o": self.d_o,
            "d_h": self.d_h,
            "rate": float(self.rate),
            "rate_exact": f"{self.rate.numerator}/{self.rate.denominator}",
            "reduction_percent": self.reduction_percent,
        }


def memory_consumption_rate(d_o, d_h, method=Method.HRP):
    """Payload bits of the binary code per bit of the float32 source vector."""
    method = Method(method)
    if d_o < 1 or d_h < 1:
        raise InvalidArgumentError(f"dimensions must be positive, got d_o={d_o} d_h={d_h}")
    if method is Method.SIGMOID and d_h != d_o:
        raise InvalidArgumentError("the sigmoid baseline keeps the source dimension")
    return MemoryReport(int(d_o), int(d_h), method, Fraction(int(d_h), 32 * int(d_o)))
