"""Portable seeded Gaussian generator.

SplitMix64 expands a 64-bit seed into the 256-bit state of a xoshiro256++
stream.  Each normal variate pair comes from two consecutive 64-bit outputs
through the Box-Muller transform::

    u1 = ((a >> 11) + 1) * 2**-53        # (0, 1]
    u2 = (b >> 11) * 2**-53              # [0, 1)
    r  = sqrt(-2 ln u1)
    z0, z1 = r cos(2 pi u2), r sin(2 pi u2)

Both variates of a pair are used, in order.  When an odd count is requested
the final sine variate is discarded.  Integer arithmetic is exact so the
stream of uniforms is identical everywhere; the float32 rounding applied by
callers absorbs last-ulp differences between libm implementations.

The numba kernels are the fast path.  ``reference_normals`` is a pure-Python
transcription used to check them.
"""

import math

import numpy as np
from numba import njit, uint64

from .errors import InvalidArgumentError

MASK64 = (1 << 64) - 1
_TWO_POW_M53 = 1.0 / 9007199254740992.0


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InvalidArgumentError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise InvalidArgumentError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


# -- pure Python reference ---------------------------------------------------

def splitmix64_stream(seed):
    state = _check_seed(seed)
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


def xoshiro256pp_stream(state):
    s0, s1, s2, s3 = state
    while True:
        result = (_rotl((s0 + s3) & MASK64, 23) + s0) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        yield result


def seed_state(seed):
    """The four xoshiro256++ state words derived from ``seed``."""
    gen = splitmix64_stream(seed)
    return tuple(next(gen) for _ in range(4))


def reference_normals(seed, n):
    """Slow, dependency-free version of :func:`standard_normals`."""
    out = np.empty(n, dtype=np.float64)
    gen = xoshiro256pp_stream(seed_state(seed))
    i = 0
    while i < n:
        a, b = next(gen), next(gen)
        u1 = ((a >> 11) + 1) * _TWO_POW_M53
        u2 = (b >> 11) * _TWO_POW_M53
        r = math.sqrt(-2.0 * math.log(u1))
        out[i] = r * math.cos(2.0 * math.pi * u2)
        if i + 1 < n:
            out[i + 1] = r * math.sin(2.0 * math.pi * u2)
        i += 2
    return out


# -- compiled fast path ------------------------------------------------------

@njit(cache=True)
def _rotl_nb(x, k):
    return (x << uint64(k)) | (x >> uint64(64 - k))


@njit(cache=True)
def _fill_normals(s, out):
    s0, s1, s2, s3 = s[0], s[1], s[2], s[3]
    n = out.shape[0]
    scale = 1.0 / 9007199254740992.0
    two_pi = 2.0 * math.pi
    i = 0
    while i < n:
        # first 64-bit draw
        a = _rotl_nb(s0 + s3, 23) + s0
        t = s1 << uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl_nb(s3, 45)
        # second 64-bit draw
        b = _rotl_nb(s0 + s3, 23) + s0
        t = s1 << uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl_nb(s3, 45)

        u1 = float((a >> uint64(11)) + uint64(1)) * scale
        u2 = float(b >> uint64(11)) * scale
        r = math.sqrt(-2.0 * math.log(u1))
        out[i] = r * math.cos(two_pi * u2)
        if i + 1 < n:
            out[i + 1] = r * math.sin(two_pi * u2)
        i += 2


def standard_normals(seed, n):
    """Return ``n`` float64 N(0, 1) draws from the stream seeded by ``seed``."""
    if n < 0:
        raise InvalidArgumentError(f"count must be non-negative, got {n}")
    state = np.array(seed_state(seed), dtype=np.uint64)
    out = np.empty(int(n), dtype=np.float64)
    if n:
        _fill_normals(state, out)
    return out
