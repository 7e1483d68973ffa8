"""Synthetic corpora for exercising the toolkit without pretrained models.

All generators draw from the portable Gaussian stream, so outputs are
reproducible across platforms for a given seed.
"""

import numpy as np

from .rng import MASK64, standard_normals


def _sub(seed, k):
    return (seed * 0x9E3779B97F4A7C15 + k) & MASK64


def gaussian_corpus(dim, count, seed):
    return standard_normals(seed, dim * count).reshape(count, dim).astype(np.float32)


def uniform01(seed, n):
    """Uniforms in (0, 1) via the normal CDF of the Gaussian stream."""
    from scipy.special import ndtr

    return ndtr(standard_normals(seed, n))


def unit_pairs_at_angles(thetas, dim, seed):
    """Unit vectors ``u, v`` with ``angle(u_i, v_i) == thetas[i]``."""
    thetas = np.asarray(thetas, dtype=np.float64)
    n = thetas.size
    g = standard_normals(seed, 2 * n * dim).reshape(n, 2, dim)
    u = g[:, 0] / np.linalg.norm(g[:, 0], axis=1, keepdims=True)
    w = g[:, 1] - np.einsum("ij,ij->i", g[:, 1], u)[:, None] * u
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    v = np.cos(thetas)[:, None] * u + np.sin(thetas)[:, None] * w
    return u, v


def sts_pairs(dim, count, seed):
    """Sentence-pair stand-ins: ``b = t*a + sqrt(1-t^2)*noise`` with t ~ U(0, 1).

    Returns ``(A, B, gold)`` where gold is the exact float64 cosine of the
    float32 pairs.
    """
    t = uniform01(_sub(seed, 1), count)
    a = standard_normals(_sub(seed, 2), count * dim).reshape(count, dim)
    z = standard_normals(_sub(seed, 3), count * dim).reshape(count, dim)
    b = t[:, None] * a + np.sqrt(1 - t ** 2)[:, None] * z
    A, B = a.astype(np.float32), b.astype(np.float32)
    A64, B64 = A.astype(np.float64), B.astype(np.float64)
    gold = np.einsum("ij,ij->i", A64, B64) / (np.linalg.norm(A64, axis=1) * np.linalg.norm(B64, axis=1))
    return A, B, gold


def gaussian_blobs(dim, count, n_classes, seed, separation=10.0, noise=1.0, label_noise=0.0):
    """Class-conditional Gaussians around random centres.

    Centres are scaled so every pair is roughly ``separation`` noise standard
    deviations apart.  Labels cycle through the classes and are then shuffled;
    a ``label_noise`` fraction is then reassigned to a different class.
    """
    centres = standard_normals(_sub(seed, 1), n_classes * dim).reshape(n_classes, dim)
    centres *= separation / np.sqrt(2.0 * dim)
    order = np.argsort(uniform01(_sub(seed, 2), count), kind="stable")
    labels = (np.arange(count) % n_classes)[order]
    X = centres[labels] + noise * standard_normals(_sub(seed, 3), count * dim).reshape(count, dim)
    if label_noise > 0:
        u = uniform01(_sub(seed, 4), 2 * count).reshape(2, count)
        flip = u[0] < label_noise
        shift = 1 + np.floor(u[1] * (n_classes - 1)).astype(np.int64)
        labels = np.where(flip, (labels + shift) % n_classes, labels)
    return X.astype(np.float32), labels.astype(np.int64)
