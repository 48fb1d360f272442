"""Fixed-order float64 reductions shared by the similarity/metric modules.

Every reduction here accumulates sequentially along its reduction index in
64-bit: work is vectorized across the kept axes while a plain loop walks
the reduced axis, so each output element sees one IEEE add per step in
index order. No BLAS and no SIMD partial sums are involved; results are
bit-identical across runs and thread counts, and an independent scalar
loop reproduces them exactly.
"""
from __future__ import annotations

import numpy as np


def as_f64(a) -> np.ndarray:
    return np.asarray(a, dtype=np.float64)


def inorder_matmul(a, b) -> np.ndarray:
    """a @ b.T with sequential accumulation over the shared F axis.

    a is N x F, b is C x F; returns N x C.
    """
    a64, b64 = as_f64(a), as_f64(b)
    acc = np.zeros((a64.shape[0], b64.shape[0]), dtype=np.float64)
    for k in range(a64.shape[1]):
        acc += np.multiply.outer(a64[:, k], b64[:, k])
    return acc


def inorder_matvec(m, v) -> np.ndarray:
    """m @ v with sequential accumulation over F; m is N x F."""
    m64, v64 = as_f64(m), as_f64(v)
    acc = np.zeros(m64.shape[0], dtype=np.float64)
    for k in range(m64.shape[1]):
        acc += m64[:, k] * v64[k]
    return acc


def inorder_rowwise_dot(a, b) -> np.ndarray:
    """Per-row dot products of two N x F matrices, sequential over F."""
    a64, b64 = as_f64(a), as_f64(b)
    acc = np.zeros(a64.shape[0], dtype=np.float64)
    for k in range(a64.shape[1]):
        acc += a64[:, k] * b64[:, k]
    return acc


def inorder_mean_rows(a) -> np.ndarray:
    """Column means of an N x F matrix, accumulated over rows in order."""
    a64 = as_f64(a)
    acc = np.zeros(a64.shape[1], dtype=np.float64)
    for row in a64:
        acc += row
    return acc / a64.shape[0]


def inorder_sum(v) -> float:
    """Sequential 64-bit sum of a 1-D array."""
    acc = 0.0
    for x in as_f64(v):
        acc += float(x)
    return acc


def inorder_dot(a, b) -> float:
    """Scalar dot product, sequential over the single axis."""
    a64, b64 = as_f64(a), as_f64(b)
    acc = 0.0
    for x, y in zip(a64, b64):
        acc += float(x) * float(y)
    return acc


def row_norms(a) -> np.ndarray:
    return np.sqrt(inorder_rowwise_dot(a, a))
