"""Matrix products whose per-row results do not depend on the batch size.

BLAS picks kernels by matrix shape, so ``A @ W`` for one row can differ in
the last bit from the same row inside a larger batch. These helpers form
the elementwise products explicitly and reduce along a contiguous axis.
"""
import numpy as np

_CHUNK = 256


def rowwise_matmul(A, W) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    W = np.asarray(W, dtype=float)
    out = np.empty((A.shape[0], W.shape[1]))
    Wt = np.ascontiguousarray(W.T)
    for s in range(0, A.shape[0], _CHUNK):
        prod = np.ascontiguousarray(A[s:s + _CHUNK, None, :] * Wt[None, :, :])
        out[s:s + _CHUNK] = prod.sum(axis=2)
    return out


def rowwise_dot(M, w) -> np.ndarray:
    """``M @ w`` for a 2-D ``M`` and a vector ``w``."""
    return np.ascontiguousarray(np.asarray(M, dtype=float) * w).sum(axis=1)
