"""Numpy implementations of the compiled kernels.

Same signatures and the same tie-breaking as ``_kernels.pyx``: among equal
values the lower column index wins.
"""
import numpy as np

# upper bound on the (queries x targets x dim) difference block held in memory
_CHUNK_ELEMENTS = 4_000_000


def pairwise_euclidean(queries, targets):
    n, dim = queries.shape
    m = targets.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    step = max(1, _CHUNK_ELEMENTS // max(1, m * dim))
    for start in range(0, n, step):
        block = queries[start:start + step]
        diff = block[:, None, :] - targets[None, :, :]
        out[start:start + step] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out


def smallest_k(dist, k):
    return np.argsort(dist, axis=1, kind="stable")[:, :k].astype(np.int64)


def k_smallest_mean(dist, k):
    part = np.partition(dist, k - 1, axis=1)[:, :k]
    return np.sort(part, axis=1).sum(axis=1) / k


def topk_counts(dist, k):
    idx = smallest_k(dist, k)
    return np.bincount(idx.ravel(), minlength=dist.shape[1]).astype(np.int64)
