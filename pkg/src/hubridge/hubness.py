"""k-occurrence counts and their skewness.

``N_k(i)`` counts how many queries have target ``i`` among their ``k``
nearest targets. A right-skewed ``N_k`` distribution means a few targets
(hubs) sit in many neighbor lists.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .neighbors import DissimilarityMatrix


@dataclass(frozen=True)
class HubnessReport:
    k: int
    counts: np.ndarray
    skewness: float
    num_queries: int


def nk_counts(rankings, k, target_ids):
    """Occurrences of each of ``target_ids`` in the top ``k`` of ``rankings``."""
    target_ids = list(target_ids)
    k = int(k)
    if not rankings:
        raise ValueError("need at least one ranking")
    if not 1 <= k <= len(target_ids):
        raise ValueError(f"k must be in [1, {len(target_ids)}], got {k}")
    position = {t: i for i, t in enumerate(target_ids)}
    counts = np.zeros(len(target_ids), dtype=np.int64)
    for ranking in rankings:
        for t in ranking.ids(k):
            counts[position[t]] += 1
    return counts


def skewness(counts):
    """Population skewness ``mean((N - mean)^3) / var^{3/2}``.

    A constant vector has zero variance; its skewness is defined as 0.
    """
    x = np.asarray(counts, dtype=np.float64)
    if x.size == 0:
        raise ValueError("counts must be nonempty")
    dev = x - x.mean()
    var = np.mean(dev * dev)
    # rounding in the mean leaves var ~ 1e-32 for constant input
    if var <= (np.finfo(np.float64).eps * max(1.0, np.abs(x).max())) ** 2:
        return 0.0
    return float(np.mean(dev**3) / var**1.5)


def hubness_report(dist, k):
    """N_k counts and skewness straight from a dissimilarity matrix.

    Top-k membership uses the same ascending-index tie-break as
    :func:`hubridge.neighbors.rank_all`, so this agrees with
    ``nk_counts(rank_all(dist, ids), k, ids)``.
    """
    values = dist.values if isinstance(dist, DissimilarityMatrix) else np.asarray(dist, float)
    counts = kernels.topk_counts(values, k)
    return HubnessReport(
        k=int(k), counts=counts, skewness=skewness(counts), num_queries=values.shape[0]
    )
