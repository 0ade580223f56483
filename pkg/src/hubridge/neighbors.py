"""Exact nearest-neighbor ranking under Euclidean distance and NICDM.

Query and target matrices hold one object per column, as elsewhere in the
package. Dissimilarity matrices are ``num_queries x num_targets``.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .errors import DegenerateInputError, DimensionMismatch
from .regression import as_data_matrix

DEFAULT_NICDM_K = 10


class Kind(str, Enum):
    EUCLIDEAN = "euclidean"
    NICDM = "nicdm"


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    values: np.ndarray
    kind: Kind = Kind.EUCLIDEAN

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"dissimilarities must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("dissimilarities must be finite and nonnegative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", Kind(self.kind))

    @property
    def shape(self):
        return self.values.shape

    def scaled(self, factor):
        return DissimilarityMatrix(self.values * factor, self.kind)


@dataclass(frozen=True, eq=False)
class Ranking:
    """Targets for one query, sorted by ascending dissimilarity.

    ``order`` indexes into ``target_ids``; ``scores`` are the matching
    dissimilarities.
    """

    query_id: object
    target_ids: tuple
    order: np.ndarray
    scores: np.ndarray

    def __len__(self):
        return len(self.order)

    @property
    def ordered_targets(self):
        return [(self.target_ids[j], float(s)) for j, s in zip(self.order, self.scores)]

    def ids(self, k=None):
        order = self.order if k is None else self.order[:k]
        return [self.target_ids[j] for j in order]

    def rank_of(self, target_id):
        """1-based position of ``target_id``."""
        return self.ids().index(target_id) + 1


def pairwise_euclidean(queries, targets):
    Q = as_data_matrix(queries, "queries")
    T = as_data_matrix(targets, "targets")
    if Q.shape[0] != T.shape[0]:
        raise DimensionMismatch(
            f"queries are {Q.shape[0]}-dimensional but targets are {T.shape[0]}-dimensional"
        )
    return DissimilarityMatrix(kernels.pairwise_euclidean(Q.T, T.T), Kind.EUCLIDEAN)


def local_scales(values, k):
    """Mean of the ``k`` smallest entries of each row and of each column."""
    mu = kernels.k_smallest_mean(values, k)
    nu = kernels.k_smallest_mean(values.T, k)
    return mu, nu


def nicdm(dist, k=DEFAULT_NICDM_K):
    """Rescale ``d(i, j)`` to ``d(i, j) / sqrt(mu_i * nu_j)``.

    ``mu_i`` averages the ``k`` smallest distances in query row ``i`` and
    ``nu_j`` the ``k`` smallest in target column ``j``. The result is invariant
    to a common rescaling of all distances.
    """
    if not isinstance(dist, DissimilarityMatrix):
        dist = DissimilarityMatrix(dist)
    if dist.kind is not Kind.EUCLIDEAN:
        raise ValueError("nicdm expects a Euclidean dissimilarity matrix")
    n, m = dist.shape
    k = int(k)
    if not (1 <= k <= m and k <= n):
        raise ValueError(
            f"nicdm needs 1 <= k <= num_targets ({m}) and k <= num_queries ({n}), got k={k}"
        )
    mu, nu = local_scales(dist.values, k)
    if np.any(mu <= 0) or np.any(nu <= 0):
        raise DegenerateInputError(
            "zero local scale: some query or target has k coincident neighbors"
        )
    adjusted = dist.values / np.sqrt(mu[:, None] * nu[None, :])
    return DissimilarityMatrix(adjusted, Kind.NICDM)


def rank_all(dist, target_ids, query_ids=None):
    """One :class:`Ranking` per query row, ties broken by ascending target index."""
    values = dist.values if isinstance(dist, DissimilarityMatrix) else np.asarray(dist, float)
    target_ids = tuple(target_ids)
    if len(target_ids) != values.shape[1]:
        raise DimensionMismatch(
            f"{len(target_ids)} target ids for {values.shape[1]} dissimilarity columns"
        )
    if query_ids is None:
        query_ids = range(values.shape[0])
    query_ids = list(query_ids)
    if len(query_ids) != values.shape[0]:
        raise DimensionMismatch(f"{len(query_ids)} query ids for {values.shape[0]} rows")
    order = np.argsort(values, axis=1, kind="stable")
    scores = np.take_along_axis(values, order, axis=1)
    return [
        Ranking(qid, target_ids, order[i], scores[i]) for i, qid in enumerate(query_ids)
    ]
