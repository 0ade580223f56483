"""Closed-form linear ridge regression between two vector spaces.

Matrices hold one object per column: ``A`` is ``in_dim x n`` and ``B`` is
``out_dim x n``. The fitted projection ``M`` (``out_dim x in_dim``) minimizes

    ||M A - B||_F^2 + lam * ||M||_F^2

on centered data, i.e. ``M = B A^T (A A^T + lam I)^{-1}``.
"""
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, RankDeficientWarning


class Direction(str, Enum):
    SOURCE_TO_TARGET = "xy"
    TARGET_TO_SOURCE = "yx"


def as_data_matrix(values, name="data"):
    """Validate and return ``values`` as a finite 2-D float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def center(data):
    """Subtract the per-row mean.

    Returns
    -------
    centered : ndarray
        ``data`` with every row summing to (numerically) zero.
    mean : ndarray
        The per-row means, shape ``(row_dim,)``.
    """
    data = as_data_matrix(data)
    mean = data.mean(axis=1)
    return data - mean[:, None], mean


@dataclass(frozen=True, eq=False)
class RidgeModel:
    """A fitted ridge projection.

    ``predict`` maps a column ``v`` to ``projection @ (v - input_mean) + output_mean``.
    """

    projection: np.ndarray
    lam: float
    direction: Direction | None
    input_mean: np.ndarray
    output_mean: np.ndarray

    def __post_init__(self):
        for arr in (self.projection, self.input_mean, self.output_mean):
            arr.setflags(write=False)

    @property
    def in_dim(self):
        return self.projection.shape[1]

    @property
    def out_dim(self):
        return self.projection.shape[0]

    def predict(self, inputs):
        return predict(self, inputs)


def solve_ridge(A, B, lam):
    """Return ``M = B A^T (A A^T + lam I)^{-1}`` for already-centered data.

    ``lam > 0`` goes through a Cholesky solve. ``lam == 0`` uses the SVD
    pseudo-inverse of ``A`` (minimum-norm least squares), with singular values
    below ``max(A.shape) * eps * sigma_max`` treated as zero.
    """
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if lam == 0:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
        cutoff = max(A.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
        keep = s > cutoff
        if not keep.all() or A.shape[0] > A.shape[1]:
            warnings.warn(
                f"observation matrix is rank deficient (rank {int(keep.sum())} < {A.shape[0]}) "
                "at lambda=0; returning the minimum-norm solution",
                RankDeficientWarning,
                stacklevel=3,
            )
        # pinv(A) = V diag(1/s) U^T on the retained spectrum
        pinv = (Vt[keep].T / s[keep]) @ U[:, keep].T
        return B @ pinv
    gram = A @ A.T
    gram[np.diag_indices_from(gram)] += lam
    # M^T solves (A A^T + lam I) M^T = A B^T
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        # lam too small relative to the spectrum for Cholesky to succeed
        return np.linalg.lstsq(gram, A @ B.T, rcond=None)[0].T
    return scipy.linalg.cho_solve(factor, A @ B.T, check_finite=False).T


def fit_ridge(observations, responses, lam, *, centering=True, direction=None):
    """Fit the ridge projection from ``observations`` to ``responses``.

    Parameters
    ----------
    observations : array_like, shape (in_dim, n)
    responses : array_like, shape (out_dim, n)
    lam : float
        Ridge parameter, ``>= 0``.
    centering : bool
        Center both matrices with their training means first. With
        ``centering=False`` the stored means are zero.
    direction : Direction, optional
        Recorded on the model; does not change the fit.
    """
    A = as_data_matrix(observations, "observations")
    B = as_data_matrix(responses, "responses")
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(
            f"observations have {A.shape[1]} objects but responses have {B.shape[1]}"
        )
    lam = float(lam)
    if not lam >= 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if centering:
        A, in_mean = center(A)
        B, out_mean = center(B)
    else:
        in_mean = np.zeros(A.shape[0])
        out_mean = np.zeros(B.shape[0])
    M = solve_ridge(A, B, lam)
    return RidgeModel(
        projection=M,
        lam=lam,
        direction=Direction(direction) if direction is not None else None,
        input_mean=in_mean,
        output_mean=out_mean,
    )


def predict(model, inputs):
    X = as_data_matrix(inputs, "inputs")
    if X.shape[0] != model.in_dim:
        raise DimensionMismatch(
            f"model expects {model.in_dim}-dimensional inputs, got {X.shape[0]}"
        )
    return model.projection @ (X - model.input_mean[:, None]) + model.output_mean[:, None]


def ridge_objective(M, A, B, lam):
    """Squared-penalty ridge objective ``||MA - B||_F^2 + lam ||M||_F^2``."""
    R = M @ A - B
    return float(np.sum(R * R) + lam * np.sum(M * M))


def spectral_norm(m):
    """Largest singular value of ``m``."""
    m = as_data_matrix(m)
    return float(np.linalg.svd(m, compute_uv=False)[0])


def hat_matrix(A, lam):
    """``A^T (A A^T + lam I)^{-1} A``, the map taking responses to fitted values.

    At ``lam == 0`` the inverse is the pseudo-inverse, which makes this the
    orthogonal projection onto the row space of ``A``.
    """
    A = as_data_matrix(A)
    return solve_ridge(A, np.eye(A.shape[1]), float(lam)) @ A
