"""Hot loops behind distance computation and top-k selection.

The compiled extension ``_kernels`` is used when it was built; otherwise the
numpy versions in ``_fallback`` are used. Both take objects as rows.

    >>> from hubridge import kernels
    >>> kernels.BACKEND in ("cython", "python")
    True
"""
from contextlib import contextmanager

import numpy as np

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = ("cython", "python") if _compiled is not None else ("python",)
BACKEND = BACKENDS[0]

_impl = _compiled if _compiled is not None else _fallback


def set_backend(name):
    """Select ``"cython"`` or ``"python"`` kernels for subsequent calls."""
    global _impl, BACKEND
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available; rebuild the package")
        _impl = _compiled
    elif name == "python":
        _impl = _fallback
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name


@contextmanager
def backend(name):
    previous = BACKEND
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _rows(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _check_k(k, width):
    k = int(k)
    if not 1 <= k <= width:
        raise ValueError(f"k must be in [1, {width}], got {k}")
    return k


def pairwise_euclidean(queries, targets):
    """Euclidean distances between rows of ``queries`` and rows of ``targets``.

    Computed from explicit differences, so a query identical to a target
    gives exactly 0.
    """
    return _impl.pairwise_euclidean(_rows(queries), _rows(targets))


def smallest_k(dist, k):
    """Column indices of the ``k`` smallest entries per row, ascending, ties by index."""
    dist = _rows(dist)
    return _impl.smallest_k(dist, _check_k(k, dist.shape[1]))


def k_smallest_mean(dist, k):
    dist = _rows(dist)
    return _impl.k_smallest_mean(dist, _check_k(k, dist.shape[1]))


def topk_counts(dist, k):
    """How often each column lands in a row's top ``k``."""
    dist = _rows(dist)
    return _impl.topk_counts(dist, _check_k(k, dist.shape[1]))
