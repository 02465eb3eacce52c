"""Hot kernels, compiled when available.

The Cython extension is used if it was built and ``MSCE_PURE_PYTHON`` is not
set; otherwise the numpy implementations are used.  ``BACKEND`` names the
active one.
"""
import os

import numpy as np

from . import _pykernels

_ext = None
if not os.environ.get("MSCE_PURE_PYTHON"):
    try:
        from . import _ckernels as _ext
    except ImportError:  # extension not built
        _ext = None

BACKEND = "cython" if _ext is not None else "python"
_impl = _ext if _ext is not None else _pykernels

__all__ = ["BACKEND", "corr_cross", "corr_self", "maxpro_sum", "min_distance"]


def _arr(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def corr_cross(a, b, theta, power):
    """Power-exponential correlations between rows of ``a`` (n, d) and ``b`` (m, d)."""
    a, b = _arr(a), _arr(b)
    if a.ndim == 1:
        a = a[None, :]
    if b.ndim == 1:
        b = b[None, :]
    return _impl.corr_cross(a, b, _arr(theta), _arr(power))


def corr_self(a, theta, power):
    return _impl.corr_self(_arr(a), _arr(theta), _arr(power))


def maxpro_sum(x):
    """Sum over pairs of ``1 / prod_r (x_ir - x_jr)^2``; inf on any tied projection."""
    return float(_impl.maxpro_sum(_arr(x)))


def min_distance(x):
    return float(_impl.min_distance(_arr(x)))
