"""Input validation helpers used by the public entry points."""

import numpy as np

from .errors import DimensionError

__all__ = ["as_matrix", "as_mask", "check_rank_bound"]


def as_matrix(x, name="x", allow_non_finite=False):
    """Coerce ``x`` to a C-contiguous 2-D float64 array.

    Raises ``DimensionError`` for non-2-D input and ``ValueError`` for
    NaN/Inf entries unless ``allow_non_finite`` is set.
    """
    a = np.ascontiguousarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D matrix, got ndim={a.ndim}")
    if not allow_non_finite and not np.isfinite(a).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return a


def as_mask(mask, shape, name="mask"):
    """Coerce an observation mask to boolean with the expected shape.

    Returns ``None`` unchanged so callers can treat "no mask" uniformly.
    """
    if mask is None:
        return None
    m = np.ascontiguousarray(mask, dtype=bool)
    if m.shape != tuple(shape):
        raise DimensionError(f"{name} shape {m.shape} does not match data shape {tuple(shape)}")
    return m


def check_rank_bound(k, shape, name="k"):
    """Validate a factor rank bound against the matrix shape."""
    k = int(k)
    if not 1 <= k <= min(shape):
        raise DimensionError(f"{name}={k} out of range [1, {min(shape)}] for shape {tuple(shape)}")
    return k
