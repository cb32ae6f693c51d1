"""Input checks shared by the estimator wrappers."""

import numpy as np
from sklearn.utils import check_scalar

from .spectral import Field, GridSpec


def check_field_array(X, grid: GridSpec | None = None, box_length: float | None = None):
    """Coerce ``X`` to a finite float cube and return ``(samples, grid)``.

    ``X`` may be a :class:`Field` or an ``(n, n, n)`` array.  When ``grid`` is
    given the shape must match it; otherwise a grid is built from the shape and
    ``box_length``.
    """
    if isinstance(X, Field):
        if grid is not None and X.grid != grid:
            raise ValueError(f"field grid {X.grid} does not match fitted grid {grid}")
        return X.samples, X.grid
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 3 or len(set(arr.shape)) != 1:
        raise ValueError(f"expected a cubic 3D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("input contains NaN or infinity")
    if grid is None:
        grid = GridSpec(arr.shape[0], box_length if box_length is not None else 20.0)
    elif arr.shape != grid.shape:
        raise ValueError(f"expected shape {grid.shape}, got {arr.shape}")
    return arr, grid


def check_exponent(value, name, lo=0.0, hi=1.0):
    return check_scalar(value, name, (int, float), min_val=lo, max_val=hi, include_boundaries="neither")
