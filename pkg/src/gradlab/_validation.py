"""Input validation helpers shared across modules."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import InsufficientDataError, SizeMismatchError


def check_field(a, size=None, name="state"):
    """Return ``a`` as a finite 1-D float array, optionally of length ``size``."""
    a = check_array(a, ensure_2d=False, dtype=np.float64, input_name=name)
    if a.ndim != 1:
        raise SizeMismatchError(f"{name} must be 1-D, got shape {a.shape}")
    if size is not None and a.shape[0] != size:
        raise SizeMismatchError(f"{name} has {a.shape[0]} coefficients, basis has {size}")
    return a


def check_series(times, values, min_samples=2):
    """Validate a sampled scalar time series and return sorted float arrays."""
    t = check_array(times, ensure_2d=False, dtype=np.float64, input_name="times")
    v = check_array(values, ensure_2d=False, dtype=np.float64, input_name="values",
                    ensure_all_finite=False)
    if t.ndim != 1 or v.ndim != 1 or t.shape != v.shape:
        raise SizeMismatchError("times and values must be 1-D arrays of equal length")
    if t.shape[0] < min_samples:
        raise InsufficientDataError(f"need at least {min_samples} samples, got {t.shape[0]}")
    order = np.argsort(t, kind="stable")
    return t[order], v[order]


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value
