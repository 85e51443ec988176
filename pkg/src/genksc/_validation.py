"""Input validation helpers shared across the package."""

import numpy as np


def as_float_array(x, name="array", ndim=None):
    """Coerce to a C-contiguous float64 array and reject non-finite values."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name}: expected {ndim} dimensions, got {arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains NaN or Inf")
    return arr


def check_finite(x, name="array"):
    if not np.all(np.isfinite(x)):
        raise FloatingPointError(f"{name}: contains NaN or Inf")
    return x


def check_square(a, name="matrix"):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name}: expected a square matrix, got shape {a.shape}")
    return a


def check_symmetric(a, name="matrix", tol=1e-10):
    check_square(a, name)
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if asym > tol:
        raise ValueError(f"{name}: not symmetric (max asymmetry {asym:.3e} > {tol:.1e})")
    return a


def check_positive_scalar(x, name="value"):
    if not np.isfinite(x) or x <= 0:
        raise ValueError(f"{name}: must be a positive finite scalar, got {x!r}")
    return float(x)


def check_labels(labels_true, labels_pred):
    """Validate a pair of labelings for clustering metrics."""
    t = np.asarray(labels_true).ravel()
    p = np.asarray(labels_pred).ravel()
    if t.shape[0] != p.shape[0]:
        raise ValueError(f"label length mismatch: {t.shape[0]} vs {p.shape[0]}")
    if t.shape[0] == 0:
        raise ValueError("empty labelings")
    return t, p
