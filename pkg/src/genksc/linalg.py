"""Deterministic dense linear algebra: symmetric eigensolver and QR helpers."""

import numpy as np

from ._validation import as_float_array, check_symmetric

__all__ = ["eigh_sym", "orthonormalize", "random_orthonormal", "principal_angles"]


def eigh_sym(a, tol=1e-10):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Returns (eigenvalues, eigenvectors) with orthonormal eigenvector columns.
    Raises if the input is not symmetric within ``tol`` (max absolute
    asymmetry) or if the solver fails to converge.
    """
    a = as_float_array(a, "matrix", ndim=2)
    check_symmetric(a, "eigh_sym input", tol=tol)
    sym = (a + a.T) / 2.0  # exact symmetry for the solver
    try:
        lam, vec = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError(f"symmetric eigensolver failed to converge: {err}")
    order = np.argsort(lam)[::-1]
    return lam[order], vec[:, order]


def orthonormalize(a, rank_tol=1e-12):
    """Orthonormal basis of the column span via QR, with diag(R) > 0.

    The sign convention makes the operation idempotent: an already-orthonormal
    input comes back unchanged.  Rank-deficient input is an error.
    """
    a = as_float_array(a, "matrix", ndim=2)
    m, s = a.shape
    if s > m:
        raise ValueError(f"orthonormalize: need tall matrix, got {a.shape}")
    q, r = np.linalg.qr(a)
    diag = np.diag(r)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.any(np.abs(diag) <= rank_tol * max(scale, 1.0)):
        raise ValueError("orthonormalize: columns are linearly dependent")
    signs = np.sign(diag)
    return q * signs[None, :]


def random_orthonormal(m, s, rng):
    """Seeded random point on the Stiefel manifold (m x s, orthonormal cols)."""
    return orthonormalize(rng.standard_normal((m, s)))


def principal_angles(a, b):
    """Principal angles (radians, ascending) between two column spans."""
    qa = orthonormalize(as_float_array(a, ndim=2))
    qb = orthonormalize(as_float_array(b, ndim=2))
    sv = np.linalg.svd(qa.T @ qb, compute_uv=False)
    return np.arccos(np.clip(sv, -1.0, 1.0))[::-1]
