"""Simplex cluster codes, cosine distances, and cluster assignment.

Cluster directions are the vertices of a regular simplex: k unit vectors in
R^(k-1) with pairwise cosine -1/(k-1), the maximal angular separation of k
equidistant directions.  Score vectors are compared to them on their first
k-1 components only.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_float_array

__all__ = ["simplex_codes", "cosine_distance", "cosine_distances", "assign",
           "cluster_loss", "Assignment"]


def simplex_codes(k):
    """Rows of the returned (k, k-1) matrix are the cluster codes.

    First vertex pinned at e1; rows are unit norm, sum to zero, and all
    pairwise cosines equal -1/(k-1).
    """
    if k < 2:
        raise ValueError(f"need at least 2 clusters, got {k}")
    # vertices of the simplex spanned by the standard basis of R^k, centered;
    # QR with positive diagonal maps them isometrically into R^(k-1)
    centered = np.eye(k) - 1.0 / k
    q, r = np.linalg.qr(centered[:, : k - 1])
    q = q * np.sign(np.diag(r))[None, :]
    codes = centered @ q
    return codes / np.linalg.norm(codes, axis=1, keepdims=True)


def cosine_distance(e, code):
    """1 - cos(e, code), in [0, 2].  Zero-norm e is maximally uninformative: 1."""
    e = as_float_array(e, "score", ndim=1)
    code = as_float_array(code, "code", ndim=1)
    code_norm = np.linalg.norm(code)
    if code_norm == 0.0:
        raise ValueError("cluster code has zero norm")
    e_norm = np.linalg.norm(e)
    if e_norm == 0.0:
        return 1.0
    return float(1.0 - e @ code / (e_norm * code_norm))


def _truncate(scores, codes):
    scores = as_float_array(scores, "scores", ndim=2)
    codes = as_float_array(codes, "codes", ndim=2)
    k = codes.shape[0]
    if scores.shape[1] < k - 1:
        raise ValueError(f"scores have {scores.shape[1]} components, "
                         f"need at least k-1 = {k - 1}")
    return scores[:, : k - 1], codes


def cosine_distances(scores, codes):
    """Per-sample cosine distances to every code, shape (n, k).

    Uses the first k-1 score components; zero-norm rows get distance 1 to
    every code.
    """
    trunc, codes = _truncate(scores, codes)
    norms = np.linalg.norm(trunc, axis=1)
    code_norms = np.linalg.norm(codes, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    cos = (trunc @ codes.T) / (safe[:, None] * code_norms[None, :])
    cos[norms == 0.0] = 0.0
    return 1.0 - cos


@dataclass
class Assignment:
    labels: np.ndarray        # per-sample cluster index
    min_distance: np.ndarray  # cosine distance to the chosen code


def assign(scores, codes):
    """Nearest-code assignment; ties break to the lowest cluster index."""
    d = cosine_distances(scores, codes)
    labels = np.argmin(d, axis=1)
    return Assignment(labels=labels, min_distance=d[np.arange(d.shape[0]), labels])


def cluster_loss(scores, codes):
    """Sum over samples of the minimum cosine distance to any code."""
    return float(np.sum(np.min(cosine_distances(scores, codes), axis=1)))
