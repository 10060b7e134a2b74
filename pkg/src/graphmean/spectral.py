"""Dense symmetric eigendecomposition, rank-d approximation, and spectral
embeddings.

The rank-d approximation keeps the *algebraically* largest d eigenvalues,
which may be negative. The adjacency spectral embedding additionally needs
those eigenvalues to be nonnegative (it takes their square roots) and fails
with a diagnostic otherwise.

Eigenvectors are sign-ambiguous; everything here fixes each vector so its
largest-magnitude entry is positive (ties broken by lowest index), making
outputs comparable across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import NumericalError, ValidationError, _as_square, _frozen
from .models import LatentPositions

SYMMETRY_TOL = 1e-10


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    out = vectors.copy()
    lead = np.argmax(np.abs(out), axis=0)
    for k, i in enumerate(lead):
        if out[i, k] < 0.0:
            out[:, k] = -out[:, k]
    return out


def _check_symmetric(A: np.ndarray, what: str) -> np.ndarray:
    A = _as_square(A, what)
    if np.max(np.abs(A - A.T)) > SYMMETRY_TOL:
        raise ValidationError(f"{what}: input must be symmetric within {SYMMETRY_TOL}")
    return (A + A.T) / 2.0


@dataclass(frozen=True)
class EigenPairs:
    """Full eigendecomposition, values sorted algebraically descending."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "vectors", _frozen(self.vectors))

    @property
    def n(self) -> int:
        return self.values.shape[0]


def eig_sym(A) -> EigenPairs:
    """Full symmetric eigendecomposition with the deterministic sign convention."""
    A = _check_symmetric(A, "eig_sym")
    values, vectors = np.linalg.eigh(A)
    values = values[::-1]
    vectors = fix_signs(vectors[:, ::-1])
    return EigenPairs(values, vectors)


def _top_eigenpairs(A: np.ndarray, d: int):
    """Algebraically largest d eigenpairs, descending, sign-fixed."""
    n = A.shape[0]
    values, vectors = scipy.linalg.eigh(A, subset_by_index=[n - d, n - 1])
    return values[::-1], fix_signs(vectors[:, ::-1])


def lowrank(A, d: int) -> np.ndarray:
    """Rank-d approximation keeping the algebraically largest d eigenvalues."""
    A = _check_symmetric(A, "lowrank")
    n = A.shape[0]
    if not 1 <= d <= n:
        raise ValidationError(f"lowrank: d must be in [1, {n}], got {d}")
    values, vectors = _top_eigenpairs(A, d)
    R = (vectors * values) @ vectors.T
    return (R + R.T) / 2.0


def ase(A, d: int) -> LatentPositions:
    """d-dimensional adjacency spectral embedding: X = U S^{1/2}.

    The top-d algebraic eigenvalues must all be nonnegative. On failure the
    error reports how many eigenvalues are nonnegative so the caller can
    retry with a smaller d.
    """
    A = _check_symmetric(A, "ase")
    n = A.shape[0]
    if not 1 <= d <= n:
        raise ValidationError(f"ase: d must be in [1, {n}], got {d}")
    values, vectors = _top_eigenpairs(A, d)
    if values[-1] < 0.0:
        nonneg = int(np.sum(values >= 0.0))
        raise NumericalError(
            f"ase: {d - nonneg} of the top {d} eigenvalues are negative; "
            f"only {nonneg} nonnegative eigenvalues are available"
        )
    return LatentPositions(vectors * np.sqrt(values))


def svd_embed(W, d: int):
    """Scaled singular-vector embedding of a (possibly asymmetric) matrix.

    Returns (left, right, singular_values) with left/right columns scaled by
    the square roots of the singular values, so left @ right.T is the best
    rank-d approximation of W in Frobenius norm.
    """
    W = _as_square(W, "svd_embed")
    n = W.shape[0]
    if not 1 <= d <= n:
        raise ValidationError(f"svd_embed: d must be in [1, {n}], got {d}")
    U, s, Vt = np.linalg.svd(W)
    U_d, s_d, V_d = U[:, :d], s[:d], Vt[:d].T
    # joint sign fix: flipping u_k forces flipping v_k to keep u s v^T intact
    lead = np.argmax(np.abs(U_d), axis=0)
    for k, i in enumerate(lead):
        if U_d[i, k] < 0.0:
            U_d[:, k] = -U_d[:, k]
            V_d[:, k] = -V_d[:, k]
    root = np.sqrt(s_d)
    return U_d * root, V_d * root, s_d
