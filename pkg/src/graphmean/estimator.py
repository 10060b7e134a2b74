"""The low-rank estimator of the mean graph.

Pipeline (all steps in order): element-wise sample mean, row-mean diagonal
augmentation, dimension selection, first low-rank pass, one iterative
diagonal refinement, second low-rank pass at the same dimension, and a final
clamp of all entries into [0, 1]. The returned comparison matrix has its
diagonal zeroed (known structural zeros); the imputed diagonal is kept in
the diagnostics.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import GraphBatch, ProbabilityMatrix, ValidationError, as_array
from .dimselect import ZG, DimSelectMethod, Fixed, USVT, usvt_dim, zg_elbow
from .models import LatentPositions
from .spectral import _top_eigenpairs, eig_sym


@dataclass(frozen=True)
class PhatResult:
    phat: ProbabilityMatrix
    d_selected: int
    latent: LatentPositions
    diagnostics: dict


def diag_augment_rowmean(abar) -> np.ndarray:
    """First-pass diagonal: average of the off-diagonal entries of each row."""
    arr = as_array(abar)
    n = arr.shape[0]
    if n < 2:
        raise ValidationError("diag_augment_rowmean: need at least 2 vertices")
    return np.diag(arr.sum(axis=1) / (n - 1))


def diag_augment_iterative(abar, p_tilde_0) -> np.ndarray:
    """Refined diagonal: copy the diagonal of the first low-rank pass."""
    p0 = as_array(p_tilde_0)
    return np.diag(np.diag(p0).copy())


def _mean_array(batch: GraphBatch, weighted: bool) -> np.ndarray:
    total = np.zeros((batch.n, batch.n))
    for g in batch.graphs:
        if g.directed:
            raise ValidationError("estimate_phat: graphs must be undirected")
        if not weighted:
            g.require_binary()
        total += g.data
    return total / len(batch)


def phat_from_mean(abar: np.ndarray, method: DimSelectMethod, m: int):
    """Run the augmentation/low-rank/clamp pipeline on a precomputed mean.

    Returns (phat array with zero diagonal, d, latent, diagnostics). Shared
    by `estimate_phat` and the Monte Carlo experiment loops, which accumulate
    the sample mean without materializing a batch.
    """
    n = abar.shape[0]
    if n < 2:
        raise ValidationError("phat_from_mean: need at least 2 vertices")
    caught: list[str] = []
    aug0 = abar + diag_augment_rowmean(abar)

    # dimension selection; reuse the full decomposition for the first pass
    # when the selector needed it anyway
    vecs_full = None
    if isinstance(method, Fixed):
        if method.d > n:
            raise ValidationError(f"phat_from_mean: fixed d={method.d} exceeds N={n}")
        d = method.d
        spectrum = None
        spectrum_scope = "top-d"
    else:
        pairs = eig_sym(aug0)
        spectrum = pairs.values
        spectrum_scope = "full"
        with warnings.catch_warnings(record=True) as grabbed:
            warnings.simplefilter("always")
            if isinstance(method, ZG):
                d = zg_elbow(pairs.values, method.elbow_index)
            elif isinstance(method, USVT):
                singular = np.sort(np.abs(pairs.values))[::-1]
                d = usvt_dim(singular, n=n, m=m, c=method.c)
            else:
                raise ValidationError(f"phat_from_mean: unknown method {method!r}")
        caught.extend(str(w.message) for w in grabbed)
        vecs_full = pairs.vectors

    # first low-rank pass, reusing the selector's decomposition when present
    if vecs_full is not None:
        w0, v0 = spectrum[:d], vecs_full[:, :d]
    else:
        w0, v0 = _top_eigenpairs(aug0, d)
        spectrum = w0
    p_tilde_0 = (v0 * w0) @ v0.T

    aug1 = abar + diag_augment_iterative(abar, p_tilde_0)
    w1, v1 = _top_eigenpairs(aug1, d)
    raw = (v1 * w1) @ v1.T
    raw = (raw + raw.T) / 2.0
    phat = np.clip(raw, 0.0, 1.0)
    np.fill_diagonal(phat, 0.0)

    if w1[-1] >= 0.0:
        latent = LatentPositions(v1 * np.sqrt(w1))
    else:
        nonneg = int(np.sum(w1 >= 0.0))
        caught.append(
            f"ase: {d - nonneg} of the top {d} eigenvalues are negative; "
            f"latent positions use the {nonneg} nonnegative ones"
        )
        latent = LatentPositions(v1[:, :nonneg] * np.sqrt(w1[:nonneg]))

    diagnostics = {
        "eigenvalues": np.asarray(spectrum),
        "spectrum_scope": spectrum_scope,
        "augmented_diagonal": np.diag(p_tilde_0).copy(),
        "warnings": caught,
    }
    return phat, d, latent, diagnostics


def estimate_phat(batch: GraphBatch, method: DimSelectMethod, weighted: bool = False) -> PhatResult:
    """Low-rank estimate of the mean graph of `batch`."""
    abar = _mean_array(batch, weighted)
    phat, d, latent, diagnostics = phat_from_mean(abar, method, m=len(batch))
    return PhatResult(ProbabilityMatrix(phat), d, latent, diagnostics)
