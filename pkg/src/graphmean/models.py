"""Generative graph models: independent-edge sampling, stochastic blockmodels,
and random dot product graphs.

The two blockmodel parameter sets used throughout the experiments ship as
named fixtures (`fixture("two-block-4.2")`, `fixture("five-block-E")`), and a
stored full-rank 70-vertex probability matrix is available for synthetic
independent-edge studies (`fullrank70()`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core import AdjacencyMatrix, ProbabilityMatrix, ValidationError, _as_square, _frozen

PSD_TOL = 1e-10
INNER_PRODUCT_TOL = 1e-12


@dataclass(frozen=True)
class SbmParams:
    """Block probability matrix B and block proportions rho."""

    B: np.ndarray
    rho: np.ndarray
    requires_psd: bool = True

    def __post_init__(self):
        B = _as_square(self.B, "SbmParams.B")
        rho = np.asarray(self.rho, dtype=float)
        if not np.array_equal(B, B.T):
            raise ValidationError("SbmParams: B must be symmetric")
        if np.any(B < 0.0) or np.any(B > 1.0):
            raise ValidationError("SbmParams: B entries must lie in [0, 1]")
        if rho.ndim != 1 or rho.shape[0] != B.shape[0]:
            raise ValidationError("SbmParams: rho length must match the block count")
        if np.any(rho <= 0.0):
            # zero-probability blocks are degenerate: no vertex ever lands there
            raise ValidationError("SbmParams: rho entries must be strictly positive")
        if abs(rho.sum() - 1.0) > 1e-9:
            raise ValidationError("SbmParams: rho must sum to 1")
        if self.requires_psd and np.linalg.eigvalsh(B)[0] < -PSD_TOL:
            raise ValidationError("SbmParams: B must be positive semidefinite")
        object.__setattr__(self, "B", _frozen(B))
        object.__setattr__(self, "rho", _frozen(rho))

    @property
    def K(self) -> int:
        return self.B.shape[0]

    @property
    def rank(self) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.B) > PSD_TOL))


@dataclass(frozen=True)
class Membership:
    """Block label per vertex, labels in {0, ..., K-1}."""

    tau: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=int)
        if tau.ndim != 1 or tau.size == 0:
            raise ValidationError("Membership: tau must be a nonempty vector")
        if np.any(tau < 0):
            raise ValidationError("Membership: labels must be nonnegative")
        frozen = np.array(tau, copy=True)
        frozen.setflags(write=False)
        object.__setattr__(self, "tau", frozen)

    @property
    def n(self) -> int:
        return self.tau.shape[0]


@dataclass(frozen=True)
class LatentPositions:
    """N x d latent position matrix; row Gram products give edge probabilities."""

    X: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValidationError("LatentPositions: X must be a 2-d matrix")
        if not np.all(np.isfinite(X)):
            raise ValidationError("LatentPositions: non-finite entries are not allowed")
        object.__setattr__(self, "X", _frozen(X))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


# ---------------------------------------------------------------------------
# fixtures

_FIXTURE_DATA = {
    "two-block-4.2": {
        "B": [[0.42, 0.2], [0.2, 0.7]],
        "rho": [0.5, 0.5],
    },
    "five-block-E": {
        "B": [
            [0.90, 0.27, 0.05, 0.10, 0.30],
            [0.27, 0.67, 0.02, 0.26, 0.14],
            [0.05, 0.02, 0.44, 0.25, 0.33],
            [0.10, 0.26, 0.25, 0.70, 0.18],
            [0.30, 0.14, 0.33, 0.18, 0.58],
        ],
        "rho": [0.22, 0.39, 0.05, 0.16, 0.18],
    },
}

FIXTURE_NAMES = tuple(sorted(_FIXTURE_DATA))


def fixture(name: str) -> SbmParams:
    """Named built-in blockmodel parameter set."""
    if name not in _FIXTURE_DATA:
        raise ValidationError(f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}")
    spec = _FIXTURE_DATA[name]
    return SbmParams(np.array(spec["B"]), np.array(spec["rho"]))


def load_sbm_json(path) -> SbmParams:
    """Load SBM parameters from a JSON file {"B": [[...]], "rho": [...]}."""
    with open(path) as fh:
        spec = json.load(fh)
    try:
        return SbmParams(np.array(spec["B"], dtype=float), np.array(spec["rho"], dtype=float))
    except KeyError as exc:
        raise ValidationError(f"{path}: missing key {exc} (expected 'B' and 'rho')") from None


def fullrank70() -> ProbabilityMatrix:
    """Stored full-rank 70-vertex probability matrix for synthetic studies.

    A clamped noisy low-rank-plus-dense matrix with connectome-like
    hemisphere/lobe block structure; shipped as package data.
    """
    ref = resources.files("graphmean").joinpath("data/fullrank70.csv")
    with resources.as_file(ref) as path:
        from .io import load_dense_csv

        return ProbabilityMatrix(load_dense_csv(path))


# ---------------------------------------------------------------------------
# sampling and probability matrices

def sample_memberships(rho, n: int, rng: np.random.Generator) -> Membership:
    """Draw n block labels iid from the categorical distribution rho."""
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 1 or np.any(rho <= 0.0) or abs(rho.sum() - 1.0) > 1e-9:
        raise ValidationError("sample_memberships: rho must be positive and sum to 1")
    if n < 1:
        raise ValidationError("sample_memberships: n must be >= 1")
    return Membership(rng.choice(rho.size, size=n, p=rho))


def sbm_probability_matrix(params: SbmParams, membership: Membership) -> ProbabilityMatrix:
    """Edge probability matrix P with P_ij = B[tau_i, tau_j], hollow diagonal."""
    tau = membership.tau
    if tau.max() >= params.K:
        raise ValidationError("sbm_probability_matrix: membership label out of range for K")
    P = params.B[np.ix_(tau, tau)].copy()
    np.fill_diagonal(P, 0.0)
    return ProbabilityMatrix(P)


def sbm_probability_array(params: SbmParams, tau: np.ndarray) -> np.ndarray:
    """Hollow P as a raw array, for experiment hot loops."""
    P = params.B[np.ix_(tau, tau)].copy()
    np.fill_diagonal(P, 0.0)
    return P


def rdpg_probability_matrix(latent: LatentPositions) -> ProbabilityMatrix:
    """P = X X^T with the diagonal zeroed.

    Every pairwise inner product must lie in [0, 1]; excursions beyond
    INNER_PRODUCT_TOL are rejected, smaller ones are snapped to the bounds.
    """
    gram = latent.X @ latent.X.T
    if gram.min() < -INNER_PRODUCT_TOL or gram.max() > 1.0 + INNER_PRODUCT_TOL:
        raise ValidationError(
            "rdpg_probability_matrix: inner products must lie in [0, 1] "
            f"(found range [{gram.min():.6g}, {gram.max():.6g}])"
        )
    P = np.clip((gram + gram.T) / 2.0, 0.0, 1.0)
    np.fill_diagonal(P, 0.0)
    return ProbabilityMatrix(P)


def sample_iem_graph(p: ProbabilityMatrix, rng: np.random.Generator) -> AdjacencyMatrix:
    """One independent-edge graph: Bernoulli(P_ij) above the diagonal, mirrored."""
    return AdjacencyMatrix(sample_iem_array(p.data, rng))


def sample_iem_array(P: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = P.shape[0]
    iu = np.triu_indices(n, 1)
    A = np.zeros((n, n))
    A[iu] = (rng.random(iu[0].size) < P[iu]).astype(float)
    return A + A.T


def psd_factorize(B) -> np.ndarray:
    """Factor a PSD block matrix as B = nu nu^T with nu of shape (K, rank).

    Rank is the count of eigenvalues above PSD_TOL, which makes the latent
    dimension reproducible across runs.
    """
    B = _as_square(B, "psd_factorize")
    if not np.allclose(B, B.T, atol=1e-12):
        raise ValidationError("psd_factorize: B must be symmetric")
    vals, vecs = np.linalg.eigh(B)
    if vals[0] < -PSD_TOL:
        raise ValidationError(f"psd_factorize: B is not PSD (smallest eigenvalue {vals[0]:.3e})")
    keep = vals > PSD_TOL
    d = int(keep.sum())
    if d == 0:
        raise ValidationError("psd_factorize: B has rank 0")
    order = np.argsort(vals[keep])[::-1]
    vals_d = vals[keep][order]
    vecs_d = vecs[:, keep][:, order]
    return vecs_d * np.sqrt(vals_d)
