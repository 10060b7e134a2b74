"""Permutation test for label structure in embedded latent positions.

The statistic T is the mean Euclidean distance between latent positions of
same-label vertex pairs minus the mean distance between cross-label pairs;
strongly negative values mean same-label vertices sit closer together.

The null preserves both the label counts and (optionally) spatial
contiguity: a uniform 1-flip picks an adjacent cross-label pair, then a
second distinct adjacent pair across the same label boundary, and swaps one
vertex in each direction. A k-flip chains k of these. The p-value is the
fraction of k-flipped assignments with a T value strictly smaller than the
observed one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import NumericalError, ValidationError, _as_square
from .models import LatentPositions
from .parallel import deterministic_map
from .rng import stream

DEFAULT_MAX_ATTEMPTS = 10_000


@dataclass(frozen=True)
class LabelAssignment:
    """Vertex labels as integer codes plus the declared label names."""

    codes: np.ndarray
    names: tuple

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=int)
        names = tuple(self.names)
        if codes.ndim != 1 or codes.size == 0:
            raise ValidationError("LabelAssignment: codes must be a nonempty vector")
        if not names:
            raise ValidationError("LabelAssignment: label set must be nonempty")
        if codes.min() < 0 or codes.max() >= len(names):
            raise ValidationError("LabelAssignment: code outside the declared label set")
        present = np.bincount(codes, minlength=len(names))
        if np.any(present == 0):
            missing = [names[i] for i in np.nonzero(present == 0)[0]]
            raise ValidationError(f"LabelAssignment: labels with no members: {missing}")
        frozen = np.array(codes, copy=True)
        frozen.setflags(write=False)
        object.__setattr__(self, "codes", frozen)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "LabelAssignment":
        labels = [str(x) for x in labels]
        names = tuple(sorted(set(labels)))
        lookup = {name: i for i, name in enumerate(names)}
        return cls(np.array([lookup[x] for x in labels]), names)

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    def counts(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=len(self.names))

    def with_codes(self, codes: np.ndarray) -> "LabelAssignment":
        return LabelAssignment(codes, self.names)


@dataclass(frozen=True)
class SpatialAdjacency:
    """Region-adjacency structure: binary, symmetric, hollow."""

    S: np.ndarray

    def __post_init__(self):
        S = _as_square(self.S, "SpatialAdjacency")
        if not np.array_equal(S, S.T):
            raise ValidationError("SpatialAdjacency: S must be symmetric")
        if np.any(np.diag(S) != 0.0):
            raise ValidationError("SpatialAdjacency: S must be hollow")
        if not np.all((S == 0.0) | (S == 1.0)):
            raise ValidationError("SpatialAdjacency: S must be binary")
        frozen = np.array(S, dtype=float, copy=True)
        frozen.setflags(write=False)
        object.__setattr__(self, "S", frozen)

    @property
    def n(self) -> int:
        return self.S.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        return np.nonzero(self.S[i])[0]


def _connected(sub_vertices: np.ndarray, S: np.ndarray) -> bool:
    if sub_vertices.size <= 1:
        return True
    inside = set(int(v) for v in sub_vertices)
    seen = {int(sub_vertices[0])}
    frontier = [int(sub_vertices[0])]
    while frontier:
        v = frontier.pop()
        for u in np.nonzero(S[v])[0]:
            u = int(u)
            if u in inside and u not in seen:
                seen.add(u)
                frontier.append(u)
    return len(seen) == len(inside)


def contiguity_violations(assignment: LabelAssignment, spatial: SpatialAdjacency) -> list:
    """Labels whose induced spatial subgraph is disconnected."""
    bad = []
    for code, name in enumerate(assignment.names):
        members = np.nonzero(assignment.codes == code)[0]
        if not _connected(members, spatial.S):
            bad.append(name)
    return bad


def validate_contiguity(assignment: LabelAssignment, spatial: SpatialAdjacency) -> None:
    """Warn (only) about disconnected labels in the true assignment."""
    bad = contiguity_violations(assignment, spatial)
    if bad:
        warnings.warn(f"labels not spatially connected: {bad}", RuntimeWarning)


def _pair_distances(X: np.ndarray):
    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))
    iu = np.triu_indices(X.shape[0], 1)
    return dist[iu], iu


def _statistic_from_distances(dist_u: np.ndarray, iu, codes: np.ndarray) -> float:
    same = codes[iu[0]] == codes[iu[1]]
    n_within = int(same.sum())
    n_cross = same.size - n_within
    if n_within == 0:
        raise ValidationError("test_statistic: no within-label pairs (all labels are singletons)")
    if n_cross == 0:
        raise ValidationError("test_statistic: no cross-label pairs (single label)")
    return float(dist_u[same].mean() - dist_u[~same].mean())


def test_statistic(latent: LatentPositions, assignment: LabelAssignment) -> float:
    """Mean within-label distance minus mean cross-label distance."""
    X = latent.X
    codes = assignment.codes
    if X.shape[0] != codes.shape[0]:
        raise ValidationError("test_statistic: latent rows must align with labels")
    dist_u, iu = _pair_distances(X)
    return _statistic_from_distances(dist_u, iu, codes)


def _admissible_first_pairs(codes: np.ndarray, S: np.ndarray):
    """Ordered pairs (i, j): spatially adjacent with different labels."""
    cross = (codes[:, None] != codes[None, :]) & (S > 0)
    return np.nonzero(cross)


def uniform_one_flip(assignment: LabelAssignment, spatial: SpatialAdjacency,
                     rng: np.random.Generator, enforce_contiguity: bool = True,
                     max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> LabelAssignment:
    """One label-count-preserving boundary swap.

    Selection is uniform over the admissible pair set at each stage: first an
    adjacent cross-label ordered pair (i1, j1), then a distinct adjacent pair
    (i2, j2) across the same label boundary (l(i2) = l(i1), l(j2) = l(j1),
    i2 != i1, j2 != j1). Vertex j1 moves to l(i1) and i2 moves to l(j1).
    Draws that admit no second pair, or that break contiguity when
    enforcement is on, are rejected and resampled up to `max_attempts`.
    """
    codes = assignment.codes
    S = spatial.S
    if codes.shape[0] != spatial.n:
        raise ValidationError("uniform_one_flip: labels and spatial adjacency sizes differ")
    first_i, first_j = _admissible_first_pairs(codes, S)
    if first_i.size == 0:
        raise NumericalError("uniform_one_flip: no adjacent cross-label pair exists")

    for _ in range(max_attempts):
        pick = int(rng.integers(first_i.size))
        i1, j1 = int(first_i[pick]), int(first_j[pick])
        la, lb = codes[i1], codes[j1]
        second = (
            (codes[:, None] == la) & (codes[None, :] == lb) & (S > 0)
        )
        second[i1, :] = False
        second[:, j1] = False
        cand_i, cand_j = np.nonzero(second)
        if cand_i.size == 0:
            continue
        pick2 = int(rng.integers(cand_i.size))
        i2, j2 = int(cand_i[pick2]), int(cand_j[pick2])
        new_codes = codes.copy()
        new_codes[j1] = la
        new_codes[i2] = lb
        if enforce_contiguity:
            ok = all(
                _connected(np.nonzero(new_codes == lab)[0], S)
                for lab in (la, lb)
            )
            if not ok:
                continue
        return assignment.with_codes(new_codes)
    raise NumericalError(
        f"uniform_one_flip: no admissible flip found in {max_attempts} attempts"
    )


def uniform_k_flip(assignment: LabelAssignment, spatial: SpatialAdjacency, k: int,
                   rng: np.random.Generator, enforce_contiguity: bool = True,
                   max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> LabelAssignment:
    """k sequential uniform 1-flips; label counts are preserved exactly."""
    if k < 1:
        raise ValidationError("uniform_k_flip: k must be >= 1")
    current = assignment
    for _ in range(k):
        current = uniform_one_flip(current, spatial, rng,
                                   enforce_contiguity=enforce_contiguity,
                                   max_attempts=max_attempts)
    return current


@dataclass(frozen=True)
class PermTestResult:
    t_observed: float
    p_value: float
    null_samples: np.ndarray
    k: int
    replicates: int


def perm_test(latent: LatentPositions, assignment: LabelAssignment,
              spatial: SpatialAdjacency, k: int, replicates: int, seed: int = 0,
              enforce_contiguity: bool = True, smoothed: bool = False,
              threads: int = 1,
              max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> PermTestResult:
    """Permutation p-value of the observed label structure.

    Null assignments are iid uniform k-flips of the true assignment; the
    p-value counts strictly smaller null statistics. `smoothed` switches to
    the (count + 1)/(R + 1) variant for calibration studies.
    """
    if replicates < 1:
        raise ValidationError("perm_test: replicates must be >= 1")
    if latent.X.shape[0] != assignment.n:
        raise ValidationError("perm_test: latent rows must align with labels")
    dist_u, iu = _pair_distances(latent.X)
    t_obs = _statistic_from_distances(dist_u, iu, assignment.codes)

    def one_null(r: int) -> float:
        rng = stream(seed, r)
        flipped = uniform_k_flip(assignment, spatial, k, rng,
                                 enforce_contiguity=enforce_contiguity,
                                 max_attempts=max_attempts)
        return _statistic_from_distances(dist_u, iu, flipped.codes)

    nulls = np.array(deterministic_map(one_null, range(replicates), threads))
    smaller = int(np.sum(nulls < t_obs))
    if smoothed:
        p = (smaller + 1) / (replicates + 1)
    else:
        p = smaller / replicates
    return PermTestResult(t_obs, float(p), nulls, k, replicates)
