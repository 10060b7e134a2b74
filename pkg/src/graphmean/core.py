"""Core matrix types and element-wise operations on graph populations.

Conventions used throughout the package:

* vertex indices are 0-based everywhere,
* adjacency and probability matrices are hollow (zero diagonal) unless a
  probability matrix is explicitly flagged as diagonally augmented,
* undirected matrices are exactly symmetric,
* NaN/Inf anywhere in an input matrix is a hard error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when a numerically valid input cannot be processed."""


def _as_square(data, what: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{what}: expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what}: non-finite entries are not allowed")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def as_array(obj) -> np.ndarray:
    """Unwrap a matrix container (or coerce array-like) to a float ndarray."""
    if isinstance(obj, np.ndarray):
        return obj
    inner = getattr(obj, "data", None)
    if isinstance(inner, np.ndarray):
        return inner
    return np.asarray(obj, dtype=float)


@dataclass(frozen=True)
class AdjacencyMatrix:
    """One observed graph: a hollow matrix of edge indicators or weights."""

    data: np.ndarray
    directed: bool = False

    def __post_init__(self):
        arr = _as_square(self.data, "AdjacencyMatrix")
        if np.any(np.diag(arr) != 0.0):
            raise ValidationError("AdjacencyMatrix: diagonal entries must be exactly 0 (no self-loops)")
        if np.any(arr < 0.0):
            raise ValidationError("AdjacencyMatrix: negative weights are not allowed")
        if not self.directed and not np.array_equal(arr, arr.T):
            raise ValidationError("AdjacencyMatrix: undirected matrix must be symmetric")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.data == 0.0) | (self.data == 1.0)))

    def require_binary(self):
        if not self.is_binary:
            raise ValidationError("AdjacencyMatrix: expected binary entries in {0, 1}")


@dataclass(frozen=True)
class ProbabilityMatrix:
    """Symmetric matrix of edge probabilities (or probability estimates)."""

    data: np.ndarray
    augmented_diagonal: bool = False

    def __post_init__(self):
        arr = _as_square(self.data, "ProbabilityMatrix")
        if not np.array_equal(arr, arr.T):
            raise ValidationError("ProbabilityMatrix: must be symmetric")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValidationError("ProbabilityMatrix: entries must lie in [0, 1]")
        if not self.augmented_diagonal and np.any(np.diag(arr) != 0.0):
            raise ValidationError("ProbabilityMatrix: diagonal must be 0 unless diagonally augmented")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def n(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class GraphBatch:
    """An ordered collection of graphs on a shared vertex set.

    Vertex order is the correspondence: vertex i means the same entity in
    every member graph.
    """

    graphs: tuple
    metadata: tuple = field(default_factory=tuple)

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if not graphs:
            raise ValidationError("GraphBatch: batch must be nonempty")
        if not all(isinstance(g, AdjacencyMatrix) for g in graphs):
            raise ValidationError("GraphBatch: all members must be AdjacencyMatrix")
        n = graphs[0].n
        if any(g.n != n for g in graphs):
            raise ValidationError("GraphBatch: all graphs must share the same vertex count")
        meta = tuple(self.metadata) if self.metadata else tuple(f"graph-{i}" for i in range(len(graphs)))
        if len(meta) != len(graphs):
            raise ValidationError("GraphBatch: metadata length must match number of graphs")
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "metadata", meta)

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def n(self) -> int:
        return self.graphs[0].n


def sample_mean(batch: GraphBatch) -> ProbabilityMatrix:
    """Element-wise mean of the adjacency matrices in `batch`.

    Requires binary, undirected member graphs; the result is the matrix of
    edge-occurrence proportions.
    """
    for g in batch.graphs:
        if g.directed:
            raise ValidationError("sample_mean: graphs must be undirected")
        g.require_binary()
    total = np.zeros((batch.n, batch.n))
    for g in batch.graphs:
        total += g.data
    mean = total / len(batch)
    mean = np.clip(mean, 0.0, 1.0)  # guard float round-off at the boundaries
    return ProbabilityMatrix((mean + mean.T) / 2.0)


def clamp01(matrix) -> ProbabilityMatrix:
    """Threshold entries of a symmetric real matrix into [0, 1]."""
    arr = as_array(matrix)
    arr = _as_square(arr, "clamp01")
    if not np.array_equal(arr, arr.T):
        raise ValidationError("clamp01: input must be symmetric")
    clipped = np.clip(arr, 0.0, 1.0)
    hollow = bool(np.all(np.diag(clipped) == 0.0))
    return ProbabilityMatrix(clipped, augmented_diagonal=not hollow)


def mse(estimate, truth) -> float:
    """Mean squared error over off-diagonal vertex pairs.

    The diagonal is excluded: it is structurally zero in hollow graphs and
    carries no information about edge probabilities.
    """
    est = as_array(estimate)
    tru = as_array(truth)
    if est.shape != tru.shape:
        raise ValidationError(f"mse: shape mismatch {est.shape} vs {tru.shape}")
    return offdiag_mse(est, tru)


def offdiag_mse(est: np.ndarray, tru: np.ndarray) -> float:
    """Array-level MSE over i<j, used in experiment hot loops."""
    n = est.shape[0]
    iu = np.triu_indices(n, 1)
    diff = est[iu] - tru[iu]
    return float(diff @ diff / diff.size)


def log1p_transform(weighted: AdjacencyMatrix) -> AdjacencyMatrix:
    """Entry-wise log(w + 1), taming heavy-tailed edge weights.

    Zeros map to zeros, so hollowness and sparsity pattern are preserved.
    """
    if np.any(weighted.data < 0.0):
        raise ValidationError("log1p_transform: negative weights are not allowed")
    return AdjacencyMatrix(np.log1p(weighted.data), directed=weighted.directed)
