"""File formats: dense CSV matrices and whitespace edge lists.

dense-csv
    N rows of N comma-separated decimals. Emitted decimals use full
    round-trip precision (Python `repr`), so save/load is bit-exact.

edge-list
    Lines of ``i j`` or ``i j w`` with 0-based vertex indices; ``#`` starts a
    comment. A ``# n <count>`` comment pins the vertex count; otherwise it is
    inferred as max index + 1. For undirected graphs the symmetric closure is
    applied.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional

import numpy as np

from .core import (AdjacencyMatrix, GraphBatch, ProbabilityMatrix,
                   ValidationError, as_array)

FORMATS = ("dense-csv", "edge-list")


def _format_float(x: float) -> str:
    return repr(float(x))


def save_dense_csv(arr: np.ndarray, path) -> None:
    arr = np.asarray(arr, dtype=float)
    with open(path, "w") as fh:
        for row in arr:
            fh.write(",".join(_format_float(x) for x in row))
            fh.write("\n")


def load_dense_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: unparseable value ({exc})") from None
    if not rows:
        raise ValidationError(f"{path}: empty matrix file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValidationError(f"{path}: ragged rows (expected {width} columns everywhere)")
    arr = np.array(rows, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{path}: non-finite entries are not allowed")
    return arr


def save_edge_list(arr: np.ndarray, path, directed: bool = False) -> None:
    arr = np.asarray(arr, dtype=float)
    n = arr.shape[0]
    binary = bool(np.all((arr == 0.0) | (arr == 1.0)))
    with open(path, "w") as fh:
        fh.write(f"# n {n}\n")
        rows, cols = np.nonzero(arr)
        for i, j in zip(rows, cols):
            if not directed and j <= i:
                continue
            if binary:
                fh.write(f"{i} {j}\n")
            else:
                fh.write(f"{i} {j} {_format_float(arr[i, j])}\n")


def load_edge_list(path, n: Optional[int] = None, directed: bool = False) -> np.ndarray:
    entries = []
    pinned_n = n
    max_index = -1
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if stripped.startswith("#"):
                toks = stripped[1:].split()
                if len(toks) == 2 and toks[0] == "n":
                    pinned_n = int(toks[1])
                continue
            if not stripped:
                continue
            toks = stripped.split()
            if len(toks) not in (2, 3):
                raise ValidationError(f"{path}:{lineno}: expected 'i j' or 'i j w'")
            try:
                i, j = int(toks[0]), int(toks[1])
                w = float(toks[2]) if len(toks) == 3 else 1.0
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: unparseable edge ({exc})") from None
            if i < 0 or j < 0:
                raise ValidationError(f"{path}:{lineno}: negative vertex index")
            if not np.isfinite(w):
                raise ValidationError(f"{path}:{lineno}: non-finite weight")
            entries.append((i, j, w))
            max_index = max(max_index, i, j)
    size = pinned_n if pinned_n is not None else max_index + 1
    if size <= 0:
        raise ValidationError(f"{path}: cannot infer vertex count from an empty edge list")
    if max_index >= size:
        raise ValidationError(f"{path}: vertex index {max_index} out of range for n={size}")
    arr = np.zeros((size, size))
    for i, j, w in entries:
        arr[i, j] = w
        if not directed:
            arr[j, i] = w
    return arr


def save_matrix(matrix, path, fmt: str = "dense-csv") -> None:
    """Write an AdjacencyMatrix/ProbabilityMatrix (or raw array) to disk."""
    arr = as_array(matrix)
    directed = bool(getattr(matrix, "directed", False))
    if fmt == "dense-csv":
        save_dense_csv(arr, path)
    elif fmt == "edge-list":
        save_edge_list(arr, path, directed=directed)
    else:
        raise ValidationError(f"save_matrix: unknown format {fmt!r} (expected one of {FORMATS})")


def load_adjacency(path, fmt: str = "dense-csv", directed: bool = False,
                   n: Optional[int] = None, binary: Optional[bool] = None) -> AdjacencyMatrix:
    if fmt == "dense-csv":
        arr = load_dense_csv(path)
    elif fmt == "edge-list":
        arr = load_edge_list(path, n=n, directed=directed)
    else:
        raise ValidationError(f"load_adjacency: unknown format {fmt!r} (expected one of {FORMATS})")
    graph = AdjacencyMatrix(arr, directed=directed)
    if binary:
        graph.require_binary()
    return graph


def load_probability_matrix(path, augmented_diagonal: bool = False) -> ProbabilityMatrix:
    return ProbabilityMatrix(load_dense_csv(path), augmented_diagonal=augmented_diagonal)


def load_batch(path, fmt: str = "dense-csv", directed: bool = False,
               n: Optional[int] = None, binary: Optional[bool] = None) -> GraphBatch:
    """Load a batch from a directory of graph files or a JSON manifest.

    A directory is read as all its regular files in sorted name order. A
    manifest is a JSON object ``{"graphs": [paths...]}`` with optional
    ``"format"``, ``"directed"``, ``"n"`` keys; relative paths resolve
    against the manifest location.
    """
    p = Path(path)
    if p.is_dir():
        files = sorted(q for q in p.iterdir() if q.is_file())
        if not files:
            raise ValidationError(f"{path}: directory contains no graph files")
        graphs = [load_adjacency(q, fmt=fmt, directed=directed, n=n, binary=binary) for q in files]
        names = tuple(q.name for q in files)
    elif p.suffix == ".json":
        with open(p) as fh:
            manifest = json.load(fh)
        fmt = manifest.get("format", fmt)
        directed = bool(manifest.get("directed", directed))
        n = manifest.get("n", n)
        files = [p.parent / q for q in manifest["graphs"]]
        graphs = [load_adjacency(q, fmt=fmt, directed=directed, n=n, binary=binary) for q in files]
        names = tuple(os.fspath(q) for q in manifest["graphs"])
    else:
        graphs = [load_adjacency(p, fmt=fmt, directed=directed, n=n, binary=binary)]
        names = (p.name,)
    return GraphBatch(tuple(graphs), names)
