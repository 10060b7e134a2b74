"""Embedding-dimension selection.

Two automated rules plus a fixed override:

* ``ZG(s)``: the s-th profile-likelihood elbow of the ordered eigenvalues.
  The first elbow splits the spectrum at the point maximizing the likelihood
  of a two-mean, pooled-variance Gaussian model; the s-th elbow re-applies
  the rule to the tail left over by the previous one, accumulating positions.
* ``USVT(c)``: universal singular value thresholding, the count of singular
  values above c * sqrt(N/M).
* ``Fixed(d)``: use d as given.

Experiment defaults are the 3rd elbow and c = 0.7: underestimating the
dimension is much more harmful than overestimating it, so both rules are
deliberately generous.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import ValidationError, as_array
from .spectral import eig_sym


@dataclass(frozen=True)
class ZG:
    elbow_index: int = 3

    def __post_init__(self):
        if self.elbow_index < 1:
            raise ValidationError("ZG: elbow index must be >= 1")


@dataclass(frozen=True)
class USVT:
    c: float = 0.7

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValidationError("USVT: c must be positive")


@dataclass(frozen=True)
class Fixed:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError("Fixed: d must be >= 1")


DimSelectMethod = Union[ZG, USVT, Fixed]


def profile_loglik_split(values: np.ndarray) -> int:
    """Argmax split point q of the two-Gaussian pooled-variance likelihood.

    A degenerate pooled variance of zero counts as +inf likelihood; ties go
    to the smallest q.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    csum = np.cumsum(x)
    csq = np.cumsum(x * x)
    q = np.arange(1, n)
    ss1 = csq[:-1] - csum[:-1] ** 2 / q
    tail_sum = csum[-1] - csum[:-1]
    tail_sq = csq[-1] - csq[:-1]
    ss2 = tail_sq - tail_sum ** 2 / (n - q)
    pooled = np.maximum(ss1, 0.0) + np.maximum(ss2, 0.0)
    with np.errstate(divide="ignore"):
        loglik = np.where(pooled > 0.0, -0.5 * n * (np.log(2.0 * np.pi * pooled / n) + 1.0), np.inf)
    return int(np.argmax(loglik)) + 1


def zg_elbow(values, s: int = 1) -> int:
    """Cumulative position of the s-th profile-likelihood elbow.

    `values` must be sorted nonincreasing (algebraic order; negatives allowed,
    they inform the tail distribution). If the tail runs out before the s-th
    elbow, the last computable elbow is returned with a warning.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValidationError("zg_elbow: need at least two ordered values")
    if np.any(np.diff(x) > 1e-12):
        raise ValidationError("zg_elbow: values must be sorted nonincreasing")
    if s < 1:
        raise ValidationError("zg_elbow: s must be >= 1")
    d = 0
    for step in range(s):
        tail = x[d:]
        if tail.size < 2:
            warnings.warn(
                f"zg_elbow: tail exhausted after elbow {step} of {s}; returning d={d}",
                RuntimeWarning,
            )
            break
        d += profile_loglik_split(tail)
    return d


def usvt_dim(values, n: int, m: int, c: float = 0.7) -> int:
    """Count of singular values strictly above c * sqrt(n/m).

    A count of zero is mapped to 1 with a warning: an estimator needs at
    least one dimension.
    """
    x = np.asarray(values, dtype=float)
    if np.any(x < 0.0) or np.any(np.diff(x) > 1e-12):
        raise ValidationError("usvt_dim: values must be nonnegative and nonincreasing")
    if n < 1 or m < 1:
        raise ValidationError("usvt_dim: n and m must be >= 1")
    if not c > 0.0:
        raise ValidationError("usvt_dim: c must be positive")
    threshold = c * np.sqrt(n / m)
    d = int(np.sum(x > threshold))
    if d == 0:
        warnings.warn(
            f"usvt_dim: no singular value above threshold {threshold:.6g}; using d=1",
            RuntimeWarning,
        )
        d = 1
    return d


def select_dimension(matrix, method: DimSelectMethod, m: int = 1) -> int:
    """Choose the embedding dimension for a (diagonally augmented) mean matrix."""
    if isinstance(method, Fixed):
        arr = as_array(matrix)
        if method.d > arr.shape[0]:
            raise ValidationError(f"select_dimension: fixed d={method.d} exceeds N={arr.shape[0]}")
        return method.d
    pairs = eig_sym(as_array(matrix))
    if isinstance(method, ZG):
        return zg_elbow(pairs.values, method.elbow_index)
    if isinstance(method, USVT):
        singular = np.sort(np.abs(pairs.values))[::-1]
        return usvt_dim(singular, n=pairs.n, m=m, c=method.c)
    raise ValidationError(f"select_dimension: unknown method {method!r}")


def parse_dim_method(text: str) -> DimSelectMethod:
    """Parse CLI strings like 'zg:3', 'usvt:0.7', 'fixed:11'."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "zg":
            return ZG(int(arg) if arg else 3)
        if name == "usvt":
            return USVT(float(arg) if arg else 0.7)
        if name == "fixed":
            return Fixed(int(arg))
    except ValueError:
        raise ValidationError(f"parse_dim_method: bad argument in {text!r}") from None
    raise ValidationError(f"parse_dim_method: unknown method {text!r} (expected zg:S, usvt:C or fixed:D)")
