"""Relative-efficiency theory and the Monte Carlo machinery that checks it.

Closed-form results for the blockmodel case:

* MSE of the sample mean: p(1-p)/M per entry (exact at every N),
* MSE of the low-rank estimate: (1/rho_s + 1/rho_t) p(1-p)/(MN) for large N,
* relative efficiency: (1/rho_s + 1/rho_t)/N, so the scaled quantity
  N * RE tends to 1/rho_s + 1/rho_t regardless of M.

`run_sbm_experiment` estimates these quantities by simulation, aggregating
squared errors per block pair with a ratio-of-sums estimator, and
`cross_validate` runs the held-out-mean protocol on an observed batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import GraphBatch, ValidationError, offdiag_mse
from .dimselect import DimSelectMethod, Fixed
from .estimator import phat_from_mean
from .models import SbmParams
from .parallel import deterministic_map
from .rng import AUX_KEY, stream

BOOTSTRAP_RESAMPLES = 500
DEGENERATE_MSE_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# theory

def abar_mse_theory(p: float, m: int) -> float:
    """Entry-wise MSE of the sample mean of m Bernoulli(p) indicators."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError("abar_mse_theory: p must lie in [0, 1]")
    if m < 1:
        raise ValidationError("abar_mse_theory: m must be >= 1")
    return p * (1.0 - p) / m


def phat_mse_theory(rho, s: int, t: int, p: float, m: int, n: int) -> float:
    """Large-N entry-wise MSE of the low-rank estimate for block pair (s, t)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0):
        raise ValidationError("phat_mse_theory: rho entries must be positive")
    return (1.0 / rho[s] + 1.0 / rho[t]) * p * (1.0 - p) / (m * n)


def approx_re_theory(rho, s: int, t: int, n: int) -> float:
    """Large-N relative efficiency (1/rho_s + 1/rho_t)/n; tends to 0 as n grows."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0):
        raise ValidationError("approx_re_theory: rho entries must be positive")
    return (1.0 / rho[s] + 1.0 / rho[t]) / n


def sigma_matrix(nu, rho, x) -> np.ndarray:
    """Limiting covariance-shape matrix of the embedded latent positions.

    Sigma(x) = Delta^{-1} E[X X^T (x.X - (x.X)^2)] Delta^{-1} with
    Delta = E[X X^T], expectations over the categorical mixture of the block
    latent positions with weights rho. Used to validate the variance theory.
    """
    nu = np.asarray(nu, dtype=float)
    rho = np.asarray(rho, dtype=float)
    x = np.asarray(x, dtype=float)
    if nu.ndim != 2 or rho.shape != (nu.shape[0],) or x.shape != (nu.shape[1],):
        raise ValidationError("sigma_matrix: shape mismatch between nu, rho, x")
    delta = (nu * rho[:, None]).T @ nu
    if np.linalg.cond(delta) > 1e12:
        raise ValidationError("sigma_matrix: Delta is singular")
    inner = nu @ x
    weights = rho * (inner - inner ** 2)
    second = (nu * weights[:, None]).T @ nu
    sigma = np.linalg.solve(delta, np.linalg.solve(delta, second).T).T
    return (sigma + sigma.T) / 2.0


# ---------------------------------------------------------------------------
# report containers

@dataclass(frozen=True)
class ReplicateRecord:
    """Block-pair aggregated squared errors for one Monte Carlo replicate."""

    replicate: int
    n: int
    m: int
    d_selected: int
    sse_abar: np.ndarray
    sse_phat: np.ndarray
    count: np.ndarray
    sum_phat: np.ndarray
    sum_sq_phat: np.ndarray


@dataclass(frozen=True)
class PairStats:
    """One report row: a block pair within an (N, M) cell."""

    n: int
    m: int
    block_s: int
    block_t: int
    mse_abar: float
    mse_phat: float
    re: float
    scaled_re: float
    theory_scaled_re: Optional[float]
    ci_halfwidth: float
    se_boot: float
    se_boot_mse_abar: float
    var_phat: Optional[float]
    n_pairs: int
    degenerate: bool


@dataclass
class ExperimentReport:
    kind: str
    rows: list
    replicates: int
    config: dict
    d_selected: dict = field(default_factory=dict)
    records: dict = field(default_factory=dict)

    CSV_COLUMNS = ("n", "m", "block_s", "block_t", "mse_abar", "mse_phat",
                   "re", "scaled_re", "theory_scaled_re", "ci_halfwidth")

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(self.CSV_COLUMNS) + "\n")
            for row in self.rows:
                cells = []
                for col in self.CSV_COLUMNS:
                    value = getattr(row, col)
                    if value is None:
                        cells.append("")
                    elif isinstance(value, (int, np.integer)):
                        cells.append(str(int(value)))
                    else:
                        cells.append(repr(float(value)))
                fh.write(",".join(cells) + "\n")

    def cell(self, n: int, m: int, block_s: int, block_t: int) -> PairStats:
        for row in self.rows:
            if (row.n, row.m, row.block_s, row.block_t) == (n, m, block_s, block_t):
                return row
        raise KeyError(f"no row for n={n} m={m} pair=({block_s},{block_t})")


# ---------------------------------------------------------------------------
# blockmodel Monte Carlo

def _pair_slots(K: int):
    return [(s, t) for s in range(K) for t in range(s, K)]


def _sbm_replicate(params: SbmParams, n: int, m: int, method: DimSelectMethod,
                   seed: int, cell_index: int, replicate: int) -> ReplicateRecord:
    rng = stream(seed, cell_index, replicate)
    K = params.K
    tau = rng.choice(K, size=n, p=params.rho)
    P = params.B[np.ix_(tau, tau)].copy()
    np.fill_diagonal(P, 0.0)
    iu = np.triu_indices(n, 1)
    pu = P[iu]

    acc = np.zeros(pu.size)
    for _ in range(m):
        acc += rng.random(pu.size) < pu
    abar_u = acc / m
    abar = np.zeros((n, n))
    abar[iu] = abar_u
    abar = abar + abar.T

    phat, d, _, _ = phat_from_mean(abar, method, m)
    phat_u = phat[iu]
    ea = (abar_u - pu) ** 2
    ep = (phat_u - pu) ** 2

    # unordered block-pair slot per vertex pair, then one bincount per stat
    ti, tj = tau[iu[0]], tau[iu[1]]
    slot = np.minimum(ti, tj) * K + np.maximum(ti, tj)
    nbins = K * K
    sse_abar = np.bincount(slot, weights=ea, minlength=nbins)
    sse_phat = np.bincount(slot, weights=ep, minlength=nbins)
    count = np.bincount(slot, minlength=nbins)
    sum_phat = np.bincount(slot, weights=phat_u, minlength=nbins)
    sum_sq_phat = np.bincount(slot, weights=phat_u ** 2, minlength=nbins)

    keep = [s * K + t for s, t in _pair_slots(K)]
    return ReplicateRecord(
        replicate=replicate, n=n, m=m, d_selected=d,
        sse_abar=sse_abar[keep], sse_phat=sse_phat[keep],
        count=count[keep].astype(float),
        sum_phat=sum_phat[keep], sum_sq_phat=sum_sq_phat[keep],
    )


def _bootstrap_ratios(numer: np.ndarray, denom: np.ndarray, rng: np.random.Generator):
    """Bootstrap SE of ratio-of-sums estimators over the replicate axis."""
    reps = numer.shape[0]
    idx = rng.integers(0, reps, size=(BOOTSTRAP_RESAMPLES, reps))
    num = numer[idx].sum(axis=1)
    den = np.maximum(denom[idx].sum(axis=1), DEGENERATE_MSE_FLOOR)
    return np.std(num / den, axis=0, ddof=1)


def run_sbm_experiment(params: SbmParams, n_list: Sequence[int], m: int, replicates: int,
                       method: Optional[DimSelectMethod] = None, seed: int = 0,
                       threads: int = 1, keep_records: bool = False) -> ExperimentReport:
    """Monte Carlo sweep of the relative efficiency over a grid of vertex counts.

    For each replicate the block memberships are drawn once and held fixed
    across the m graphs. By default the dimension-selection step is replaced
    with the true dimension rank(B). Block-pair relative efficiencies use the
    ratio-of-sums estimator; confidence half-widths come from a bootstrap
    over replicates.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or replicates < 1 or m < 1:
        raise ValidationError("run_sbm_experiment: need nonempty n_list, m >= 1, replicates >= 1")
    if method is None:
        method = Fixed(params.rank)
    pairs = _pair_slots(params.K)
    rho = params.rho

    rows = []
    d_selected: dict = {}
    records: dict = {}
    for cell_index, n in enumerate(n_list):
        jobs = [
            (params, n, m, method, seed, cell_index, r)
            for r in range(replicates)
        ]
        recs = deterministic_map(lambda args: _sbm_replicate(*args), jobs, threads)
        SA = np.array([rec.sse_abar for rec in recs])
        SP = np.array([rec.sse_phat for rec in recs])
        CNT = np.array([rec.count for rec in recs])
        SUM = np.array([rec.sum_phat for rec in recs])
        SSQ = np.array([rec.sum_sq_phat for rec in recs])

        boot_rng = stream(seed, AUX_KEY, cell_index)
        se_re = _bootstrap_ratios(SP, SA, boot_rng)
        se_mse_abar = _bootstrap_ratios(SA, CNT, boot_rng)

        total_count = CNT.sum(axis=0)
        total_sa = SA.sum(axis=0)
        total_sp = SP.sum(axis=0)
        for p_idx, (s, t) in enumerate(pairs):
            cnt = total_count[p_idx]
            if cnt == 0:
                continue
            mse_abar = total_sa[p_idx] / cnt
            mse_phat = total_sp[p_idx] / cnt
            degenerate = total_sa[p_idx] < DEGENERATE_MSE_FLOOR
            re = total_sp[p_idx] / max(total_sa[p_idx], DEGENERATE_MSE_FLOOR)
            mean_phat = SUM.sum(axis=0)[p_idx] / cnt
            var_phat = SSQ.sum(axis=0)[p_idx] / cnt - mean_phat ** 2
            rows.append(PairStats(
                n=n, m=m, block_s=s, block_t=t,
                mse_abar=mse_abar, mse_phat=mse_phat,
                re=re, scaled_re=n * re,
                theory_scaled_re=float(1.0 / rho[s] + 1.0 / rho[t]),
                ci_halfwidth=1.96 * n * se_re[p_idx],
                se_boot=se_re[p_idx],
                se_boot_mse_abar=se_mse_abar[p_idx],
                var_phat=var_phat, n_pairs=int(cnt), degenerate=degenerate,
            ))
        d_selected[n] = [rec.d_selected for rec in recs]
        if keep_records:
            records[n] = recs

    config = {
        "kind": "re-sweep", "n_list": n_list, "m": m, "replicates": replicates,
        "method": repr(method), "seed": seed,
    }
    return ExperimentReport("re-sweep", rows, replicates, config, d_selected, records)


# ---------------------------------------------------------------------------
# cross-validation on an observed batch

def _cv_replicate(data: np.ndarray, total: np.ndarray, indices: np.ndarray,
                  holdout: int, method: DimSelectMethod, compare_population: bool):
    sample_sum = data[indices].sum(axis=0)
    m = indices.size
    abar = sample_sum / m
    if compare_population:
        truth = total / data.shape[0]
    else:
        truth = (total - sample_sum) / holdout
    phat, d, _, _ = phat_from_mean(abar, method, m)
    return offdiag_mse(abar, truth), offdiag_mse(phat, truth), d


def cross_validate(batch: GraphBatch, m: int, replicates: int, method: DimSelectMethod,
                   seed: int = 0, threads: int = 1,
                   compare_population: bool = False) -> ExperimentReport:
    """Held-out-mean cross-validation of the two estimators on a real batch.

    Each replicate samples m graphs without replacement, estimates the mean
    with both the sample mean and the low-rank pipeline, and scores both
    against the sample mean of the held-out graphs. For m = 1 all possible
    single-graph samples are enumerated exhaustively instead of sampled.
    With `compare_population` the reference is the whole-batch mean
    including the subsample (the alternative protocol).
    """
    n_graphs = len(batch)
    if m >= n_graphs:
        raise ValidationError(f"cross_validate: m={m} must be smaller than the batch size {n_graphs}")
    if m < 1:
        raise ValidationError("cross_validate: m must be >= 1")
    for g in batch.graphs:
        if g.directed:
            raise ValidationError("cross_validate: graphs must be undirected")
        g.require_binary()

    data = np.stack([g.data for g in batch.graphs])
    total = data.sum(axis=0)
    holdout = n_graphs - m

    exhaustive = m == 1
    if exhaustive:
        index_sets = [np.array([i]) for i in range(n_graphs)]
    else:
        if replicates < 1:
            raise ValidationError("cross_validate: replicates must be >= 1")
        index_sets = [
            np.sort(stream(seed, r).choice(n_graphs, size=m, replace=False))
            for r in range(replicates)
        ]

    results = deterministic_map(
        lambda idx: _cv_replicate(data, total, idx, holdout, method, compare_population),
        index_sets, threads,
    )
    mse_abar = np.array([r[0] for r in results])
    mse_phat = np.array([r[1] for r in results])
    dims = [r[2] for r in results]

    mean_abar = float(mse_abar.mean())
    mean_phat = float(mse_phat.mean())
    degenerate = mean_abar < DEGENERATE_MSE_FLOOR
    re = mean_phat / max(mean_abar, DEGENERATE_MSE_FLOOR)

    boot_rng = stream(seed, AUX_KEY)
    reps = mse_abar.size
    idx = boot_rng.integers(0, reps, size=(BOOTSTRAP_RESAMPLES, reps))
    re_samples = mse_phat[idx].mean(axis=1) / np.maximum(mse_abar[idx].mean(axis=1), DEGENERATE_MSE_FLOOR)
    se_re = float(np.std(re_samples, ddof=1))

    n = batch.n
    row = PairStats(
        n=n, m=m, block_s=-1, block_t=-1,
        mse_abar=mean_abar, mse_phat=mean_phat, re=re, scaled_re=n * re,
        theory_scaled_re=None, ci_halfwidth=1.96 * se_re, se_boot=se_re,
        se_boot_mse_abar=float(np.std(mse_abar, ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0,
        var_phat=None, n_pairs=n * (n - 1) // 2, degenerate=degenerate,
    )
    config = {
        "kind": "cross-validate", "m": m, "replicates": len(index_sets),
        "exhaustive": exhaustive, "method": repr(method), "seed": seed,
        "compare_population": compare_population,
    }
    report = ExperimentReport("cross-validate", [row], len(index_sets), config,
                              {batch.n: dims})
    report.records["mse_abar"] = mse_abar
    report.records["mse_phat"] = mse_phat
    report.records["index_sets"] = index_sets
    return report
