"""Acceptance criteria, one test per criterion, each printing a PASS line.

The heavy Monte Carlo runs are shared through session-scoped fixtures:
criterion 1's sweep also serves criteria 3 and 4, and criterion 5 adds two
more sweeps at the same vertex count with different sample sizes.
"""

import subprocess
import sys

import numpy as np
import pytest
import scipy.stats

from graphmean import (AdjacencyMatrix, GraphBatch, LabelAssignment,
                       LatentPositions, SbmParams, SpatialAdjacency, ZG,
                       cross_validate, fixture, fullrank70, lowrank,
                       perm_test, psd_factorize, run_sbm_experiment,
                       sigma_matrix, stream, uniform_k_flip)
from graphmean.models import sample_iem_array
from graphmean.permtest import contiguity_violations

THREADS = 2
ACCEPTANCE_SEED = 20_260_811

TWO_BLOCK = fixture("two-block-4.2")
N_GRID = [30, 100, 250, 500, 1000]
PAIRS = [(0, 0), (0, 1), (1, 1)]


def scaled_re(report, n):
    return {(s, t): report.cell(n, report.rows[0].m, s, t).scaled_re for s, t in PAIRS}


@pytest.fixture(scope="session")
def sweep_m20():
    return run_sbm_experiment(TWO_BLOCK, N_GRID, m=20, replicates=200,
                              seed=ACCEPTANCE_SEED, threads=THREADS)


@pytest.fixture(scope="session")
def sweep_m5():
    return run_sbm_experiment(TWO_BLOCK, [1000], m=5, replicates=200,
                              seed=ACCEPTANCE_SEED + 1, threads=THREADS)


@pytest.fixture(scope="session")
def sweep_m50():
    return run_sbm_experiment(TWO_BLOCK, [1000], m=50, replicates=200,
                              seed=ACCEPTANCE_SEED + 2, threads=THREADS)


def test_criterion_01_scaled_re_convergence(sweep_m20):
    """Scaled RE approaches the theoretical limit 4 for every block pair."""
    at_1000 = scaled_re(sweep_m20, 1000)
    for pair, value in at_1000.items():
        assert 3.5 <= value <= 4.5, f"pair {pair}: scaled RE {value:.3f} outside [3.5, 4.5]"

    # approach-to-4 trend from N=100 onward: per-pair deviations may not
    # grow by more than Monte Carlo slack, and the mean deviation shrinks
    trend_grid = [100, 250, 500, 1000]
    deviations = {pair: [abs(scaled_re(sweep_m20, n)[pair] - 4.0) for n in trend_grid]
                  for pair in PAIRS}
    for pair, devs in deviations.items():
        for step, (d1, d2) in enumerate(zip(devs, devs[1:])):
            assert d2 <= d1 + 0.15, (
                f"pair {pair}: deviation grew {d1:.3f} -> {d2:.3f} "
                f"between N={trend_grid[step]} and N={trend_grid[step + 1]}")
    mean_first = np.mean([deviations[p][0] for p in PAIRS])
    mean_last = np.mean([deviations[p][-1] for p in PAIRS])
    assert mean_last <= mean_first
    print(f"\n[criterion 1] PASS scaled RE at N=1000: "
          + ", ".join(f"{p}={v:.3f}" for p, v in at_1000.items())
          + f"; mean |dev| {mean_first:.3f} (N=100) -> {mean_last:.3f} (N=1000)")


def test_criterion_02_unequal_block_theory():
    """Scaled RE matches (1/rho_s + 1/rho_t) within 15% for rho=(0.8, 0.2)."""
    params = SbmParams(TWO_BLOCK.B, np.array([0.8, 0.2]))
    report = run_sbm_experiment(params, [1000], m=20, replicates=200,
                                seed=ACCEPTANCE_SEED + 3, threads=THREADS)
    expected = {(0, 0): 2.5, (0, 1): 6.25, (1, 1): 10.0}
    observed = scaled_re(report, 1000)
    for pair, theory in expected.items():
        rel = abs(observed[pair] - theory) / theory
        assert rel < 0.15, f"pair {pair}: scaled RE {observed[pair]:.3f} vs {theory} (rel {rel:.3f})"
    print("\n[criterion 2] PASS scaled RE vs theory: "
          + ", ".join(f"{p}={observed[p]:.3f}/{t}" for p, t in expected.items()))


def test_criterion_03_variance_law(sweep_m20):
    """N*M*Var(phat entry) matches the blockmodel limit within 15%."""
    n, m = 1000, 20
    details = []
    for s, t in PAIRS:
        row = sweep_m20.cell(n, m, s, t)
        observed = n * m * row.var_phat
        p = TWO_BLOCK.B[s, t]
        theory = (1.0 / TWO_BLOCK.rho[s] + 1.0 / TWO_BLOCK.rho[t]) * p * (1 - p)
        rel = abs(observed - theory) / theory
        assert rel < 0.15, f"pair {(s, t)}: NM*Var {observed:.4f} vs {theory:.4f} (rel {rel:.3f})"
        details.append(f"({s},{t})={observed:.3f}/{theory:.3f}")
    print("\n[criterion 3] PASS N*M*Var vs theory: " + ", ".join(details))


def test_criterion_04_abar_exactness(sweep_m20):
    """Empirical MSE of the sample mean sits on p(1-p)/M for every block pair."""
    n, m = 1000, 20
    details = []
    for s, t in PAIRS:
        row = sweep_m20.cell(n, m, s, t)
        p = TWO_BLOCK.B[s, t]
        theory = p * (1 - p) / m
        deviation = abs(row.mse_abar - theory)
        assert deviation < 3.0 * row.se_boot_mse_abar, (
            f"pair {(s, t)}: |{row.mse_abar:.3e} - {theory:.3e}| "
            f"exceeds 3 bootstrap SE ({row.se_boot_mse_abar:.3e})")
        details.append(f"({s},{t}) z={deviation / row.se_boot_mse_abar:.2f}")
    print("\n[criterion 4] PASS sample-mean MSE exact law: " + ", ".join(details))


def test_criterion_05_m_invariance(sweep_m20, sweep_m5, sweep_m50):
    """Scaled RE at N=1000 is insensitive to the number of graphs M."""
    values = {
        5: scaled_re(sweep_m5, 1000),
        20: scaled_re(sweep_m20, 1000),
        50: scaled_re(sweep_m50, 1000),
    }
    for pair in PAIRS:
        across = [values[m][pair] for m in (5, 20, 50)]
        spread = (max(across) - min(across)) / min(across)
        assert spread < 0.15, f"pair {pair}: scaled RE spread {spread:.3f} across M"
    print("\n[criterion 5] PASS scaled RE across M: "
          + "; ".join(f"M={m}: " + ",".join(f"{values[m][p]:.2f}" for p in PAIRS)
                      for m in (5, 20, 50)))


def test_criterion_06_lowrank_oracle():
    """Rank-d approximation equals brute-force truncation; error monotone in d."""
    rng = stream(ACCEPTANCE_SEED + 4, 0)
    worst = 0.0
    for case in range(100):
        n = int(rng.integers(2, 26))
        A = rng.normal(size=(n, n))
        A = (A + A.T) / 2.0
        vals, vecs = np.linalg.eigh(A)
        previous_error = np.inf
        for d in range(1, n + 1):
            keep = np.zeros(n)
            keep[n - d:] = vals[n - d:]
            oracle = (vecs * keep) @ vecs.T
            ours = lowrank(A, d)
            worst = max(worst, float(np.linalg.norm(ours - oracle)))
            assert np.linalg.norm(ours - oracle) < 1e-8
            error = np.linalg.norm(A - ours)
            assert error <= previous_error + 1e-10
            previous_error = error
    print(f"\n[criterion 6] PASS 100 matrices, all d: max |lowrank - oracle|_F = {worst:.2e}")


def test_criterion_07_lemma3_identity():
    """Quadratic-form identity of the limiting covariance, fixtures + random PSD."""
    rng = stream(ACCEPTANCE_SEED + 5, 0)
    cases = [(fixture("two-block-4.2").B, fixture("two-block-4.2").rho),
             (fixture("five-block-E").B, fixture("five-block-E").rho)]
    for case in range(50):
        K = int(rng.integers(2, 6))
        # rows with norms below 1 in the positive orthant keep B inside [0, 1]
        raw = np.abs(rng.normal(size=(K, K))) + 0.1
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        raw *= rng.uniform(0.3, 0.9, size=(K, 1))
        B = raw @ raw.T
        rho = rng.uniform(0.5, 2.0, size=K)
        cases.append((B, rho / rho.sum()))
    worst = 0.0
    for B, rho in cases:
        nu = psd_factorize(B)
        for s in range(B.shape[0]):
            for t in range(B.shape[0]):
                lhs = nu[s] @ sigma_matrix(nu, rho, nu[t]) @ nu[s]
                inner = nu[s] @ nu[t]
                rhs = inner * (1.0 - inner) / rho[s]
                worst = max(worst, abs(lhs - rhs))
                assert abs(lhs - rhs) < 1e-8
    print(f"\n[criterion 7] PASS {len(cases)} parameter sets, all (s,t): max residual {worst:.2e}")


def test_criterion_08_full_rank_synthetic_dominance():
    """Exhaustive m=1 cross-validation on the stored full-rank 70-vertex fixture."""
    P = fullrank70()
    rng = stream(ACCEPTANCE_SEED + 6, 0)
    batch = GraphBatch(tuple(
        AdjacencyMatrix(sample_iem_array(P.data, rng)) for _ in range(200)
    ))
    report = cross_validate(batch, m=1, replicates=0, method=ZG(3),
                            seed=ACCEPTANCE_SEED + 7, threads=THREADS)
    row = report.rows[0]
    assert report.config["exhaustive"] and report.replicates == 200
    assert row.re < 0.5, f"RE {row.re:.4f} not below 0.5"
    print(f"\n[criterion 8] PASS m=1 exhaustive CV: RE = {row.re:.4f} "
          f"(mse_abar {row.mse_abar:.4f}, mse_phat {row.mse_phat:.4f})")


def _complete_spatial(n):
    return SpatialAdjacency(1.0 - np.eye(n))


def _grid_spatial(rows, cols):
    n = rows * cols
    S = np.zeros((n, n))
    vid = lambda r, c: r * cols + c
    for r in range(rows):
        for c in range(cols):
            if r + 1 < rows:
                S[vid(r, c), vid(r + 1, c)] = S[vid(r + 1, c), vid(r, c)] = 1.0
            if c + 1 < cols:
                S[vid(r, c), vid(r, c + 1)] = S[vid(r, c + 1), vid(r, c)] = 1.0
    return SpatialAdjacency(S)


def test_criterion_09a_null_calibration():
    """p-values are uniform when labels are independent of latent positions."""
    n = 20
    spatial = _complete_spatial(n)
    labels = LabelAssignment.from_labels(["L0"] * 7 + ["L1"] * 7 + ["L2"] * 6)
    pvals = []
    for experiment in range(100):
        X = LatentPositions(stream(ACCEPTANCE_SEED + 8, experiment).normal(size=(n, 3)))
        res = perm_test(X, labels, spatial, k=10, replicates=200,
                        seed=ACCEPTANCE_SEED + 9 + experiment)
        pvals.append(res.p_value)
    ks = scipy.stats.kstest(np.array(pvals), "uniform")
    assert ks.pvalue > 0.01, f"KS p-value {ks.pvalue:.4f} rejects uniformity"
    print(f"\n[criterion 9a] PASS null calibration: KS statistic {ks.statistic:.3f}, "
          f"p = {ks.pvalue:.3f}")


def test_criterion_09b_power_on_planted_structure():
    """Clustered latent positions are detected at k=10."""
    spatial = _grid_spatial(5, 8)
    labels = LabelAssignment.from_labels(
        ["a" if v % 8 < 3 else ("b" if v % 8 < 6 else "c") for v in range(40)])
    centers = stream(ACCEPTANCE_SEED + 10, 0).normal(size=(3, 3)) * 3.0
    X = LatentPositions(np.vstack([
        centers[labels.codes[v]] + 0.2 * stream(ACCEPTANCE_SEED + 11, v).normal(size=3)
        for v in range(40)
    ]))
    res = perm_test(X, labels, spatial, k=10, replicates=1000,
                    seed=ACCEPTANCE_SEED + 12)
    assert res.p_value < 0.05, f"p = {res.p_value} not below 0.05"
    print(f"\n[criterion 9b] PASS power: t_observed = {res.t_observed:.3f}, "
          f"p = {res.p_value:.4f} over 1000 replicates")


def test_criterion_09c_flip_conservation():
    """Label counts are conserved exactly across 10^4 flips."""
    spatial = _grid_spatial(5, 8)
    labels = LabelAssignment.from_labels(
        ["a" if v % 8 < 3 else ("b" if v % 8 < 6 else "c") for v in range(40)])
    assert contiguity_violations(labels, spatial) == []
    baseline = labels.counts()
    flips_done = 0
    rep = 0
    while flips_done < 10_000:
        k = 4
        flipped = uniform_k_flip(labels, spatial, k, stream(ACCEPTANCE_SEED + 13, rep))
        np.testing.assert_array_equal(flipped.counts(), baseline)
        flips_done += k
        rep += 1
    print(f"\n[criterion 9c] PASS conservation over {flips_done} flips "
          f"({rep} k-flips of k=4)")


def test_criterion_10_cli_determinism(tmp_path):
    """Identical seed and config give byte-identical outputs at 1 and 8 threads."""
    outputs = {}
    for threads in (1, 8):
        out = tmp_path / f"sweep-{threads}.csv"
        cmd = [sys.executable, "-m", "graphmean.cli", "re-sweep",
               "--fixture", "two-block-4.2", "--n", "40,80", "--m", "4",
               "--replicates", "12", "--seed", "99", "--threads", str(threads),
               "--out", str(out)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs[threads] = out.read_bytes()
    assert outputs[1] == outputs[8]

    rerun = tmp_path / "sweep-rerun.csv"
    cmd = [sys.executable, "-m", "graphmean.cli", "re-sweep",
           "--fixture", "two-block-4.2", "--n", "40,80", "--m", "4",
           "--replicates", "12", "--seed", "99", "--threads", "8",
           "--out", str(rerun)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert rerun.read_bytes() == outputs[8]
    print("\n[criterion 10] PASS re-sweep outputs byte-identical at 1 vs 8 threads and on rerun")
