import json

import numpy as np
import pytest

from graphmean import (LatentPositions, Membership, ProbabilityMatrix,
                       SbmParams, ValidationError, fixture, fullrank70,
                       load_sbm_json, psd_factorize, rdpg_probability_matrix,
                       sample_iem_graph, sample_memberships,
                       sbm_probability_matrix, stream)

TWO_BLOCK_B = np.array([[0.42, 0.2], [0.2, 0.7]])
FIVE_BLOCK_B = np.array([
    [0.90, 0.27, 0.05, 0.10, 0.30],
    [0.27, 0.67, 0.02, 0.26, 0.14],
    [0.05, 0.02, 0.44, 0.25, 0.33],
    [0.10, 0.26, 0.25, 0.70, 0.18],
    [0.30, 0.14, 0.33, 0.18, 0.58],
])
FIVE_BLOCK_RHO = np.array([0.22, 0.39, 0.05, 0.16, 0.18])


class TestFixtures:
    def test_two_block_matches_reference_values(self):
        params = fixture("two-block-4.2")
        np.testing.assert_array_equal(params.B, TWO_BLOCK_B)
        np.testing.assert_array_equal(params.rho, [0.5, 0.5])

    def test_five_block_matches_reference_values(self):
        params = fixture("five-block-E")
        np.testing.assert_array_equal(params.B, FIVE_BLOCK_B)
        np.testing.assert_array_equal(params.rho, FIVE_BLOCK_RHO)

    def test_unknown_fixture(self):
        with pytest.raises(ValidationError, match="unknown fixture"):
            fixture("six-block")

    def test_json_loading(self, tmp_path):
        path = tmp_path / "sbm.json"
        path.write_text(json.dumps({"B": TWO_BLOCK_B.tolist(), "rho": [0.5, 0.5]}))
        params = load_sbm_json(path)
        np.testing.assert_array_equal(params.B, TWO_BLOCK_B)

    def test_fullrank70_is_full_rank(self):
        p = fullrank70()
        assert p.n == 70
        assert np.sum(np.abs(np.linalg.eigvalsh(p.data)) > 1e-10) == 70


class TestSbmParams:
    def test_rejects_zero_rho(self):
        with pytest.raises(ValidationError, match="positive"):
            SbmParams(TWO_BLOCK_B, np.array([1.0, 0.0]))

    def test_rejects_rho_not_summing_to_one(self):
        with pytest.raises(ValidationError, match="sum to 1"):
            SbmParams(TWO_BLOCK_B, np.array([0.5, 0.4]))

    def test_rejects_non_psd_when_required(self):
        B = np.array([[0.1, 0.9], [0.9, 0.1]])
        with pytest.raises(ValidationError, match="positive semidefinite"):
            SbmParams(B, np.array([0.5, 0.5]))
        SbmParams(B, np.array([0.5, 0.5]), requires_psd=False)

    def test_rank(self):
        assert fixture("two-block-4.2").rank == 2
        assert fixture("five-block-E").rank == 5


class TestSampleMemberships:
    def test_degenerate_category(self):
        tau = sample_memberships([1.0], 5, stream(0, 0))
        np.testing.assert_array_equal(tau.tau, np.zeros(5, dtype=int))

    def test_counts_within_binomial_ci(self):
        n = 10_000
        tau = sample_memberships([0.5, 0.5], n, stream(1, 0))
        zeros = int(np.sum(tau.tau == 0))
        assert abs(zeros - n / 2) < 3.0 * np.sqrt(n * 0.25)

    def test_deterministic_for_fixed_seed(self):
        a = sample_memberships([0.3, 0.7], 50, stream(9, 4))
        b = sample_memberships([0.3, 0.7], 50, stream(9, 4))
        np.testing.assert_array_equal(a.tau, b.tau)

    def test_invalid_rho(self):
        with pytest.raises(ValidationError):
            sample_memberships([0.5, 0.6], 10, stream(0, 0))


class TestSbmProbabilityMatrix:
    def test_cross_block_entry(self):
        params = fixture("two-block-4.2")
        P = sbm_probability_matrix(params, Membership([0, 1]))
        assert P.data[0, 1] == 0.2

    def test_within_block_entry(self):
        params = fixture("two-block-4.2")
        # with a zero diagonal only the off-diagonal entry is observable
        P = sbm_probability_matrix(params, Membership([0, 0]))
        assert P.data[0, 1] == 0.42

    def test_five_block_pair(self):
        params = fixture("five-block-E")
        P = sbm_probability_matrix(params, Membership([0, 4]))
        assert P.data[0, 1] == 0.30

    def test_label_out_of_range(self):
        with pytest.raises(ValidationError, match="out of range"):
            sbm_probability_matrix(fixture("two-block-4.2"), Membership([0, 2]))

    def test_at_most_k_choose_2_plus_k_distinct_values(self):
        params = fixture("five-block-E")
        tau = sample_memberships(params.rho, 60, stream(3, 0))
        P = sbm_probability_matrix(params, tau)
        off = P.data[np.triu_indices(60, 1)]
        K = params.K
        assert np.unique(off).size <= K * (K + 1) // 2

    def test_full_p_rank_at_most_k(self):
        params = fixture("five-block-E")
        tau = sample_memberships(params.rho, 50, stream(4, 0)).tau
        full = params.B[np.ix_(tau, tau)]  # diagonal kept at B[tau_i, tau_i]
        rank = np.sum(np.abs(np.linalg.eigvalsh(full)) > 1e-9)
        assert rank <= params.K


class TestRdpg:
    def test_identical_rows_give_constant_offdiagonal(self):
        x = np.array([0.3, 0.45, 0.1])
        x = x * np.sqrt(0.3 / (x @ x))
        X = LatentPositions(np.tile(x, (6, 1)))
        P = rdpg_probability_matrix(X)
        off = P.data[np.triu_indices(6, 1)]
        np.testing.assert_allclose(off, 0.3, atol=1e-12)

    def test_factorization_round_trip_matches_sbm(self):
        params = fixture("two-block-4.2")
        nu = psd_factorize(params.B)
        tau = sample_memberships(params.rho, 40, stream(5, 0))
        P_sbm = sbm_probability_matrix(params, tau)
        P_rdpg = rdpg_probability_matrix(LatentPositions(nu[tau.tau]))
        np.testing.assert_allclose(P_rdpg.data, P_sbm.data, atol=1e-12)

    def test_scalar_inner_product(self):
        P = rdpg_probability_matrix(LatentPositions(np.array([[0.5], [0.8]])))
        assert P.data[0, 1] == pytest.approx(0.4)

    def test_rejects_out_of_range_inner_products(self):
        X = LatentPositions(np.array([[1.2], [1.1]]))
        with pytest.raises(ValidationError, match="inner products"):
            rdpg_probability_matrix(X)


class TestSampleIem:
    def test_all_zero_probability(self):
        P = ProbabilityMatrix(np.zeros((6, 6)))
        g = sample_iem_graph(P, stream(0, 0))
        assert g.data.sum() == 0.0

    def test_all_one_probability(self):
        P = np.ones((6, 6))
        np.fill_diagonal(P, 0.0)
        g = sample_iem_graph(ProbabilityMatrix(P), stream(0, 0))
        assert g.data.sum() == 6 * 5

    def test_edge_count_within_binomial_ci(self):
        n, p = 100, 0.3
        P = np.full((n, n), p)
        np.fill_diagonal(P, 0.0)
        g = sample_iem_graph(ProbabilityMatrix(P), stream(2, 0))
        pairs = n * (n - 1) / 2
        count = g.data.sum() / 2
        assert abs(count - p * pairs) < 3.0 * np.sqrt(pairs * p * (1 - p))

    def test_deterministic_per_seed(self):
        P = ProbabilityMatrix(np.full((10, 10), 0.5) - 0.5 * np.eye(10))
        a = sample_iem_graph(P, stream(7, 1))
        b = sample_iem_graph(P, stream(7, 1))
        np.testing.assert_array_equal(a.data, b.data)

    def test_edge_frequency_converges_to_p(self):
        # per-entry 3-sigma binomial bound, allowing the expected ~0.3%
        # of entries to brush against it but none to exceed 4 sigma
        n, R = 15, 400
        rng = stream(8, 0)
        base = np.triu(rng.uniform(0.1, 0.9, size=(n, n)), 1)
        P = base + base.T
        freq = np.zeros((n, n))
        for _ in range(R):
            freq += sample_iem_graph(ProbabilityMatrix(P), rng).data
        freq /= R
        iu = np.triu_indices(n, 1)
        sigma = np.sqrt(P[iu] * (1 - P[iu]) / R)
        z = np.abs(freq[iu] - P[iu]) / sigma
        assert np.mean(z < 3.0) > 0.99
        assert z.max() < 4.0


class TestPsdFactorize:
    def test_identity(self):
        nu = psd_factorize(np.eye(2))
        np.testing.assert_allclose(nu @ nu.T, np.eye(2), atol=1e-12)

    def test_two_block_reconstruction(self):
        nu = psd_factorize(TWO_BLOCK_B)
        assert nu.shape == (2, 2)
        assert np.linalg.norm(nu @ nu.T - TWO_BLOCK_B) < 1e-10

    def test_five_block_rank(self):
        nu = psd_factorize(FIVE_BLOCK_B)
        assert nu.shape == (5, 5)
        assert np.linalg.norm(nu @ nu.T - FIVE_BLOCK_B) < 1e-10

    def test_rejects_indefinite(self):
        with pytest.raises(ValidationError, match="not PSD"):
            psd_factorize(np.array([[0.0, 1.0], [1.0, 0.0]]))
