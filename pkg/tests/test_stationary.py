import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from dgsp.generators import directed_er
from dgsp.graphs import ShiftOperator, adjacency_shift, directed_cycle
from dgsp.stationary import (CovarianceEstimate, StationaryModel,
                             estimate_covariance, fit_taps_from_covariance,
                             fit_taps_gradient, fit_taps_objective, generate,
                             model_covariance)


def normalized_er_shift(n, p, seed):
    S = adjacency_shift(directed_er(n, p, seed=seed))
    r = S.spectral_radius()
    return ShiftOperator(S.toarray() / r) if r > 0 else S


class TestGenerate:
    def test_identity_filter_white_samples(self):
        S = normalized_er_shift(6, 0.4, 0)
        model = StationaryModel(S=S, h=np.array([1.0]))
        X = generate(model, 200_000, seed=1)
        C = estimate_covariance(X).C
        assert np.linalg.norm(C - np.eye(6)) <= 0.05 * np.linalg.norm(np.eye(6)) * 6

    def test_pure_shift_on_cycle_stays_white(self):
        S = adjacency_shift(directed_cycle(6))
        model = StationaryModel(S=S, h=np.array([0.0, 1.0]))
        C = model_covariance(model).C
        assert_allclose(C, np.eye(6), atol=1e-12)  # S S^T = I for a permutation
        X = generate(model, 100_000, seed=2)
        Chat = estimate_covariance(X).C
        assert np.linalg.norm(Chat - np.eye(6)) / np.linalg.norm(np.eye(6)) <= 0.05

    def test_deterministic_given_seed(self):
        S = normalized_er_shift(5, 0.4, 3)
        model = StationaryModel(S=S, h=np.array([1.0, 0.5]))
        assert_array_equal(generate(model, 50, seed=9), generate(model, 50, seed=9))

    def test_signed_bernoulli_moments(self):
        S = normalized_er_shift(4, 0.4, 4)
        model = StationaryModel(S=S, h=np.array([1.0]),
                                input_law="signed-bernoulli", p=0.25)
        X = generate(model, 300_000, seed=5)
        # white unit-variance inputs with sparse support
        assert abs(X.mean()) <= 0.01
        assert np.var(X) == pytest.approx(1.0, abs=0.02)
        assert np.mean(X == 0.0) == pytest.approx(0.75, abs=0.01)

    def test_unknown_law_rejected(self):
        S = normalized_er_shift(4, 0.4, 5)
        with pytest.raises(ValueError, match="input law"):
            StationaryModel(S=S, h=np.array([1.0]), input_law="poisson")


class TestModelCovariance:
    def test_identity_filter(self):
        S = normalized_er_shift(5, 0.4, 6)
        C = model_covariance(StationaryModel(S=S, h=np.array([1.0]))).C
        assert_allclose(C, np.eye(5), atol=1e-14)

    def test_symmetric_shift_shares_eigenvectors(self):
        rng = np.random.default_rng(7)
        M = rng.standard_normal((6, 6))
        S = ShiftOperator(0.5 * (M + M.T))
        h = np.array([1.0, 0.4, 0.1])
        C = model_covariance(StationaryModel(S=S, h=h)).C
        lam_s, V = np.linalg.eigh(S.toarray())
        # V diagonalizes C as well: off-diagonal residue vanishes
        D = V.T @ C @ V
        off = D - np.diag(np.diag(D))
        assert np.linalg.norm(off) <= 1e-10 * np.linalg.norm(D)

    def test_non_normal_chain_eigenvectors_differ(self):
        # 3-node directed chain 0 -> 1 -> 2 (nilpotent, non-normal)
        S = ShiftOperator(np.array([[0.0, 0.0, 0.0],
                                    [1.0, 0.0, 0.0],
                                    [0.0, 1.0, 0.0]]))
        h = np.array([1.0, 0.5])
        C = model_covariance(StationaryModel(S=S, h=h)).C
        v = np.array([0.0, 0.0, 1.0])  # the unique eigenvector of S
        _, W = np.linalg.eigh(C)
        angles = [np.arccos(min(abs(float(v @ W[:, k])), 1.0)) for k in range(3)]
        assert min(angles) > 1e-3

    def test_psd_and_symmetric(self):
        S = normalized_er_shift(7, 0.4, 8)
        cov = model_covariance(StationaryModel(S=S, h=np.array([1.0, -0.6, 0.2])))
        assert_allclose(cov.C, cov.C.T, atol=1e-15)
        assert np.linalg.eigvalsh(cov.C)[0] >= -1e-10


class TestEstimateCovariance:
    def test_single_sample_rank_one(self):
        x = np.array([[1.0], [2.0], [-1.0]])
        C = estimate_covariance(x).C
        assert_allclose(C, np.outer(x[:, 0], x[:, 0]))
        assert np.linalg.matrix_rank(C) == 1

    def test_zero_samples_zero_matrix(self):
        C = estimate_covariance(np.zeros((4, 10))).C
        assert_array_equal(C, np.zeros((4, 4)))

    def test_large_sample_convergence(self):
        S = normalized_er_shift(6, 0.4, 9)
        model = StationaryModel(S=S, h=np.array([1.0, 0.5]))
        Ctrue = model_covariance(model).C
        X = generate(model, 100_000, seed=10)
        Chat = estimate_covariance(X).C
        rel = np.linalg.norm(Chat - Ctrue) / np.linalg.norm(Ctrue)
        assert rel <= 0.05

    def test_more_samples_reduce_error(self):
        S = normalized_er_shift(6, 0.4, 11)
        model = StationaryModel(S=S, h=np.array([1.0, 0.5]))
        Ctrue = model_covariance(model).C
        wins = 0
        for seed in range(20):
            e_small = np.linalg.norm(
                estimate_covariance(generate(model, 1000, seed=seed)).C - Ctrue)
            e_big = np.linalg.norm(
                estimate_covariance(generate(model, 100_000, seed=seed)).C - Ctrue)
            wins += e_big < e_small
        assert wins >= 19

    def test_asymmetric_input_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            CovarianceEstimate(C=np.array([[1.0, 0.5], [0.0, 1.0]]), R=1)


class TestFitTaps:
    def test_identity_covariance_unit_tap(self):
        S = normalized_er_shift(5, 0.4, 12)
        fit = fit_taps_from_covariance(np.eye(5), S, 1, seed=0)
        assert abs(fit.h[0]) == pytest.approx(1.0, abs=1e-8)
        assert fit.residual <= 1e-12

    def test_roundtrip_recovery(self):
        for seed in range(8):
            S = normalized_er_shift(6, 0.4, 100 + seed)
            rng = np.random.default_rng(seed)
            h = np.array([1.0, rng.uniform(0.3, 0.8)])
            C = model_covariance(StationaryModel(S=S, h=h)).C
            fit = fit_taps_from_covariance(C, S, 2, seed=seed)
            assert fit.residual <= 1e-8
            sign = np.sign(fit.h @ h)
            assert np.linalg.norm(sign * fit.h - h) <= 1e-4

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        S = normalized_er_shift(6, 0.4, 13)
        M = rng.standard_normal((6, 6))
        Chat = M @ M.T
        for _ in range(5):
            h = rng.standard_normal(3)
            g = fit_taps_gradient(Chat, S, h)
            fd = np.zeros(3)
            eps = 1e-6
            for i in range(3):
                e = np.zeros(3)
                e[i] = eps
                fd[i] = (fit_taps_objective(Chat, S, h + e) -
                         fit_taps_objective(Chat, S, h - e)) / (2 * eps)
            assert np.linalg.norm(g - fd) <= 1e-5 * max(np.linalg.norm(fd), 1.0)

    def test_sign_ambiguity_exact(self):
        S = normalized_er_shift(5, 0.4, 14)
        rng = np.random.default_rng(14)
        Chat = np.eye(5)
        h = rng.standard_normal(2)
        assert fit_taps_objective(Chat, S, h) == fit_taps_objective(Chat, S, -h)

    def test_objective_trace_non_increasing(self):
        S = normalized_er_shift(6, 0.4, 15)
        rng = np.random.default_rng(15)
        M = rng.standard_normal((6, 6))
        fit = fit_taps_from_covariance(M @ M.T, S, 2, seed=15)
        assert np.all(np.diff(fit.objective) <= 1e-12)
