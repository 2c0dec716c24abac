import numpy as np
import pytest
from numpy.testing import assert_allclose

from dgsp.filters import apply_polynomial, polynomial_matrix
from dgsp.generators import directed_er
from dgsp.graphs import ShiftOperator, adjacency_shift, directed_cycle
from dgsp.inverse import (DeconProblem, blind_deconvolve, deconvolve_sparse,
                          identify_system, lifted_adjoint, lifted_forward,
                          localize_sources, problem_from_json, problem_to_json)

from oracles import cd_lasso, lasso_objective


def normalized_er_shift(n, p, seed):
    S = adjacency_shift(directed_er(n, p, seed=seed))
    r = S.spectral_radius()
    return ShiftOperator(S.toarray() / r) if r > 0 else S


class TestDeconvolveSparse:
    def test_identity_filter_small_alpha(self):
        rng = np.random.default_rng(0)
        S = normalized_er_shift(8, 0.3, 1)
        y = rng.standard_normal(8)
        p = DeconProblem(S=S, h=np.array([1.0]), ybar=y, alpha=1e-10)
        res = deconvolve_sparse(p, tol=1e-14)
        assert_allclose(res.x, y, atol=1e-6)

    def test_null_threshold_factor_two(self):
        rng = np.random.default_rng(1)
        S = normalized_er_shift(8, 0.3, 2)
        h = np.array([1.0, 0.5, 0.25])
        y = rng.standard_normal(8)
        HM = polynomial_matrix(S, h)
        alpha = 2.0 * np.max(np.abs(HM.T @ y)) * (1 + 1e-10)
        res = deconvolve_sparse(DeconProblem(S=S, h=h, ybar=y, alpha=alpha))
        assert_allclose(res.x, np.zeros(8))

    def test_support_recovery_with_cd_oracle_agreement(self):
        h = np.array([1.0, 0.5, 0.25])
        for seed in range(10):
            rng = np.random.default_rng(seed)
            S = normalized_er_shift(10, 0.3, 100 + seed)
            x = np.zeros(10)
            supp = rng.choice(10, size=2, replace=False)
            x[supp] = rng.choice([-1.0, 1.0], 2) * rng.uniform(0.75, 1.5, 2)
            y = apply_polynomial(S, h, x)
            p = DeconProblem(S=S, h=h, ybar=y, alpha=1e-3)
            res = deconvolve_sparse(p, tol=1e-14)
            H = polynomial_matrix(S, h)
            xcd = cd_lasso(H, y, 1e-3)
            assert lasso_objective(H, y, 1e-3, res.x) == pytest.approx(
                lasso_objective(H, y, 1e-3, xcd), abs=1e-6)
            assert set(np.flatnonzero(np.abs(res.x) > 1e-8)) == set(supp.tolist())

    def test_sampled_observations(self):
        rng = np.random.default_rng(2)
        S = normalized_er_shift(10, 0.4, 3)
        h = np.array([1.0, 0.5, 0.25])
        x = np.zeros(10)
        x[[2, 7]] = [1.0, -1.2]
        y = apply_polynomial(S, h, x)
        idx = np.array([0, 1, 2, 4, 5, 7, 8, 9])
        p = DeconProblem(S=S, h=h, ybar=y[idx], indices=idx, alpha=1e-4)
        res = deconvolve_sparse(p, tol=1e-14)
        assert set(np.flatnonzero(np.abs(res.x) > 1e-6)) == {2, 7}

    def test_objective_monotone(self):
        rng = np.random.default_rng(3)
        S = normalized_er_shift(8, 0.3, 4)
        y = rng.standard_normal(8)
        res = deconvolve_sparse(DeconProblem(S=S, h=np.array([1.0, 0.5]),
                                             ybar=y, alpha=0.1))
        assert np.all(np.diff(res.objective) <= 1e-12)


class TestLocalizeSources:
    def test_single_source_on_cycle(self):
        S = adjacency_shift(directed_cycle(8))
        h = np.array([1.0, 0.6, 0.3])
        x = np.zeros(8)
        x[3] = 1.0
        y = apply_polynomial(S, h, x)
        p = DeconProblem(S=S, h=h, ybar=y, alpha=1e-3)
        assert list(localize_sources(p, 0.1)) == [3]

    def test_threshold_one_keeps_argmax_only(self):
        S = adjacency_shift(directed_cycle(6))
        h = np.array([1.0, 0.5])
        x = np.zeros(6)
        x[[1, 4]] = [2.0, 1.0]
        y = apply_polynomial(S, h, x)
        p = DeconProblem(S=S, h=h, ybar=y, alpha=1e-6)
        got = localize_sources(p, 1.0)
        assert len(got) <= 1

    def test_zero_observations_empty_support(self):
        S = adjacency_shift(directed_cycle(6))
        p = DeconProblem(S=S, h=np.array([1.0, 0.5]), ybar=np.zeros(6), alpha=0.1)
        assert localize_sources(p, 0.1).size == 0


class TestIdentifySystem:
    def test_noiseless_roundtrip(self):
        rng = np.random.default_rng(0)
        S = normalized_er_shift(9, 0.3, 5)
        h = np.array([0.8, -0.4, 0.2])
        X = rng.standard_normal((9, 4))
        Y = np.column_stack([apply_polynomial(S, h, X[:, r]) for r in range(4)])
        res = identify_system(S, X, Y, L=3, alpha=1e-12, tol=1e-14)
        assert np.linalg.norm(res.x - h) <= 1e-6

    def test_huge_alpha_zeroes_taps(self):
        rng = np.random.default_rng(1)
        S = normalized_er_shift(8, 0.3, 6)
        X = rng.standard_normal((8, 3))
        Y = rng.standard_normal((8, 3))
        res = identify_system(S, X, Y, L=3, alpha=1e6)
        assert_allclose(res.x, np.zeros(3))

    def test_unit_weights_match_plain_lasso(self):
        # role swap: with omega = 1 the problem is the deconvolution
        # lasso in h; cross-check against the coordinate-descent oracle
        rng = np.random.default_rng(2)
        S = normalized_er_shift(8, 0.3, 7)
        h = np.array([1.0, 0.3, -0.2])
        X = rng.standard_normal((8, 2))
        Y = np.column_stack([apply_polynomial(S, h, X[:, r]) for r in range(2)])
        alpha = 0.05
        res = identify_system(S, X, Y, L=3, alpha=alpha, tol=1e-14)
        cols = []
        for r in range(2):
            from dgsp.graphs import shift_powers
            cols.append(np.column_stack(shift_powers(S, X[:, r], 2)))
        A = np.vstack(cols)
        y = Y.T.reshape(-1)
        xcd = cd_lasso(A, y, alpha)
        assert lasso_objective(A, y, alpha, res.x) == pytest.approx(
            lasso_objective(A, y, alpha, xcd), abs=1e-8)

    def test_nonincreasing_weights_rejected(self):
        S = normalized_er_shift(6, 0.4, 8)
        with pytest.raises(ValueError, match="nondecreasing"):
            identify_system(S, np.ones((6, 1)), np.ones((6, 1)), L=2,
                            omega=np.array([2.0, 1.0]))

    def test_underdetermined_rejected(self):
        S = normalized_er_shift(6, 0.4, 9)
        X = np.ones((6, 1))
        Y = np.ones((2, 1))
        with pytest.raises(ValueError, match="underdetermined"):
            identify_system(S, X, Y, L=3, alpha=0.0, indices=np.array([0, 1]))

    def test_weighted_penalty_prefers_low_order(self):
        rng = np.random.default_rng(3)
        S = normalized_er_shift(8, 0.3, 10)
        h = np.array([1.0, 0.5, 0.0, 0.0])
        X = rng.standard_normal((8, 3))
        Y = np.column_stack([apply_polynomial(S, h, X[:, r]) for r in range(3)])
        omega = np.array([1.0, 1.0, 4.0, 4.0])
        res = identify_system(S, X, Y, L=4, alpha=0.05, omega=omega, tol=1e-14)
        assert np.all(np.abs(res.x[2:]) <= 1e-8)
        assert np.linalg.norm(res.x[:2] - h[:2]) <= 0.05


class TestLiftedOperator:
    def test_forward_matches_filter_on_rank_one(self):
        S = adjacency_shift(directed_cycle(7))
        rng = np.random.default_rng(0)
        x = rng.standard_normal(7)
        h = rng.standard_normal(3)
        assert_allclose(lifted_forward(S, np.outer(x, h)),
                        apply_polynomial(S, h, x), atol=1e-12)

    def test_adjoint_identity(self):
        rng = np.random.default_rng(1)
        S = ShiftOperator(rng.standard_normal((6, 6)) * (rng.random((6, 6)) < 0.5))
        for _ in range(10):
            Z = rng.standard_normal((6, 4))
            y = rng.standard_normal(6)
            lhs = float(lifted_forward(S, Z) @ y)
            rhs = float(np.sum(Z * lifted_adjoint(S, y, 4)))
            assert lhs == pytest.approx(rhs, abs=1e-10)


class TestBlindDeconvolve:
    def test_zero_observations(self):
        S = adjacency_shift(directed_cycle(8))
        res = blind_deconvolve(S, np.zeros(8), 3, 0.1, 0.1)
        assert_allclose(res.Z, np.zeros((8, 3)))

    def test_null_thresholds(self):
        S = adjacency_shift(directed_cycle(8))
        rng = np.random.default_rng(2)
        y = rng.standard_normal(8)
        G = lifted_adjoint(S, y, 3)
        spec = np.linalg.svd(G, compute_uv=False)[0]
        rowmax = np.max(np.linalg.norm(G, axis=1))
        res1 = blind_deconvolve(S, y, 3, 2.0 * spec * 1.01, 0.0, tol=1e-12)
        assert np.linalg.norm(res1.Z) <= 1e-6
        res2 = blind_deconvolve(S, y, 3, 0.0, 2.0 * rowmax * 1.01, tol=1e-12)
        assert np.linalg.norm(res2.Z) <= 1e-6

    def test_cycle_recovery_and_sign_convention(self):
        S = adjacency_shift(directed_cycle(16))
        rng = np.random.default_rng(7)
        x = np.zeros(16)
        x[[2, 9]] = [1.3, -0.8]  # separation >= filter length
        h = np.array([1.0, 0.55, 0.4])
        h /= np.linalg.norm(h)
        y = apply_polynomial(S, h, x)
        res = blind_deconvolve(S, y, 3, 1e-3, 1e-2, tol=1e-10)
        Zt = np.outer(x, h)
        assert np.linalg.norm(res.Z - Zt) <= 1e-2 * np.linalg.norm(Zt)
        assert res.h[np.argmax(np.abs(res.h))] > 0
        assert np.linalg.norm(res.h) == pytest.approx(1.0, abs=1e-9)
        assert_allclose(np.outer(res.x, res.h), res.Z, atol=1e-6)

    def test_objective_trace_monotone(self):
        S = adjacency_shift(directed_cycle(8))
        rng = np.random.default_rng(3)
        y = rng.standard_normal(8)
        res = blind_deconvolve(S, y, 3, 0.05, 0.05, max_iters=500)
        assert np.all(np.diff(res.objective) <= 0.0)

    def test_scaling_ambiguity_resolved_by_convention(self):
        # (c x, h / c) gives the same lifted matrix; the reported factors
        # are normalized, so they must not depend on the planted scale
        S = adjacency_shift(directed_cycle(12))
        x = np.zeros(12)
        x[[1, 6]] = [1.0, 0.7]
        h = np.array([1.0, 0.5, 0.3])
        y1 = apply_polynomial(S, h, x)
        y2 = apply_polynomial(S, h / 2.0, 2.0 * x)
        assert_allclose(y1, y2, atol=1e-12)
        r1 = blind_deconvolve(S, y1, 3, 1e-3, 1e-2)
        r2 = blind_deconvolve(S, y2, 3, 1e-3, 1e-2)
        assert_allclose(r1.h, r2.h, atol=1e-6)


def test_problem_json_roundtrip():
    S = adjacency_shift(directed_cycle(5))
    p = DeconProblem(S=S, h=np.array([1.0, 0.5]), ybar=np.arange(3, dtype=float),
                     indices=np.array([0, 2, 4]), alpha=0.25)
    q = problem_from_json(problem_to_json(p))
    assert_allclose(q.S.toarray(), p.S.toarray())
    assert_allclose(q.h, p.h)
    assert_allclose(q.ybar, p.ybar)
    assert_allclose(q.indices, p.indices)
    assert q.alpha == p.alpha
