import numpy as np
import pytest
from numpy.testing import assert_allclose

from dgsp.dgft import learn_dgft
from dgsp.filters import (apply_edge_variant, apply_node_variant,
                          apply_polynomial, apply_spectral, design_taps,
                          ideal_lowpass, polynomial_matrix, taps_from_json,
                          taps_to_json)
from dgsp.generators import directed_er
from dgsp.gft import eigen_gft_basis
from dgsp.graphs import ShiftOperator, adjacency_shift


def random_shift(n, seed, density=0.5):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n)) * (rng.random((n, n)) < density)
    return ShiftOperator(M)


def diagonalizable_shift(n, seed, cond_cap=50.0):
    rng = np.random.default_rng(seed)
    while True:
        M = rng.standard_normal((n, n))
        lam = np.linalg.eigvals(M)
        if np.linalg.cond(np.linalg.eig(M)[1]) < cond_cap and \
           np.min(np.abs(lam[:, None] - lam[None, :]) + np.eye(n)) > 0.05:
            return ShiftOperator(M)


class TestApplyPolynomial:
    def test_identity_taps(self):
        S = random_shift(5, 0)
        x = np.random.default_rng(1).standard_normal(5)
        assert_allclose(apply_polynomial(S, [1.0], x), x)

    def test_pure_shift(self):
        S = random_shift(5, 2)
        x = np.random.default_rng(3).standard_normal(5)
        assert_allclose(apply_polynomial(S, [0.0, 1.0], x), S.toarray() @ x)

    def test_against_dense_power_oracle(self):
        S = random_shift(6, 4)
        rng = np.random.default_rng(5)
        h = rng.standard_normal(4)
        x = rng.standard_normal(6)
        M = S.toarray()
        H = h[0] * np.eye(6) + h[1] * M + h[2] * M @ M + h[3] * M @ M @ M
        assert_allclose(apply_polynomial(S, h, x), H @ x, atol=1e-10)
        assert_allclose(polynomial_matrix(S, h), H, atol=1e-10)

    def test_shift_invariance(self):
        S = random_shift(7, 6)
        rng = np.random.default_rng(7)
        h = rng.standard_normal(4)
        x = rng.standard_normal(7)
        lhs = apply_polynomial(S, h, S.toarray() @ x)
        rhs = S.toarray() @ apply_polynomial(S, h, x)
        assert_allclose(lhs, rhs, atol=1e-10)

    def test_linearity(self):
        S = random_shift(6, 8)
        rng = np.random.default_rng(9)
        h = rng.standard_normal(3)
        x, y = rng.standard_normal(6), rng.standard_normal(6)
        assert_allclose(apply_polynomial(S, h, 2.0 * x - y),
                        2.0 * apply_polynomial(S, h, x) - apply_polynomial(S, h, y),
                        atol=1e-10)


class TestApplySpectral:
    def test_all_ones_is_identity(self):
        S = diagonalizable_shift(6, 0)
        basis = eigen_gft_basis(S)
        x = np.random.default_rng(1).standard_normal(6)
        assert_allclose(apply_spectral(basis, np.ones(6), x), x, atol=1e-10)

    def test_polynomial_response_equivalence(self):
        # g = p(lambda) acts exactly like the polynomial filter with taps p
        S = diagonalizable_shift(6, 2)
        basis = eigen_gft_basis(S)
        rng = np.random.default_rng(3)
        h = rng.standard_normal(4)
        g = np.polyval(h[::-1], basis.lam)
        x = rng.standard_normal(6)
        want = apply_polynomial(S, h, x)
        got = apply_spectral(basis, g, x)
        assert got.dtype.kind == "f"  # imaginary residue removed
        assert np.linalg.norm(got - want) <= 1e-8 * max(np.linalg.norm(want), 1.0)

    def test_ortho_case_symmetric_operator(self):
        A = adjacency_shift(directed_er(6, 0.4, seed=4))
        basis = learn_dgft(A, seed=4)
        g = np.random.default_rng(5).standard_normal(6)
        for i in range(6):
            for j in range(i + 1, 6):
                ei, ej = np.zeros(6), np.zeros(6)
                ei[i] = 1.0
                ej[j] = 1.0
                assert apply_spectral(basis, g, ei)[j] == pytest.approx(
                    apply_spectral(basis, g, ej)[i], abs=1e-10)

    def test_complex_output_warns(self):
        S = diagonalizable_shift(6, 6)
        basis = eigen_gft_basis(S)
        g = np.random.default_rng(7).standard_normal(6) \
            + 1j * np.random.default_rng(8).standard_normal(6)
        x = np.random.default_rng(9).standard_normal(6)
        with pytest.warns(UserWarning, match="imaginary residue"):
            y = apply_spectral(basis, g, x)
        assert np.iscomplexobj(y)


class TestDesignTaps:
    def test_recovers_polynomial_coefficients(self):
        rng = np.random.default_rng(0)
        lam = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        p = rng.standard_normal(4)
        g = np.polyval(p[::-1], lam)
        design = design_taps(lam, g, 4)
        assert_allclose(design.h, p, atol=1e-8)
        assert design.residual <= 1e-8
        assert not design.rank_deficient

    def test_unit_response_gives_delta_taps(self):
        rng = np.random.default_rng(1)
        lam = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        design = design_taps(lam, np.ones(6), 4)
        want = np.zeros(4)
        want[0] = 1.0
        assert_allclose(design.h, want, atol=1e-8)

    def test_full_interpolation(self):
        # real shifts have conjugate-symmetric spectra; a real-coefficient
        # response function is then exactly interpolable by real taps
        rng = np.random.default_rng(2)
        lam = np.linalg.eigvals(rng.standard_normal((6, 6)))
        assert np.min(np.abs(lam[:, None] - lam[None, :]) + np.eye(6)) > 1e-3
        g = np.exp(-0.5 * lam)
        design = design_taps(lam, g, 6)
        assert design.residual <= 1e-8

    def test_repeated_eigenvalues_flagged(self):
        lam = np.array([1.0, 1.0, 2.0])
        design = design_taps(lam, np.array([1.0, 1.0, 4.0]), 3)
        assert design.rank_deficient
        assert design.rank == 2


class TestNodeVariant:
    def test_constant_columns_reduce_to_polynomial(self):
        S = random_shift(6, 0)
        rng = np.random.default_rng(1)
        h = rng.standard_normal(3)
        hmat = np.tile(h, (6, 1))
        x = rng.standard_normal(6)
        assert_allclose(apply_node_variant(S, hmat, x),
                        apply_polynomial(S, h, x), atol=1e-12)

    def test_single_node_selector(self):
        S = random_shift(5, 2)
        hmat = np.zeros((5, 1))
        hmat[3, 0] = 1.0
        x = np.random.default_rng(3).standard_normal(5)
        want = np.zeros(5)
        want[3] = x[3]
        assert_allclose(apply_node_variant(S, hmat, x), want)

    def test_against_dense_oracle(self):
        S = random_shift(6, 4)
        rng = np.random.default_rng(5)
        hmat = rng.standard_normal((6, 3))
        x = rng.standard_normal(6)
        M = S.toarray()
        H = np.diag(hmat[:, 0]) + np.diag(hmat[:, 1]) @ M + np.diag(hmat[:, 2]) @ M @ M
        assert_allclose(apply_node_variant(S, hmat, x), H @ x, atol=1e-10)


class TestEdgeVariant:
    def test_all_ones_reduces_to_polynomial(self):
        S = random_shift(6, 0)
        ones = (S.toarray() != 0.0).astype(float)
        x = np.random.default_rng(1).standard_normal(6)
        got = apply_edge_variant(S, [ones, ones, ones], x, ident=1.0)
        want = apply_polynomial(S, np.ones(4), x)
        assert_allclose(got, want, atol=1e-10)

    def test_single_edge_dense_oracle(self):
        S = ShiftOperator(np.array([[0.0, 0.0], [0.7, 0.0]]))
        phi = np.array([[0.0, 0.0], [2.0, 0.0]])
        x = np.array([1.0, -1.0])
        # y = (phi o S) x
        assert_allclose(apply_edge_variant(S, [phi], x), np.array([0.0, 1.4]))

    def test_zero_taps_zero_output(self):
        S = random_shift(5, 2)
        z = np.zeros((5, 5))
        x = np.random.default_rng(3).standard_normal(5)
        assert_allclose(apply_edge_variant(S, [z, z], x), np.zeros(5))

    def test_support_violation(self):
        S = ShiftOperator(np.array([[0.0, 0.0], [1.0, 0.0]]))
        phi = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValueError, match="outside the shift's support"):
            apply_edge_variant(S, [phi], np.ones(2))


class TestIdealLowpass:
    @pytest.fixture()
    def basis(self):
        A = adjacency_shift(directed_er(8, 0.35, seed=10))
        return learn_dgft(A, seed=10)

    def test_full_band_is_identity(self, basis):
        y = np.random.default_rng(0).standard_normal(8)
        assert_allclose(ideal_lowpass(basis, 8, y), y, atol=1e-10)

    def test_first_band_is_mean(self, basis):
        y = np.random.default_rng(1).standard_normal(8)
        assert_allclose(ideal_lowpass(basis, 1, y), np.full(8, y.mean()), atol=1e-10)

    def test_projection_idempotent(self, basis):
        y = np.random.default_rng(2).standard_normal(8)
        once = ideal_lowpass(basis, 3, y)
        assert_allclose(ideal_lowpass(basis, 3, once), once, atol=1e-10)

    def test_denoises_bandlimited_signal(self, basis):
        rng = np.random.default_rng(3)
        wins = 0
        trials = 1000
        for _ in range(trials):
            coef = rng.standard_normal(3)
            x = basis.U[:, :3] @ coef
            noise = 0.3 * rng.standard_normal(8)
            xhat = ideal_lowpass(basis, 3, x + noise)
            # projection keeps x and shrinks the noise
            assert_allclose(xhat, x + basis.U[:, :3] @ (basis.U[:, :3].T @ noise),
                            atol=1e-10)
            if np.linalg.norm(xhat - x) < np.linalg.norm(noise):
                wins += 1
        assert wins / trials >= 0.95

    def test_bandwidth_out_of_range(self, basis):
        with pytest.raises(ValueError, match="bandwidth"):
            ideal_lowpass(basis, 0, np.zeros(8))
        with pytest.raises(ValueError, match="bandwidth"):
            ideal_lowpass(basis, 9, np.zeros(8))


class TestPolynomialSpectralEquivalence:
    def test_design_then_apply_matches(self):
        # full-length real taps reproduce any conjugate-symmetric spectral
        # response on distinct spectra (the realizable case for real shifts)
        for seed in range(10):
            S = diagonalizable_shift(6, 20 + seed)
            basis = eigen_gft_basis(S)
            rng = np.random.default_rng(seed)
            g = np.exp(-0.4 * basis.lam)  # real function of the spectrum
            design = design_taps(basis.lam, g, 6)
            x = rng.standard_normal(6)
            want = apply_spectral(basis, g, x)
            got = apply_polynomial(S, design.h, x)
            assert np.linalg.norm(got - want) <= 1e-6 * max(np.linalg.norm(want), 1.0)


def test_taps_json_roundtrip():
    h = np.array([1.0, -0.5, 0.25])
    assert_allclose(taps_from_json(taps_to_json(h)), h)
