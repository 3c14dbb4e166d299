import numpy as np
import pytest

from mjpbounds import (
    Observable,
    ProbDist,
    adjoint_generator,
    center_observable,
    make_model,
    pi_inner,
    pi_variance,
    reduced_resolvent,
    resolvent_power,
    sigma_hat_sq,
    spectral_decomposition,
    symmetrized_generator,
    validate_q_matrix,
)
from mjpbounds.errors import DegenerateGapError, NotCenteredError
from mjpbounds.spectral import jacobi_eigh

from conftest import random_irreducible_model


class TestAdjointGenerator:
    def test_selfadjoint_under_detailed_balance(self, two_state):
        adj = adjoint_generator(two_state.q, two_state.pi)
        np.testing.assert_allclose(adj, two_state.q.rates, atol=1e-12)

    def test_uniform_pi_gives_transpose(self, three_cycle):
        adj = adjoint_generator(three_cycle.q, three_cycle.pi)
        np.testing.assert_allclose(adj, three_cycle.q.rates.T, atol=1e-12)

    def test_adjoint_row_sums_vanish(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            m = random_irreducible_model(rng)
            adj = adjoint_generator(m.q, m.pi)
            np.testing.assert_allclose(adj.sum(axis=1), 0.0, atol=1e-12)
            assert np.all(adj[~np.eye(m.n, dtype=bool)] >= -1e-15)

    def test_adjoint_reverses_inner_product(self, three_dense):
        rng = np.random.default_rng(5)
        adj = adjoint_generator(three_dense.q, three_dense.pi)
        for _ in range(5):
            g, h = rng.standard_normal((2, 3))
            lhs = pi_inner(three_dense.pi, three_dense.q.rates @ g, h)
            rhs = pi_inner(three_dense.pi, g, adj @ h)
            assert lhs == pytest.approx(rhs, abs=1e-12)


class TestPiInner:
    def test_normalization(self, two_state):
        ones = np.ones(2)
        assert pi_inner(two_state.pi, ones, ones) == pytest.approx(1.0)

    def test_centered_observable_orthogonal_to_constants(self, two_state):
        assert pi_inner(two_state.pi, two_state.f.values, np.ones(2)) == pytest.approx(
            0.0, abs=1e-14
        )

    def test_hand_value(self, two_state):
        f = two_state.f.values
        assert pi_inner(two_state.pi, f, f) == pytest.approx(2.0, abs=1e-14)


class TestJacobiAgainstLapack:
    def test_random_symmetric_matrices(self):
        rng = np.random.default_rng(11)
        for n in (2, 3, 4, 6, 9):
            for _ in range(4):
                a = rng.standard_normal((n, n))
                a = a + a.T
                vals, vecs = jacobi_eigh(a.copy())
                ref = np.sort(np.linalg.eigvalsh(a))[::-1]
                np.testing.assert_allclose(vals, ref, atol=1e-11)
                np.testing.assert_allclose(
                    vecs @ np.diag(vals) @ vecs.T, a, atol=1e-10
                )
                np.testing.assert_allclose(vecs @ vecs.T, np.eye(n), atol=1e-12)


class TestSpectralDecomposition:
    def test_two_state_trace_det_oracle(self, two_state):
        # trace(sym) = -3 and det(sym) = 0 force eigenvalues {0, -3}
        sd = spectral_decomposition(two_state.q, two_state.pi)
        np.testing.assert_allclose(sd.eigenvalues, [0.0, -3.0], atol=1e-12)
        assert sd.gap == pytest.approx(3.0, abs=1e-12)

    def test_kernel_vector_is_constant(self, three_dense):
        sd = spectral_decomposition(three_dense.q, three_dense.pi)
        np.testing.assert_allclose(sd.eigvecs[:, 0], 1.0, atol=1e-14)
        assert sd.eigenvalues[0] == 0.0

    def test_symmetric_rates_match_plain_eigenvalues(self):
        m = make_model([[-3, 1, 2], [1, -1.5, 0.5], [2, 0.5, -2.5]], [1, 0, -1])
        sd = spectral_decomposition(m.q, m.pi)
        ref = np.sort(np.linalg.eigvalsh(m.q.rates))[::-1]
        np.testing.assert_allclose(sd.eigenvalues, ref, atol=1e-11)

    def test_pi_orthonormal_columns(self):
        rng = np.random.default_rng(17)
        for _ in range(8):
            m = random_irreducible_model(rng)
            sd = spectral_decomposition(m.q, m.pi)
            gram = np.array(
                [
                    [pi_inner(m.pi, sd.eigvecs[:, i], sd.eigvecs[:, j]) for j in range(m.n)]
                    for i in range(m.n)
                ]
            )
            np.testing.assert_allclose(gram, np.eye(m.n), atol=1e-10)
            assert np.all(sd.eigenvalues <= 1e-10)

    def test_reducible_input_reported_as_degenerate(self):
        q = validate_q_matrix(
            [[-1, 1, 0, 0], [1, -1, 0, 0], [0, 0, -2, 2], [0, 0, 2, -2]]
        )
        pi = ProbDist(np.array([0.25, 0.25, 0.25, 0.25]), strictly_positive=True)
        with pytest.raises(DegenerateGapError):
            spectral_decomposition(q, pi)


class TestReducedResolvent:
    def test_two_state_closed_form(self, two_state):
        sd = spectral_decomposition(two_state.q, two_state.pi)
        expected = -(1.0 / 3.0) * (np.eye(2) - sd.projector0)
        np.testing.assert_allclose(sd.resolvent, expected, atol=1e-13)

    def test_inverse_on_complement_of_constants(self):
        rng = np.random.default_rng(23)
        for _ in range(8):
            m = random_irreducible_model(rng)
            sd = spectral_decomposition(m.q, m.pi)
            s = reduced_resolvent(sd)
            eye = np.eye(m.n)
            np.testing.assert_allclose(s @ sd.sym, eye - sd.projector0, atol=1e-10)
            np.testing.assert_allclose(sd.sym @ s, eye - sd.projector0, atol=1e-10)
            np.testing.assert_allclose(s @ np.ones(m.n), 0.0, atol=1e-12)

    def test_operator_norm_is_inverse_gap(self):
        rng = np.random.default_rng(29)
        for _ in range(8):
            m = random_irreducible_model(rng)
            sd = spectral_decomposition(m.q, m.pi)
            # pi-weighted norm via the similarity transform
            sq = np.sqrt(m.pi.weights)
            s_coords = (sd.resolvent * sq[:, None]) / sq[None, :]
            norm = np.linalg.norm(s_coords, 2)
            assert norm == pytest.approx(1.0 / sd.gap, rel=1e-10)


class TestResolventPower:
    def test_power_zero_is_complement_projection(self, three_dense):
        sd = spectral_decomposition(three_dense.q, three_dense.pi)
        np.testing.assert_allclose(
            resolvent_power(sd, 0.0), np.eye(3) - sd.projector0, atol=1e-12
        )

    def test_power_one_is_minus_resolvent(self, three_dense):
        sd = spectral_decomposition(three_dense.q, three_dense.pi)
        np.testing.assert_allclose(resolvent_power(sd, 1.0), -sd.resolvent, atol=1e-12)

    def test_half_powers_compose(self):
        rng = np.random.default_rng(31)
        for _ in range(6):
            m = random_irreducible_model(rng)
            sd = spectral_decomposition(m.q, m.pi)
            half = resolvent_power(sd, 0.5)
            np.testing.assert_allclose(half @ half, -sd.resolvent, atol=1e-10)

    def test_exponent_addition(self, three_dense):
        sd = spectral_decomposition(three_dense.q, three_dense.pi)
        lhs = resolvent_power(sd, 0.7) @ resolvent_power(sd, 1.3)
        np.testing.assert_allclose(lhs, resolvent_power(sd, 2.0), atol=1e-10)


class TestSigmaHat:
    def test_zero_observable(self, two_state):
        sd = spectral_decomposition(two_state.q, two_state.pi)
        f0 = Observable(np.zeros(2), centered=True)
        assert sigma_hat_sq(sd, f0, two_state.pi) == 0.0

    def test_two_state_hand_value(self, two_state):
        # S = -(1/3)(I - pr) and <f, f> = 2 give sigma^2 = (2/3)*2 = 4/3
        sd = spectral_decomposition(two_state.q, two_state.pi)
        assert sigma_hat_sq(sd, two_state.f, two_state.pi) == pytest.approx(
            4.0 / 3.0, abs=1e-13
        )

    def test_not_centered_rejected(self, two_state):
        sd = spectral_decomposition(two_state.q, two_state.pi)
        with pytest.raises(NotCenteredError):
            sigma_hat_sq(sd, Observable(np.array([1.0, 1.0])), two_state.pi)

    def test_dominated_by_poincare_variance(self):
        rng = np.random.default_rng(37)
        for _ in range(10):
            m = random_irreducible_model(rng)
            sd = spectral_decomposition(m.q, m.pi)
            s2 = sigma_hat_sq(sd, m.f, m.pi)
            bound = 2.0 * pi_variance(m.pi, m.f.values) / sd.gap
            assert s2 <= bound + 1e-12


class TestQuadraticFormInvariants:
    def test_rayleigh_nonpositive(self):
        rng = np.random.default_rng(41)
        m = random_irreducible_model(rng, n=5)
        sd = spectral_decomposition(m.q, m.pi)
        for _ in range(200):
            g = rng.standard_normal(5)
            g /= np.sqrt(pi_inner(m.pi, g, g))
            assert pi_inner(m.pi, sd.sym @ g, g) <= 1e-10

    def test_image_orthogonal_to_constants(self):
        rng = np.random.default_rng(43)
        m = random_irreducible_model(rng, n=4)
        sd = spectral_decomposition(m.q, m.pi)
        ones = np.ones(4)
        for _ in range(50):
            g = rng.standard_normal(4)
            assert abs(pi_inner(m.pi, ones, sd.sym @ g)) <= 1e-10

    def test_poincare_with_gap_constant(self):
        rng = np.random.default_rng(47)
        for _ in range(10):
            m = random_irreducible_model(rng)
            sd = spectral_decomposition(m.q, m.pi)
            for _ in range(20):
                g = rng.standard_normal(m.n)
                var = pi_variance(m.pi, g)
                dirichlet = -pi_inner(m.pi, sd.sym @ g, g)
                assert var <= dirichlet / sd.gap + 1e-10

    def test_detailed_balance_spectrum_matches_generator(self, two_state):
        sd = spectral_decomposition(two_state.q, two_state.pi)
        ref = np.sort(np.linalg.eigvals(two_state.q.rates).real)[::-1]
        np.testing.assert_allclose(sd.eigenvalues, ref, atol=1e-11)

    def test_symmetrized_generator_is_its_own_adjoint(self, three_dense):
        sym = symmetrized_generator(three_dense.q, three_dense.pi)
        adj_of_sym = adjoint_generator(
            validate_q_matrix(sym), three_dense.pi
        )
        np.testing.assert_allclose(sym, adj_of_sym, atol=1e-12)


def test_center_then_sigma_consistency(three_cycle):
    sd = spectral_decomposition(three_cycle.q, three_cycle.pi)
    f = center_observable(Observable(np.array([2.0, -1.0, 0.5])), three_cycle.pi)
    s2 = sigma_hat_sq(sd, f, three_cycle.pi)
    assert s2 > 0
