import numpy as np
import pytest

from pointer_therm import qubit
from pointer_therm.errors import InvalidStateError, ParameterError

TANH_THIRD = np.tanh(1.0 / 3.0)


def random_density(rng):
    # random pure-state mixture: guaranteed valid
    r = rng.normal(size=3)
    r *= rng.uniform(0.0, 1.0) / np.linalg.norm(r)
    return qubit.density_from_bloch(r)


class TestDensityFromBloch:
    def test_maximally_mixed(self):
        np.testing.assert_allclose(qubit.density_from_bloch((0, 0, 0)),
                                   0.5 * np.eye(2), atol=1e-15)

    def test_gibbs_operating_point(self):
        rho = qubit.density_from_bloch((0, 0, -TANH_THIRD))
        expected = 0.5 * (np.eye(2) - TANH_THIRD * qubit.SIGMA_Z)
        np.testing.assert_allclose(rho, expected, atol=1e-15)

    def test_x_plus_projector(self):
        rho = qubit.density_from_bloch((1, 0, 0))
        np.testing.assert_allclose(rho, 0.5 * np.ones((2, 2)), atol=1e-15)

    def test_rejects_outside_ball(self):
        with pytest.raises(InvalidStateError):
            qubit.density_from_bloch((1.0, 0.1, 0.0))


class TestBlochFromDensity:
    def test_identity(self):
        np.testing.assert_allclose(qubit.bloch_from_density(0.5 * np.eye(2)),
                                   np.zeros(3), atol=1e-15)

    def test_z_plus(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        np.testing.assert_allclose(qubit.bloch_from_density(rho), [0, 0, 1], atol=1e-15)

    def test_offdiagonal_example(self):
        rho = np.array([[0.7, 0.3 + 0.1j], [0.3 - 0.1j, 0.3]])
        np.testing.assert_allclose(qubit.bloch_from_density(rho),
                                   [0.6, -0.2, 0.4], atol=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            rho = random_density(rng)
            r = qubit.bloch_from_density(rho)
            np.testing.assert_allclose(qubit.density_from_bloch(r), rho, atol=1e-12)

    def test_rejects_nonhermitian(self):
        with pytest.raises(InvalidStateError):
            qubit.bloch_from_density(np.array([[0.5, 0.2], [0.1, 0.5]], dtype=complex))

    def test_rejects_wrong_trace(self):
        with pytest.raises(InvalidStateError):
            qubit.bloch_from_density(np.diag([0.7, 0.7]).astype(complex))


class TestGibbsState:
    def test_infinite_temperature(self):
        np.testing.assert_allclose(qubit.gibbs_state(1e-9), 0.5 * np.eye(2), atol=1e-8)

    def test_operating_point(self):
        r = qubit.bloch_from_density(qubit.gibbs_state(2.0 / 3.0, 1.0))
        np.testing.assert_allclose(r, [0, 0, -TANH_THIRD], atol=1e-12)

    def test_zero_temperature_limit(self):
        r = qubit.bloch_from_density(qubit.gibbs_state(100.0, 1.0))
        assert abs(r[2] + 1.0) < 1e-10

    def test_rejects_bad_beta(self):
        with pytest.raises(ParameterError):
            qubit.gibbs_state(-1.0)


class TestEntropy:
    def test_maximally_mixed(self):
        assert abs(qubit.von_neumann_entropy(0.5 * np.eye(2)) - np.log(2)) < 1e-12

    def test_pure_state(self):
        assert qubit.von_neumann_entropy(qubit.density_from_bloch((0, 1, 0))) < 1e-12

    def test_gibbs_value(self):
        # closed form at T = 1.5: 0.6405325...
        s = qubit.von_neumann_entropy(qubit.gibbs_state(2.0 / 3.0))
        assert abs(s - 0.6405325076748606) < 1e-10

    def test_eigen_matches_closed_form(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            rho = random_density(rng)
            r = np.linalg.norm(qubit.bloch_from_density(rho))
            assert abs(qubit.von_neumann_entropy(rho) - qubit.entropy_from_radius(r)) < 1e-10

    def test_rejects_negative_eigenvalue(self):
        bad = np.diag([1.2, -0.2]).astype(complex)
        with pytest.raises(InvalidStateError):
            qubit.von_neumann_entropy(bad)


class TestPointerBasis:
    def test_sigma_x(self):
        b = qubit.pointer_basis(1, 0, 0)
        np.testing.assert_allclose(b.p1, np.array([1, 1]) / np.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(b.p2, np.array([1, -1]) / np.sqrt(2), atol=1e-12)
        assert b.eigenvalues == pytest.approx((1.0, -1.0))

    def test_case_two_mixed_basis(self):
        b = qubit.pointer_basis(0.5, 0, 0.5)
        s2 = np.sqrt(2)
        p1 = np.array([1 / s2 + 1, 1 / s2]) / np.sqrt(2 + s2)
        p2 = np.array([1 / s2 - 1, 1 / s2]) / np.sqrt(2 - s2)
        # phase fixed to largest amplitude real positive
        np.testing.assert_allclose(b.p1, p1, atol=1e-12)
        np.testing.assert_allclose(np.abs(b.p2), np.abs(p2), atol=1e-12)
        assert b.eigenvalues == pytest.approx((1 / s2, -1 / s2))

    def test_energy_basis(self):
        b = qubit.pointer_basis(0, 0, 1)
        np.testing.assert_allclose(b.p1, [1, 0], atol=1e-12)
        np.testing.assert_allclose(b.p2, [0, 1], atol=1e-12)

    def test_zero_coupling_rejected(self):
        with pytest.raises(ParameterError):
            qubit.pointer_basis(0, 0, 0)

    def test_orthonormal_and_reconstructs(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a = rng.normal(size=3)
            b = qubit.pointer_basis(*a)
            assert abs(np.vdot(b.p1, b.p2)) < 1e-12
            assert abs(np.vdot(b.p1, b.p1) - 1) < 1e-12
            x = qubit.coupling_operator(*a)
            rebuilt = (b.eigenvalues[0] * np.outer(b.p1, b.p1.conj())
                       + b.eigenvalues[1] * np.outer(b.p2, b.p2.conj()))
            np.testing.assert_allclose(rebuilt, x, atol=1e-10)
            for ket, val in ((b.p1, b.eigenvalues[0]), (b.p2, b.eigenvalues[1])):
                np.testing.assert_allclose(x @ ket, val * ket, atol=1e-10)


class TestPointerProject:
    def test_gibbs_onto_sigma_x_is_mixed(self):
        basis = qubit.pointer_basis(1, 0, 0)
        out = qubit.pointer_project(qubit.gibbs_state(2 / 3), basis)
        np.testing.assert_allclose(out, 0.5 * np.eye(2), atol=1e-12)

    def test_gibbs_onto_case_two(self):
        basis = qubit.pointer_basis(0.5, 0, 0.5)
        out = qubit.pointer_project(qubit.gibbs_state(2 / 3), basis)
        r = qubit.bloch_from_density(out)
        expected = -0.5 * TANH_THIRD * np.array([1, 0, 1])
        np.testing.assert_allclose(r, expected, atol=1e-12)

    def test_idempotent_trace_preserving_entropy_increasing(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            rho = random_density(rng)
            a = rng.normal(size=3)
            basis = qubit.pointer_basis(*a)
            proj = qubit.pointer_project(rho, basis)
            np.testing.assert_allclose(qubit.pointer_project(proj, basis), proj,
                                       atol=1e-12)
            assert abs(np.trace(proj) - 1.0) < 1e-12
            assert (qubit.von_neumann_entropy(proj)
                    >= qubit.von_neumann_entropy(rho) - 1e-12)

    def test_projection_is_orthogonal_on_gibbs(self):
        rng = np.random.default_rng(23)
        g = qubit.gibbs_state(2 / 3)
        rg = qubit.bloch_from_density(g)
        for _ in range(200):
            a = rng.normal(size=3)
            basis = qubit.pointer_basis(*a)
            axis = a / np.linalg.norm(a)
            expected = (rg @ axis) * axis
            out = qubit.bloch_from_density(qubit.pointer_project(g, basis))
            np.testing.assert_allclose(out, expected, atol=1e-12)


class TestPointerMatrixElements:
    def test_maximally_mixed(self):
        basis = qubit.pointer_basis(0.2, -0.7, 0.4)
        d1, d2, off = qubit.pointer_matrix_elements(0.5 * np.eye(2), basis)
        assert (d1, d2) == pytest.approx((0.5, 0.5))
        assert abs(off) < 1e-12

    def test_gibbs_case_two_diagonals(self):
        basis = qubit.pointer_basis(0.5, 0, 0.5)
        d1, d2, _ = qubit.pointer_matrix_elements(qubit.gibbs_state(2 / 3), basis)
        assert abs(d1 - 0.5 * (1 - TANH_THIRD / np.sqrt(2))) < 1e-12
        assert abs(d2 - 0.5 * (1 + TANH_THIRD / np.sqrt(2))) < 1e-12
        assert d1 == pytest.approx(0.38633, abs=1e-5)
        assert d2 == pytest.approx(0.61367, abs=1e-5)

    def test_projector_state(self):
        basis = qubit.pointer_basis(1, 0, 0)
        rho = np.outer(basis.p1, basis.p1.conj())
        d1, d2, off = qubit.pointer_matrix_elements(rho, basis)
        assert (d1, d2) == pytest.approx((1.0, 0.0), abs=1e-12)
        assert abs(off) < 1e-12

    def test_diagonals_sum_to_one(self):
        rng = np.random.default_rng(29)
        for _ in range(300):
            rho = random_density(rng)
            basis = qubit.pointer_basis(*rng.normal(size=3))
            d1, d2, _ = qubit.pointer_matrix_elements(rho, basis)
            assert abs(d1 + d2 - 1.0) < 1e-12
