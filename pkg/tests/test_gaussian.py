import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qenr.gaussian import (
    OMEGA,
    GaussianState,
    is_physical,
    partial_transpose,
    photon_number,
    ppt_min_eigenvalue,
    symplectic_eigenvalues,
    tms_covariance,
)

from conftest import random_symplectic


def two_mode_spectrum(V):
    """Closed-form symplectic eigenvalues from the local and cross 2x2 blocks."""
    A, B, C = V[:2, :2], V[2:, 2:], V[:2, 2:]
    delta = np.linalg.det(A) + np.linalg.det(B) + 2 * np.linalg.det(C)
    disc = np.sqrt(delta**2 - 4 * np.linalg.det(V))
    return np.sqrt([(delta - disc) / 2, (delta + disc) / 2])


def test_omega_structure():
    assert np.array_equal(OMEGA @ OMEGA, -np.eye(4))
    assert np.array_equal(OMEGA.T, -OMEGA)


class TestTMS:
    def test_vacuum(self):
        assert np.array_equal(tms_covariance(0).cov, np.eye(4))

    def test_one_photon(self):
        cov = tms_covariance(np.arcsinh(1)).cov
        np.testing.assert_allclose(np.diag(cov), 3.0, rtol=1e-14)
        assert cov[0, 2] == pytest.approx(2 * np.sqrt(2), rel=1e-14)
        assert cov[1, 3] == pytest.approx(-2 * np.sqrt(2), rel=1e-14)

    def test_ln2_over_2(self):
        cov = tms_covariance(np.log(2) / 2).cov
        np.testing.assert_allclose(np.diag(cov), 1.25, rtol=1e-14)
        assert cov[0, 2] == pytest.approx(0.75, rel=1e-14)
        assert cov[1, 3] == pytest.approx(-0.75, rel=1e-14)
        # cross-quadrature entries stay zero
        assert cov[0, 3] == cov[1, 2] == cov[0, 1] == 0.0

    @pytest.mark.parametrize("r", [-0.1, np.nan, np.inf])
    def test_rejects_bad_r(self, r):
        with pytest.raises(ValueError):
            tms_covariance(r)

    def test_exactly_symmetric(self):
        cov = tms_covariance(0.7).cov
        assert np.array_equal(cov, cov.T)


class TestPartialTranspose:
    def test_identity(self):
        assert np.array_equal(partial_transpose(np.eye(4)), np.eye(4))

    def test_tms_cross_block(self):
        r = 0.6
        pt = partial_transpose(tms_covariance(r))
        np.testing.assert_allclose(pt[:2, 2:], np.sinh(2 * r) * np.eye(2), rtol=1e-14)
        np.testing.assert_allclose(np.diag(pt), np.cosh(2 * r), rtol=1e-14)

    def test_involution_and_determinant(self):
        rng = np.random.default_rng(3)
        S = random_symplectic(rng)
        V = S @ np.diag([1.5, 1.5, 2.0, 2.0]) @ S.T
        V = 0.5 * (V + V.T)
        assert np.array_equal(partial_transpose(partial_transpose(V)), V)
        assert np.linalg.det(partial_transpose(V)) == pytest.approx(np.linalg.det(V), rel=1e-10)


class TestSymplecticEigenvalues:
    def test_vacuum_and_thermal(self):
        np.testing.assert_allclose(symplectic_eigenvalues(np.eye(4)), [1, 1], atol=1e-14)
        np.testing.assert_allclose(symplectic_eigenvalues(3 * np.eye(4)), [3, 3], atol=1e-14)

    @pytest.mark.parametrize("r", [0.0, 0.3, 1.0, 2.5])
    def test_pure_tms(self, r):
        np.testing.assert_allclose(symplectic_eigenvalues(tms_covariance(r).cov), [1, 1], atol=1e-10)

    def test_rejects_non_symmetric(self):
        m = np.eye(4)
        m[0, 1] = 0.1
        with pytest.raises(ValueError, match="symmetric"):
            symplectic_eigenvalues(m)

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError, match="positive definite"):
            symplectic_eigenvalues(np.diag([1.0, 1.0, 1.0, -1.0]))

    def test_matches_general_eigensolver(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            S = random_symplectic(rng)
            V = S @ np.diag(np.repeat(rng.uniform(1, 4, 2), 2)) @ S.T
            V = 0.5 * (V + V.T)
            direct = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ V)))[::2]
            np.testing.assert_allclose(symplectic_eigenvalues(V), direct, rtol=1e-9)
            np.testing.assert_allclose(symplectic_eigenvalues(V), two_mode_spectrum(V), rtol=1e-8)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1),
       nu=st.tuples(st.floats(1.0, 20.0), st.floats(1.0, 20.0)))
def test_williamson_round_trip(seed, nu):
    # V = S diag(nu) S^T has symplectic spectrum nu by construction
    S = random_symplectic(np.random.default_rng(seed))
    V = S @ np.diag([nu[0], nu[0], nu[1], nu[1]]) @ S.T
    V = 0.5 * (V + V.T)
    np.testing.assert_allclose(symplectic_eigenvalues(V), sorted(nu), rtol=1e-8)
    assert is_physical(V)


class TestPPT:
    def test_vacuum(self):
        assert ppt_min_eigenvalue(GaussianState.vacuum()) == pytest.approx(1.0, abs=1e-14)

    def test_half(self):
        assert ppt_min_eigenvalue(tms_covariance(np.log(2) / 2)) == pytest.approx(0.5, abs=1e-12)

    def test_one_photon(self):
        val = ppt_min_eigenvalue(tms_covariance(np.arcsinh(1)))
        assert val == pytest.approx(3 - 2 * np.sqrt(2), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.0, 3.0))
    def test_analytic_oracle(self, r):
        assert abs(ppt_min_eigenvalue(tms_covariance(r)) - np.exp(-2 * r)) < 1e-9

    def test_closed_form_on_partial_transpose(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            S = random_symplectic(rng)
            V = S @ np.diag([1.2, 1.2, 1.7, 1.7]) @ S.T
            V = 0.5 * (V + V.T)
            expected = two_mode_spectrum(partial_transpose(V))[0]
            assert ppt_min_eigenvalue(V) == pytest.approx(expected, rel=1e-8)


class TestPhotonNumber:
    def test_vacuum(self):
        assert photon_number(GaussianState.vacuum(), "s") == 0.0

    def test_tms(self):
        st_ = tms_covariance(np.arcsinh(1))
        assert photon_number(st_, "s") == pytest.approx(1.0, abs=1e-12)
        assert photon_number(st_, "i") == pytest.approx(1.0, abs=1e-12)

    def test_thirty_photons(self):
        cov = np.diag([61.0, 61.0, 1.0, 1.0])
        assert photon_number(GaussianState(cov), "s") == pytest.approx(30.0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.0, 3.0))
    def test_sinh_squared(self, r):
        st_ = tms_covariance(r)
        for mode in "si":
            assert abs(photon_number(st_, mode) - np.sinh(r) ** 2) < 1e-12 * max(1, np.sinh(r) ** 2)

    def test_rejects_bad_mode_and_negative(self):
        with pytest.raises(ValueError):
            photon_number(GaussianState.vacuum(), "x")
        with pytest.raises(ValueError, match="negative"):
            photon_number(0.5 * np.eye(4), "s")


class TestPhysicality:
    def test_examples(self):
        assert is_physical(np.eye(4))
        assert not is_physical(0.5 * np.eye(4))
        assert is_physical(tms_covariance(1.0).cov)

    def test_state_constructor_guards(self):
        with pytest.raises(ValueError, match="unphysical"):
            GaussianState(0.5 * np.eye(4))
        with pytest.raises(ValueError):
            GaussianState(np.eye(3))

    def test_state_is_immutable(self):
        st_ = GaussianState.vacuum()
        with pytest.raises(ValueError):
            st_.cov[0, 0] = 2.0
