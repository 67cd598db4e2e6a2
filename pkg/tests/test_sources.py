import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qenr.gaussian import is_physical, photon_number, ppt_min_eigenvalue
from qenr.sources import (
    SourceSpec,
    classical_covariance_bound,
    classical_source,
    pump_to_photons,
    quantum_source,
)

photons = st.floats(0.0, 50.0)


class TestQuantumSource:
    def test_vacuum(self):
        np.testing.assert_allclose(quantum_source(0).cov, np.eye(4), atol=1e-15)

    def test_one_photon(self):
        cov = quantum_source(1).cov
        np.testing.assert_allclose(np.diag(cov), 3.0, rtol=1e-13)
        assert cov[0, 2] == pytest.approx(2 * np.sqrt(2), rel=1e-13)

    def test_low_power_cross(self):
        assert quantum_source(0.01).cov[0, 2] == pytest.approx(2 * np.sqrt(0.0101), rel=1e-12)
        assert quantum_source(0.01).cov[0, 2] == pytest.approx(0.2010, abs=5e-5)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            quantum_source(-1)


class TestClassicalSource:
    def test_uncorrelated(self):
        cov = classical_source(2.0, 0.0).cov
        assert np.all(cov[:2, 2:] == 0)
        np.testing.assert_allclose(np.diag(cov), 5.0)

    def test_boundary(self):
        s = classical_source(1, 1)
        np.testing.assert_allclose(np.diag(s.cov), 3.0)
        assert s.cov[0, 2] == 2.0 and s.cov[1, 3] == -2.0
        assert ppt_min_eigenvalue(s) == pytest.approx(1.0, abs=1e-12)

    def test_ninety_nine_percent(self):
        assert ppt_min_eigenvalue(classical_source(1, 0.99)) == pytest.approx(1.02, abs=1e-12)

    @pytest.mark.parametrize("rho", [1.01, -0.1])
    def test_rejects_rho(self, rho):
        with pytest.raises(ValueError):
            classical_source(1, rho)


def test_classical_bound():
    assert classical_covariance_bound(0) == 0
    assert classical_covariance_bound(1) == 2
    assert classical_covariance_bound(30) == 60
    assert quantum_source(1).cov[0, 2] > classical_covariance_bound(1)


class TestPump:
    def test_zero(self):
        assert pump_to_photons(0) == 0

    def test_inverse(self):
        assert pump_to_photons(np.arcsinh(1) ** 2, kappa=1) == pytest.approx(1.0, rel=1e-13)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1e-6, 10), st.floats(1e-6, 10))
    def test_monotone(self, p1, p2):
        if p1 < p2:
            assert pump_to_photons(p2) > pump_to_photons(p1)

    @pytest.mark.parametrize("args", [(-1, 1), (1, 0), (1, -2)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            pump_to_photons(*args)


@settings(max_examples=80, deadline=None)
@given(n=photons, rho=st.floats(0.0, 1.0))
def test_power_matching(n, rho):
    q, c = quantum_source(n), classical_source(n, rho)
    for mode in "si":
        assert photon_number(q, mode) == pytest.approx(n, rel=1e-10, abs=1e-12)
        assert photon_number(c, mode) == pytest.approx(n, rel=1e-12, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(n=st.floats(1e-4, 50.0))
def test_covariance_advantage(n):
    ratio = quantum_source(n).cov[0, 2] / classical_covariance_bound(n)
    assert ratio == pytest.approx(np.sqrt(1 + 1 / n), rel=1e-9)
    assert ratio > 1


@settings(max_examples=80, deadline=None)
@given(n=st.floats(1e-4, 50.0), rho=st.floats(0.0, 1.0))
def test_entanglement_dichotomy(n, rho):
    assert ppt_min_eigenvalue(quantum_source(n)) < 1
    assert ppt_min_eigenvalue(classical_source(n, rho)) >= 1 - 1e-9
    assert is_physical(classical_source(n, rho).cov)


def test_source_spec():
    np.testing.assert_array_equal(SourceSpec("classical", 1, 0.5).state().cov,
                                  classical_source(1, 0.5).cov)
    np.testing.assert_array_equal(SourceSpec("quantum", 1, 0.5).state().cov, quantum_source(1).cov)
    with pytest.raises(ValueError):
        SourceSpec("laser", 1)
    with pytest.raises(ValueError):
        SourceSpec("quantum", -1)
    with pytest.raises(ValueError):
        SourceSpec("classical", 1, 2.0)
