import numpy as np
import pytest

_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary."""

    def _report(criterion: str, passed: bool, detail: str):
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


def random_symplectic(rng):
    """Product of elementary two-mode symplectic maps, in (I_s, Q_s, I_i, Q_i) order."""

    def rot(phi_s, phi_i):
        m = np.zeros((4, 4))
        for k, phi in ((0, phi_s), (2, phi_i)):
            c, s = np.cos(phi), np.sin(phi)
            m[k:k + 2, k:k + 2] = [[c, -s], [s, c]]
        return m

    def squeeze(r_s, r_i):
        return np.diag(np.exp([-r_s, r_s, -r_i, r_i]))

    def beamsplitter(theta):
        c, s = np.cos(theta), np.sin(theta)
        return np.block([[c * np.eye(2), -s * np.eye(2)], [s * np.eye(2), c * np.eye(2)]])

    def tms(r):
        c, s = np.cosh(r), np.sinh(r)
        z = np.diag([1.0, -1.0])
        return np.block([[c * np.eye(2), s * z], [s * z, c * np.eye(2)]])

    S = np.eye(4)
    for _ in range(3):
        S = rot(*rng.uniform(0, 2 * np.pi, 2)) @ S
        S = squeeze(*rng.uniform(-0.8, 0.8, 2)) @ S
        S = beamsplitter(rng.uniform(0, np.pi)) @ S
        S = tms(rng.uniform(0, 0.8)) @ S
    return S
