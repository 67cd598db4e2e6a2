"""Quantum (two-mode squeezed) and ideal classical correlated-noise transmitters.

Both sources are built at a common per-mode photon number ``n`` so that the
radar comparison is always made at matched output power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianState, _cross_block_state, tms_covariance

DEFAULT_RHO = 0.99


def _check_photons(n: float) -> float:
    n = float(n)
    if not np.isfinite(n) or n < 0:
        raise ValueError(f"photon number must be finite and >= 0, got {n}")
    return n


def quantum_source(n: float) -> GaussianState:
    """Two-mode squeezed vacuum carrying ``n`` photons per mode.

    The cross covariance is ``2 * sqrt(n * (n + 1))``.
    """
    n = _check_photons(n)
    return tms_covariance(np.arcsinh(np.sqrt(n)))


def classical_source(n: float, rho: float = DEFAULT_RHO) -> GaussianState:
    """Correlated thermal sidebands with correlation coefficient ``rho``.

    The cross block is ``rho * 2n * diag(1, -1)``, phase-aligned with
    :func:`quantum_source`. At ``rho = 1`` the partial transpose has minimum
    symplectic eigenvalue exactly one, so the state sits on the separable
    boundary.
    """
    n = _check_photons(n)
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"correlation rho must lie in [0, 1], got {rho}")
    return GaussianState(_cross_block_state(2 * n + 1, 2 * n + 1, rho * 2 * n))


def classical_covariance_bound(n: float) -> float:
    """Largest signal-idler cross covariance of a separable state with ``n`` photons per mode."""
    return 2.0 * _check_photons(n)


def pump_to_photons(pump_power: float, kappa: float = 1.0) -> float:
    """Map a pump level (arbitrary linear units) to per-mode photons.

    Uses ``r = kappa * sqrt(pump_power)``, so ``n = sinh(r)**2``. Only the
    monotonicity matters downstream.
    """
    pump_power = float(pump_power)
    kappa = float(kappa)
    if not np.isfinite(pump_power) or pump_power < 0:
        raise ValueError(f"pump power must be finite and >= 0, got {pump_power}")
    if not np.isfinite(kappa) or kappa <= 0:
        raise ValueError(f"kappa must be finite and > 0, got {kappa}")
    return float(np.sinh(kappa * np.sqrt(pump_power)) ** 2)


@dataclass(frozen=True)
class SourceSpec:
    """Transmitter description: ``kind`` is ``"quantum"`` or ``"classical"``.

    ``rho`` is ignored for the quantum kind.
    """

    kind: str
    n: float
    rho: float = DEFAULT_RHO

    def __post_init__(self):
        if self.kind not in ("quantum", "classical"):
            raise ValueError(f"kind must be 'quantum' or 'classical', got {self.kind!r}")
        _check_photons(self.n)
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"correlation rho must lie in [0, 1], got {self.rho}")
        if self.kind == "quantum" and not np.isfinite(np.arcsinh(np.sqrt(self.n))):
            raise ValueError("squeezing parameter is not finite")

    def state(self) -> GaussianState:
        if self.kind == "quantum":
            return quantum_source(self.n)
        return classical_source(self.n, self.rho)
