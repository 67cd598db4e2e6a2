"""Loss, thermal background and amplification between source and digitiser.

The detector-side covariance follows the single figure-of-merit convention

    V_raw = G * (V_lossy + 2 * n_sys * I)

where ``n_sys`` is the input-referred system noise of each mode. Calibration
undoes the amplifier stage only; loss belongs to the scene.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .gaussian import EPS_TOL, GaussianState, _as_cov, is_physical, symplectic_eigenvalues


def db_to_linear(db: float) -> float:
    return float(10.0 ** (float(db) / 10.0))


def linear_to_db(x: float) -> float:
    return float(10.0 * np.log10(x))


def noise_photons(T: float, f: float) -> float:
    """Planck occupancy ``1 / (exp(h f / k_B T) - 1)`` of a mode at ``f`` hertz."""
    T = float(T)
    f = float(f)
    if not np.isfinite(f) or f <= 0:
        raise ValueError(f"frequency must be > 0 Hz, got {f}")
    if not np.isfinite(T) or T < 0:
        raise ValueError(f"temperature must be >= 0 K, got {T}")
    if T == 0:
        return 0.0
    return float(1.0 / np.expm1(constants.h * f / (constants.k * T)))


def _per_mode(value, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (2,)).copy()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class ChainParams:
    """Measurement chain between the source and the digitiser.

    Parameters
    ----------
    G : float
        Linear power gain, ``>= 1``.
    T_N : float
        System noise temperature in kelvin. It is referred to the amplifier
        input and folds loss and amplifier noise into one number.
    f_s, f_i : float
        Signal and idler centre frequencies in hertz.
    eta_s, eta_i : float
        Transmissivities in ``(0, 1]`` applied before amplification.
    T_env : float
        Temperature of the bath that leaks in through the loss.
    """

    G: float = db_to_linear(61.1)
    T_N: float = 8.0
    f_s: float = 4.5e9
    f_i: float = 6.5e9
    eta_s: float = 1.0
    eta_i: float = 1.0
    T_env: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.G) or self.G < 1:
            raise ValueError(f"gain must be >= 1, got {self.G}")
        if not np.isfinite(self.T_N) or self.T_N < 0:
            raise ValueError(f"T_N must be >= 0 K, got {self.T_N}")
        if not np.isfinite(self.T_env) or self.T_env < 0:
            raise ValueError(f"T_env must be >= 0 K, got {self.T_env}")
        for name in ("f_s", "f_i"):
            f = getattr(self, name)
            if not np.isfinite(f) or f <= 0:
                raise ValueError(f"{name} must be > 0 Hz, got {f}")
        for name in ("eta_s", "eta_i"):
            eta = getattr(self, name)
            if not 0 < eta <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {eta}")

    @classmethod
    def from_db(cls, G_dB: float, **kwargs) -> ChainParams:
        return cls(G=db_to_linear(G_dB), **kwargs)

    @property
    def G_dB(self) -> float:
        return linear_to_db(self.G)

    @property
    def eta(self) -> np.ndarray:
        return np.array([self.eta_s, self.eta_i])

    @property
    def n_sys(self) -> np.ndarray:
        """Input-referred system noise photons for (signal, idler)."""
        return np.array([noise_photons(self.T_N, self.f_s), noise_photons(self.T_N, self.f_i)])

    @property
    def n_env(self) -> np.ndarray:
        return np.array([noise_photons(self.T_env, self.f_s), noise_photons(self.T_env, self.f_i)])


@dataclass(frozen=True)
class DetectedState:
    """Covariance in raw detector units plus what is needed to undo the amplifier.

    ``n_add`` holds the input-referred added noise of (signal, idler).
    """

    cov_raw: np.ndarray
    gain: float
    n_add: np.ndarray
    chain: ChainParams | None = field(default=None, compare=False)

    def __post_init__(self):
        cov = _as_cov(self.cov_raw)
        cov = 0.5 * (cov + cov.T)
        if np.linalg.eigvalsh(cov)[0] <= 0:
            raise ValueError("detected covariance is not positive definite")
        cov.setflags(write=False)
        object.__setattr__(self, "cov_raw", cov)
        object.__setattr__(self, "n_add", _per_mode(self.n_add, "n_add"))

    @property
    def noise_matrix(self) -> np.ndarray:
        """Input-referred added noise ``diag(2 n_add)`` over the four quadratures."""
        return np.diag(np.repeat(2.0 * self.n_add, 2))


def apply_loss(state: GaussianState, eta, n_env=0.0) -> GaussianState:
    """Beam-splitter loss with transmissivity ``eta`` into a bath of ``n_env`` photons.

    ``eta`` and ``n_env`` may be scalars or (signal, idler) pairs.
    """
    eta = _per_mode(eta, "eta")
    n_env = _per_mode(n_env, "n_env")
    if np.any(eta <= 0) or np.any(eta > 1):
        raise ValueError(f"transmissivity must lie in (0, 1], got {eta}")
    if np.any(n_env < 0):
        raise ValueError(f"environment photons must be >= 0, got {n_env}")
    x = np.repeat(np.sqrt(eta), 2)
    y = np.repeat((1 - eta) * (2 * n_env + 1), 2)
    return GaussianState(state.cov * np.outer(x, x) + np.diag(y), state.mean * x)


def amplifier_noise_floor(G: float) -> float:
    """Quantum-limited input-referred added noise of a phase-insensitive amplifier."""
    return 0.5 * (1.0 - 1.0 / G)


def apply_amplifier(state: GaussianState, G: float, n_add) -> DetectedState:
    """Phase-insensitive amplification, ``V -> G * (V + 2 n_add I)``.

    ``n_add`` is referred to the input and must be at least
    ``(1 - 1/G) / 2`` on each mode.
    """
    G = float(G)
    if not np.isfinite(G) or G < 1:
        raise ValueError(f"gain must be >= 1, got {G}")
    n_add = _per_mode(n_add, "n_add")
    floor = amplifier_noise_floor(G)
    if np.any(n_add < floor - EPS_TOL):
        raise ValueError(
            f"added noise {n_add} is below the quantum limit {floor:.6g} for gain {G:.6g}"
        )
    noise = np.diag(np.repeat(2.0 * n_add, 2))
    return DetectedState(G * (state.cov + noise), G, n_add)


def measurement_chain(state: GaussianState, chain: ChainParams) -> DetectedState:
    """Loss (with thermal leakage at ``T_env``) followed by the noisy amplifier."""
    lossy = state
    if chain.eta_s < 1 or chain.eta_i < 1:
        lossy = apply_loss(state, chain.eta, chain.n_env)
    det = apply_amplifier(lossy, chain.G, chain.n_sys)
    return DetectedState(det.cov_raw, det.gain, det.n_add, chain)


def subtract_noise(cov_raw, gain: float, n_add) -> np.ndarray:
    """Refer a raw covariance to the amplifier input and remove the added noise.

    No physicality check; estimated covariances may fluctuate below the
    vacuum bound.
    """
    n_add = _per_mode(n_add, "n_add")
    return np.asarray(cov_raw, dtype=float) / gain - np.diag(np.repeat(2.0 * n_add, 2))


def calibrate(detected: DetectedState) -> GaussianState:
    """Invert the amplifier stage: ``V = V_raw / G - 2 n_sys I``.

    Raises
    ------
    ValueError
        If the calibrated covariance violates the uncertainty principle,
        which indicates a chain description inconsistent with the data.
    """
    cov = subtract_noise(detected.cov_raw, detected.gain, detected.n_add)
    cov = 0.5 * (cov + cov.T)
    if not is_physical(cov):
        try:
            nu = symplectic_eigenvalues(cov)[0]
            detail = f"minimum symplectic eigenvalue {nu:.6g}"
        except ValueError:
            detail = "matrix is not positive definite"
        raise ValueError(f"calibrated covariance is unphysical ({detail}); check the chain")
    return GaussianState(cov)
