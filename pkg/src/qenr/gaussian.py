"""Two-mode Gaussian states in the (I_s, Q_s, I_i, Q_i) quadrature basis.

Covariances are normalised so that the vacuum has ``cov = identity``; a
single mode with ``n`` photons then has diagonal entries ``2n + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Quadrature ordering shared by every matrix and sample record in the package.
I_S, Q_S, I_I, Q_I = 0, 1, 2, 3
QUADRATURES = ("I_s", "Q_s", "I_i", "Q_i")
MODES = {"s": (I_S, Q_S), "i": (I_I, Q_I)}

#: Absolute slack on the vacuum bound for physicality checks.
EPS_TOL = 1e-9

OMEGA = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)

# Partial transposition flips the sign of Q_i.
_PT_SIGNS = np.array([1.0, 1.0, 1.0, -1.0])


def _as_cov(cov) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (4, 4):
        raise ValueError(f"covariance must be 4x4, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise ValueError("covariance contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(cov))))
    if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
        raise ValueError("covariance is not symmetric")
    return cov


@dataclass(frozen=True)
class GaussianState:
    """Zero-mean (by default) two-mode Gaussian state.

    Parameters
    ----------
    cov : array_like, shape (4, 4)
        Symmetric covariance in vacuum units. It is symmetrised on
        construction and must satisfy the uncertainty principle.
    mean : array_like, shape (4,), optional
        Quadrature expectations. Defaults to zeros.
    """

    cov: np.ndarray
    mean: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        cov = _as_cov(self.cov)
        cov = 0.5 * (cov + cov.T)
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        if mean.shape != (4,) or not np.all(np.isfinite(mean)):
            raise ValueError("mean must be a finite 4-vector")
        nu = symplectic_eigenvalues(cov)
        if nu[0] < 1.0 - EPS_TOL:
            raise ValueError(
                f"unphysical covariance: minimum symplectic eigenvalue {nu[0]:.6g} < 1"
            )
        cov.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)

    @classmethod
    def vacuum(cls) -> GaussianState:
        return cls(np.eye(4))

    @classmethod
    def thermal(cls, n_s: float, n_i: float | None = None) -> GaussianState:
        """Product of two thermal modes with ``n_s`` and ``n_i`` photons."""
        n_i = n_s if n_i is None else n_i
        return cls(np.diag([2 * n_s + 1, 2 * n_s + 1, 2 * n_i + 1, 2 * n_i + 1]))


def _cross_block_state(diag_s: float, diag_i: float, cross: float) -> np.ndarray:
    # I-I correlated, Q-Q anticorrelated (phase-conjugate sidebands)
    cov = np.diag([diag_s, diag_s, diag_i, diag_i]).astype(float)
    cov[I_S, I_I] = cov[I_I, I_S] = cross
    cov[Q_S, Q_I] = cov[Q_I, Q_S] = -cross
    return cov


def tms_covariance(r: float) -> GaussianState:
    """Two-mode squeezed vacuum with squeezing parameter ``r``.

    Each mode carries ``sinh(r)**2`` photons; diagonal entries are
    ``cosh(2r)`` and the cross block is ``sinh(2r) * diag(1, -1)``.
    """
    r = float(r)
    if not np.isfinite(r) or r < 0:
        raise ValueError(f"squeezing parameter must be finite and >= 0, got {r}")
    return GaussianState(_cross_block_state(np.cosh(2 * r), np.cosh(2 * r), np.sinh(2 * r)))


def partial_transpose(state) -> np.ndarray:
    """Covariance of the partially transposed state (sign flip of ``Q_i``).

    Accepts a :class:`GaussianState` or a bare 4x4 matrix and returns a plain
    array, since the result need not be a physical state.
    """
    cov = state.cov if isinstance(state, GaussianState) else _as_cov(state)
    return cov * np.outer(_PT_SIGNS, _PT_SIGNS)


def symplectic_eigenvalues(cov) -> np.ndarray:
    """Symplectic eigenvalues ``(nu_1, nu_2)`` of a positive-definite covariance.

    These are the moduli of the eigenvalues of ``i * OMEGA @ cov``. The
    spectrum is taken from the Hermitian matrix ``S (i OMEGA) S`` with
    ``S = cov**(1/2)``, which is similar to ``i OMEGA cov`` but keeps the
    eigensolver well conditioned for strongly squeezed inputs.

    Raises
    ------
    ValueError
        If ``cov`` is not symmetric or not positive definite.
    """
    cov = _as_cov(cov)
    cov = 0.5 * (cov + cov.T)
    w, u = np.linalg.eigh(cov)
    if w[0] <= 0:
        raise ValueError("covariance is not positive definite")
    root = (u * np.sqrt(w)) @ u.T
    herm = 1j * (root @ OMEGA @ root)
    spec = np.sort(np.abs(np.linalg.eigvalsh(herm)))
    # eigenvalues come in +/- pairs
    return np.array([spec[0], spec[2]])


def ppt_min_eigenvalue(state) -> float:
    """Smallest symplectic eigenvalue of the partial transpose.

    A value below one certifies signal-idler entanglement.
    """
    return float(symplectic_eigenvalues(partial_transpose(state))[0])


def photon_number(state, mode: str) -> float:
    """Mean photon number of mode ``"s"`` or ``"i"``."""
    if mode not in MODES:
        raise ValueError(f"mode must be 's' or 'i', got {mode!r}")
    cov = state.cov if isinstance(state, GaussianState) else _as_cov(state)
    jq, kq = MODES[mode]
    n = (cov[jq, jq] + cov[kq, kq]) / 4.0 - 0.5
    if n < -EPS_TOL:
        raise ValueError(f"negative photon number {n:.3g}: unphysical or miscalibrated matrix")
    return float(max(n, 0.0))


def is_physical(cov) -> bool:
    try:
        return bool(symplectic_eigenvalues(cov)[0] >= 1.0 - EPS_TOL)
    except ValueError:
        return False
