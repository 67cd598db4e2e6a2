"""Quantum enhancement, the single-parameter gain fit and matched-power sweeps."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
from scipy import optimize

from .channels import ChainParams, linear_to_db, measurement_chain, subtract_noise
from .gaussian import I_S, OMEGA, Q_S, GaussianState, partial_transpose, symplectic_eigenvalues
from .receiver import (
    CovarianceEstimate,
    derive_seed,
    detection_statistic,
    statistic_stderr,
    stream_covariance,
    wishart_covariance,
)
from .sources import DEFAULT_RHO, classical_source, quantum_source

log = logging.getLogger(__name__)


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnhancementPoint:
    P_d: float
    E_Q: float
    E_Q_err: float = float("nan")

    def __post_init__(self):
        if not (np.isfinite(self.P_d) and self.P_d > 0):
            raise ValueError(f"P_d must be finite and > 0, got {self.P_d}")
        if not np.isfinite(self.E_Q):
            raise ValueError(f"E_Q must be finite, got {self.E_Q}")


@dataclass(frozen=True)
class FitResult:
    P0: float
    residual: float
    iterations: int

    @property
    def P0_dB(self) -> float:
        return linear_to_db(self.P0)

    def __str__(self):
        return (f"P0 = {self.P0:.6g} ({self.P0_dB:.3f} dB), "
                f"rms residual = {self.residual:.4g}, iterations = {self.iterations}")


def enhancement_model(P_d, P0):
    """Ideal-amplifier enhancement ``sqrt(1 + 2 P0 / P_d)``."""
    P_d = np.asarray(P_d, dtype=float)
    P0 = np.asarray(P0, dtype=float)
    if np.any(~(P_d > 0)) or np.any(~(P0 > 0)):
        raise ValueError("P_d and P0 must be > 0")
    out = np.sqrt(1.0 + 2.0 * P0 / P_d)
    return float(out) if out.ndim == 0 else out


def fit_gain(points, max_iter: int = 500) -> FitResult:
    """Least-squares fit of :func:`enhancement_model` for the scale ``P0``.

    Uniform weights in linear ``E_Q``. The search runs on ``log P0`` inside a
    bracket built from the per-point inversions ``(E_Q**2 - 1) * P_d / 2``.

    Raises
    ------
    ValueError
        Fewer than three points, or a ``P_d`` span below a factor of ten.
    FitError
        No admissible bracket, or the search did not converge.
    """
    points = list(points)
    if len(points) < 3:
        raise ValueError(f"need at least 3 points, got {len(points)}")
    P_d = np.array([p.P_d for p in points])
    E = np.array([p.E_Q for p in points])
    if P_d.max() / P_d.min() < 10:
        raise ValueError("points must span at least a factor of 10 in P_d")

    guesses = (E**2 - 1) * P_d / 2
    guesses = guesses[guesses > 0]
    if guesses.size == 0:
        raise FitError("no point shows E_Q > 1; P0 is not identifiable")
    lo = np.log(guesses.min()) - np.log(1e3)
    hi = np.log(guesses.max()) + np.log(1e3)

    def sse(log_p0):
        return float(np.sum((E - np.sqrt(1 + 2 * np.exp(log_p0) / P_d)) ** 2))

    res = optimize.minimize_scalar(sse, bounds=(lo, hi), method="bounded",
                                   options={"maxiter": max_iter, "xatol": 1e-10})
    if not res.success:
        raise FitError(f"fit did not converge in {max_iter} iterations: {res.message}")
    if min(res.x - lo, hi - res.x) < 1e-6:
        raise FitError("minimum sits on the bracket edge; data are ill-conditioned")
    rms = np.sqrt(res.fun / len(points))
    return FitResult(float(np.exp(res.x)), float(rms), int(res.nit))


@dataclass(frozen=True)
class SweepRow:
    """One matched-power point. Raw covariances are in detector units."""

    n: float
    P_d: float
    P_d_err: float
    c_q: float
    c_q_err: float
    c_c: float
    c_c_err: float
    nu_q: float
    nu_q_err: float
    nu_c: float
    nu_c_err: float
    E_Q: float
    E_Q_err: float
    cov_q: np.ndarray = field(repr=False, compare=False)
    cov_c: np.ndarray = field(repr=False, compare=False)


COLUMNS = tuple(f.name for f in fields(SweepRow) if not f.name.startswith("cov"))


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    chain: ChainParams
    rho: float
    N: int | None
    seed: int | None = None

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS:
            raise KeyError(name)
        return np.array([getattr(r, name) for r in self.rows])

    def __len__(self):
        return len(self.rows)

    def write_csv(self, path, columns=COLUMNS, comment: str | None = None) -> None:
        """CSV with a header row; ``comment`` becomes a leading ``#`` line."""
        with open(path, "w", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in self.rows:
                writer.writerow([repr(float(getattr(row, c))) for c in columns])


def _ppt_nu(cov) -> float:
    pt = partial_transpose(cov)
    try:
        return float(symplectic_eigenvalues(pt)[0])
    except ValueError:
        # noisy estimate lost positive definiteness: fall back to |eig(i OMEGA V)|
        return float(np.min(np.abs(np.linalg.eigvals(1j * OMEGA @ pt))))


def _ppt_nu_stderr(cal: np.ndarray, est: CovarianceEstimate, gain: float) -> float:
    # delta method over the 10 independent entries, gradient by central differences
    idx = [(a, b) for a in range(4) for b in range(a, 4)]
    grad = np.empty(len(idx))
    h = 1e-6 * max(1.0, float(np.max(np.abs(cal))))
    for k, (a, b) in enumerate(idx):
        step = np.zeros((4, 4))
        step[a, b] = step[b, a] = h
        grad[k] = (_ppt_nu(cal + step) - _ppt_nu(cal - step)) / (2 * h)
    cov = np.array([[est.entry_covariance(a, b, c, d) for (c, d) in idx] for (a, b) in idx])
    var = grad @ cov @ grad / gain**2
    return float(np.sqrt(var)) if np.isfinite(var) and var >= 0 else float("nan")


def _ratio(num, num_err, den, den_err):
    if not den > 0:
        return float("nan"), float("nan")
    E = num / den
    return E, float(np.hypot(num_err / den, num * den_err / den**2))


def make_row(n: float, est_q: CovarianceEstimate, est_c: CovarianceEstimate,
             chain: ChainParams, exact: bool = False) -> SweepRow:
    """Derive every sweep column from the two estimated raw covariances.

    ``P_d`` averages the signal-mode diagonal excess over ``I_s``, ``Q_s``
    and both transmitters, which are at matched power.
    """
    floor = measurement_chain(GaussianState.vacuum(), chain)
    gain, n_add = floor.gain, floor.n_add
    cq, cc = est_q.matrix, est_c.matrix
    diag = np.array([cq[I_S, I_S], cq[Q_S, Q_S], cc[I_S, I_S], cc[Q_S, Q_S]])
    P_d = float(diag.mean() - floor.cov_raw[I_S, I_S])
    P_d_err = 0.0 if exact else float(np.sqrt(np.sum(2 * diag**2 / est_q.N)) / 4)

    c_q, c_c = detection_statistic(est_q), detection_statistic(est_c)
    c_q_err = 0.0 if exact else statistic_stderr(est_q)
    c_c_err = 0.0 if exact else statistic_stderr(est_c)

    cal_q = subtract_noise(cq, gain, n_add)
    cal_c = subtract_noise(cc, gain, n_add)
    nu_q, nu_c = _ppt_nu(cal_q), _ppt_nu(cal_c)
    nu_q_err = 0.0 if exact else _ppt_nu_stderr(cal_q, est_q, gain)
    nu_c_err = 0.0 if exact else _ppt_nu_stderr(cal_c, est_c, gain)

    if exact:
        E = c_q / c_c if c_c > 0 else float("nan")
        E_err = 0.0
    else:
        E, E_err = _ratio(c_q, c_q_err, c_c, c_c_err)
    return SweepRow(float(n), P_d, P_d_err, c_q, c_q_err, c_c, c_c_err,
                    nu_q, nu_q_err, nu_c, nu_c_err, float(E), float(E_err), cq, cc)


def _exact_estimate(cov: np.ndarray) -> CovarianceEstimate:
    # stand-in with an effectively infinite sample count
    return CovarianceEstimate.from_matrix(cov, np.iinfo(np.int64).max)


def power_sweep(n_grid, chain: ChainParams, rho: float = DEFAULT_RHO, N: int | None = None,
                seed: int = 0, estimator: str = "explicit", workers: int = 1) -> SweepResult:
    """Send both transmitters through ``chain`` at each photon number in ``n_grid``.

    Parameters
    ----------
    N : int or None
        Samples per record. ``None`` uses the exact detected covariances.
    estimator : {"explicit", "wishart"}
        ``"explicit"`` draws the I/Q records (streamed in blocks);
        ``"wishart"`` draws their sample covariance directly.
    seed : int
        Point ``k`` uses child seeds ``derive_seed(seed, 0, k, 0)`` (quantum)
        and ``derive_seed(seed, 0, k, 1)`` (classical).
    """
    n_grid = np.asarray(n_grid, dtype=float).reshape(-1)
    if n_grid.size == 0 or np.any(n_grid < 0) or np.any(~np.isfinite(n_grid)):
        raise ValueError("n_grid must be non-empty, finite and >= 0")
    if np.any(np.diff(n_grid) <= 0):
        raise ValueError("n_grid must be strictly ascending")
    if estimator not in ("explicit", "wishart"):
        raise ValueError(f"unknown estimator {estimator!r}")
    draw = stream_covariance if estimator == "explicit" else wishart_covariance

    def point(k):
        n = n_grid[k]
        det_q = measurement_chain(quantum_source(n), chain)
        det_c = measurement_chain(classical_source(n, rho), chain)
        if N is None:
            return make_row(n, _exact_estimate(det_q.cov_raw), _exact_estimate(det_c.cov_raw),
                            chain, exact=True)
        est_q = draw(det_q, N, derive_seed(seed, 0, k, 0))
        est_c = draw(det_c, N, derive_seed(seed, 0, k, 1))
        return make_row(n, est_q, est_c, chain)

    ks = range(n_grid.size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(point, ks))
    else:
        rows = tuple(point(k) for k in ks)
    return SweepResult(rows, chain, float(rho), N, None if N is None else seed)


def sweep_entanglement(n_grid, chain, rho=DEFAULT_RHO, N=None, **kwargs) -> SweepResult:
    """Noise-subtracted PPT eigenvalue of both sources versus output power.

    The ``nu_q``/``nu_c`` columns carry the result; the returned sweep is
    the full :class:`SweepResult`.
    """
    return power_sweep(n_grid, chain, rho, N, **kwargs)


def sweep_covariance(n_grid, chain, rho=DEFAULT_RHO, N=None, **kwargs) -> SweepResult:
    """Raw detected covariance of both sources versus ``P_d`` (columns ``c_q``, ``c_c``)."""
    return power_sweep(n_grid, chain, rho, N, **kwargs)


def measured_enhancement(row: SweepRow) -> float:
    """Ratio of detected quantum to classical covariance at one power point."""
    if not row.c_c > 0:
        raise ValueError(f"classical covariance {row.c_c:.4g} is not positive; ratio undefined")
    return row.c_q / row.c_c


def enhancement_points(sweep: SweepResult) -> list[EnhancementPoint]:
    """Rows usable for :func:`fit_gain`; rows with ``P_d <= 0`` or no ratio are dropped."""
    points = []
    for row in sweep.rows:
        if row.P_d > 0 and np.isfinite(row.E_Q):
            points.append(EnhancementPoint(row.P_d, row.E_Q, row.E_Q_err))
        else:
            log.warning("dropping n=%g from the fit (P_d=%.4g, E_Q=%.4g)", row.n, row.P_d, row.E_Q)
    return points
