"""Digitised I/Q records, covariance estimation and the correlation detector."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .channels import ChainParams, DetectedState, measurement_chain
from .gaussian import I_I, I_S, Q_I, Q_S, QUADRATURES, GaussianState
from .sources import SourceSpec

#: Records are generated in blocks of this many rows; the stream of draws does
#: not depend on the block size.
CHUNK_ROWS = 1 << 16


def derive_seed(seed: int, *key: int) -> int:
    """Deterministic 64-bit child seed for stream ``key`` under ``seed``."""
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in key)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class IQRecord:
    samples: np.ndarray
    seed: int | None = None
    chain: ChainParams | None = field(default=None, compare=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 4:
            raise ValueError(f"samples must have shape (N, 4), got {samples.shape}")
        if samples.shape[0] < 2:
            raise ValueError("a record needs at least two samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("record contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.shape[0]

    def to_csv(self, path) -> None:
        """Write ``index, I_s, Q_s, I_i, Q_i`` rows with a header line."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("index",) + QUADRATURES)
            for k, row in enumerate(self.samples):
                writer.writerow([k] + [repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path, seed=None) -> IQRecord:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != 5:
            raise ValueError(f"{path}: expected 5 columns (index, I_s, Q_s, I_i, Q_i)")
        return cls(data[:, 1:], seed)

    def save(self, path) -> None:
        """Binary export (``.npz``) keeping the column order of ``QUADRATURES``."""
        np.savez(path, samples=self.samples, columns=np.array(QUADRATURES),
                 seed=-1 if self.seed is None else self.seed)

    @classmethod
    def load(cls, path) -> IQRecord:
        with np.load(path) as data:
            if tuple(data["columns"]) != QUADRATURES:
                raise ValueError(f"{path}: unexpected column order {tuple(data['columns'])}")
            seed = int(data["seed"])
            return cls(data["samples"], None if seed < 0 else seed)


@dataclass(frozen=True)
class CovarianceEstimate:
    """Unbiased sample covariance with per-entry standard errors."""

    matrix: np.ndarray
    N: int
    stderr: np.ndarray

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("need N >= 2")

    @classmethod
    def from_matrix(cls, matrix, N: int) -> CovarianceEstimate:
        matrix = np.asarray(matrix, dtype=float)
        matrix = 0.5 * (matrix + matrix.T)
        d = np.diag(matrix)
        if np.any(d <= 0):
            raise ValueError("degenerate record: a quadrature has zero sample variance")
        stderr = np.sqrt((np.outer(d, d) + matrix**2) / N)
        return cls(matrix, int(N), stderr)

    def entry_covariance(self, a: int, b: int, c: int, d: int) -> float:
        """Large-N covariance between the estimates of entries (a, b) and (c, d)."""
        m = self.matrix
        return float((m[a, c] * m[b, d] + m[a, d] * m[b, c]) / self.N)


@dataclass(frozen=True)
class ROCPoint:
    pfa: float
    pd: float
    threshold: float


def _cholesky(detected: DetectedState) -> np.ndarray:
    cov = detected.cov_raw if isinstance(detected, DetectedState) else np.asarray(detected)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not positive definite") from exc


def _check_count(N) -> int:
    if int(N) != N or N < 2:
        raise ValueError(f"need an integer sample count N >= 2, got {N}")
    return int(N)


def sample_iq(detected: DetectedState, N: int, seed: int) -> IQRecord:
    """Draw ``N`` zero-mean quadrature vectors with the detected covariance.

    Unit normals from a PCG64 generator seeded with ``seed`` are mapped
    through the Cholesky factor of the covariance.
    """
    N = _check_count(N)
    chol = _cholesky(detected)
    rng = np.random.default_rng(seed)
    samples = rng.standard_normal((N, 4)) @ chol.T
    return IQRecord(samples, seed, getattr(detected, "chain", None))


def estimate_covariance(record: IQRecord) -> CovarianceEstimate:
    """Sample covariance (divisor ``N - 1``) and its standard errors."""
    x = record.samples if isinstance(record, IQRecord) else np.asarray(record, dtype=float)
    N = _check_count(x.shape[0])
    return CovarianceEstimate.from_matrix(np.cov(x, rowvar=False, ddof=1), N)


def stream_covariance(detected: DetectedState, N: int, seed: int,
                      chunk_rows: int = CHUNK_ROWS) -> CovarianceEstimate:
    """Covariance of the record ``sample_iq(detected, N, seed)`` without storing it.

    The draws are generated block by block and merged with the pairwise
    update of Chan, Golub and LeVeque, so memory stays bounded for large N.
    """
    N = _check_count(N)
    chol = _cholesky(detected)
    rng = np.random.default_rng(seed)
    count = 0
    mean = np.zeros(4)
    m2 = np.zeros((4, 4))
    while count < N:
        k = min(chunk_rows, N - count)
        x = rng.standard_normal((k, 4)) @ chol.T
        mu = x.mean(axis=0)
        xc = x - mu
        delta = mu - mean
        total = count + k
        m2 += xc.T @ xc + np.outer(delta, delta) * (count * k / total)
        mean += delta * (k / total)
        count = total
    return CovarianceEstimate.from_matrix(m2 / (N - 1), N)


def wishart_covariance(detected: DetectedState, N: int, seed: int) -> CovarianceEstimate:
    """Draw the sample covariance of ``N`` records directly from its Wishart law.

    Same distribution as ``estimate_covariance(sample_iq(detected, N, seed))``
    at O(1) cost in N. Useful for integration-time studies far beyond what
    explicit sampling allows.
    """
    N = _check_count(N)
    cov = detected.cov_raw if isinstance(detected, DetectedState) else np.asarray(detected)
    _cholesky(cov)
    rng = np.random.default_rng(seed)
    matrix = stats.wishart(df=N - 1, scale=cov / (N - 1)).rvs(random_state=rng)
    return CovarianceEstimate.from_matrix(matrix, N)


def detection_statistic(est: CovarianceEstimate) -> float:
    """Phase-matched signal-idler correlation ``(C[I_s,I_i] - C[Q_s,Q_i]) / 2``."""
    m = est.matrix
    return float(0.5 * (m[I_S, I_I] - m[Q_S, Q_I]))


def statistic_stderr(est: CovarianceEstimate) -> float:
    """Standard error of :func:`detection_statistic` from the Gaussian moment formula."""
    var = 0.25 * (
        est.entry_covariance(I_S, I_I, I_S, I_I)
        + est.entry_covariance(Q_S, Q_I, Q_S, Q_I)
        - 2 * est.entry_covariance(I_S, I_I, Q_S, Q_I)
    )
    return float(np.sqrt(max(var, 0.0)))


def detect(statistic: float, threshold: float) -> bool:
    """``True`` (target present) when the statistic exceeds the threshold."""
    return bool(statistic > threshold)


def null_state(state: GaussianState) -> GaussianState:
    """Target-absent hypothesis: vacuum returns in the signal mode, idler kept."""
    cov = np.eye(4)
    cov[2:, 2:] = state.cov[2:, 2:]
    return GaussianState(cov)


def trial_statistics(detected: DetectedState, N: int, trials: int, seed: int,
                     stream: int = 0, workers: int = 1) -> np.ndarray:
    """Detection statistic for ``trials`` independent records of length ``N``.

    Trial ``t`` uses the child seed ``derive_seed(seed, stream, t)``; results
    are ordered by trial index whatever the number of workers.
    """
    N = _check_count(N)

    def one(t):
        rec = sample_iq(detected, N, derive_seed(seed, stream, t))
        return detection_statistic(estimate_covariance(rec))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.fromiter(pool.map(one, range(trials)), float, trials)
    return np.fromiter((one(t) for t in range(trials)), float, trials)


def roc_from_statistics(h0, h1) -> list[ROCPoint]:
    """Empirical ROC swept over every pooled statistic value.

    Points are ordered by increasing false-alarm probability; the first is
    ``(0, 0)`` at ``+inf`` and the last ``(1, 1)`` at ``-inf``.
    """
    h0 = np.sort(np.asarray(h0, dtype=float))
    h1 = np.sort(np.asarray(h1, dtype=float))
    pooled = np.unique(np.concatenate([h0, h1]))
    if pooled.size < 2:
        raise ValueError("degenerate statistics: every trial gave the same value")
    thresholds = np.concatenate([[np.inf], pooled[::-1], [-np.inf]])
    pfa = 1.0 - np.searchsorted(h0, thresholds, side="right") / h0.size
    pd = 1.0 - np.searchsorted(h1, thresholds, side="right") / h1.size
    return [ROCPoint(float(a), float(b), float(t)) for a, b, t in zip(pfa, pd, thresholds)]


def roc_curve(source: SourceSpec, chain: ChainParams, N: int, trials: int, seed: int,
              workers: int = 1) -> list[ROCPoint]:
    """Monte Carlo ROC of the correlation detector for one transmitter.

    H1 sends ``source`` through ``chain``; H0 keeps the idler but the signal
    return is vacuum, so the signal-idler cross covariance is zero.
    """
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    state = source.state()
    h1 = trial_statistics(measurement_chain(state, chain), N, trials, seed, 1, workers)
    h0 = trial_statistics(measurement_chain(null_state(state), chain), N, trials, seed, 0, workers)
    return roc_from_statistics(h0, h1)


def pd_at_pfa(roc: list[ROCPoint], pfa: float) -> float:
    """Best detection probability reachable without exceeding ``pfa``."""
    return max(p.pd for p in roc if p.pfa <= pfa)
