"""Experiment configuration, orchestration and result files.

Configuration files use INI syntax: ``[section]`` headers, ``key = value``
lines, and ``#`` or ``;`` comments. Keys are case-insensitive. Lists are
comma separated. Only ``[source]`` is required; every other value has a
default.

Example::

    [source]
    n_grid = 0.01, 0.0316, 0.1, 0.316, 1
    rho = 0.99

    [chain]
    G_dB = 61.1
    T_N_K = 8

    [receiver]
    N = 1000000
    seed = 1234
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import io
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    FitError,
    SweepResult,
    enhancement_model,
    enhancement_points,
    fit_gain,
    power_sweep,
)
from .channels import ChainParams, amplifier_noise_floor, db_to_linear
from .gaussian import EPS_TOL
from .receiver import derive_seed, roc_curve
from .sources import SourceSpec, pump_to_photons

OUT_DIR_ENV = "QENR_OUT_DIR"
SWEEPS = ("entanglement", "covariance", "enhancement", "roc")
ESTIMATORS = ("explicit", "wishart", "analytic")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class SourceConfig:
    kind: str = "both"
    n_grid: tuple[float, ...] = ()
    rho: float = 0.99
    kappa: float = 1.0
    pump_grid: tuple[float, ...] = ()
    roc_n: float = 0.05


@dataclass(frozen=True)
class ChainConfig:
    G_dB: float = 61.1
    T_N_K: float = 8.0
    f_s_Hz: float = 4.5e9
    f_i_Hz: float = 6.5e9
    eta_s: float = 1.0
    eta_i: float = 1.0
    T_env_K: float = 0.0


@dataclass(frozen=True)
class ReceiverConfig:
    N: int = 1_000_000
    roc_N: int = 10_000
    trials: int = 1000
    seed: int = 0
    estimator: str = "explicit"


@dataclass(frozen=True)
class AnalysisConfig:
    sweeps: tuple[str, ...] = SWEEPS
    pfa_grid: tuple[float, ...] = (0.01, 0.05, 0.1, 0.2, 0.5)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "results"
    formats: tuple[str, ...] = ("csv",)


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceConfig = field(default_factory=SourceConfig)
    chain: ChainConfig = field(default_factory=ChainConfig)
    receiver: ReceiverConfig = field(default_factory=ReceiverConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def chain_params(self) -> ChainParams:
        c = self.chain
        return ChainParams(G=db_to_linear(c.G_dB), T_N=c.T_N_K, f_s=c.f_s_Hz, f_i=c.f_i_Hz,
                           eta_s=c.eta_s, eta_i=c.eta_i, T_env=c.T_env_K)

    @property
    def photon_grid(self) -> np.ndarray:
        if self.source.n_grid:
            return np.array(self.source.n_grid)
        return np.array([pump_to_photons(p, self.source.kappa) for p in self.source.pump_grid])

    def with_seed(self, seed: int) -> ExperimentConfig:
        return dataclasses.replace(self, receiver=dataclasses.replace(self.receiver, seed=int(seed)))


_SECTIONS = {
    "source": SourceConfig,
    "chain": ChainConfig,
    "receiver": ReceiverConfig,
    "analysis": AnalysisConfig,
    "output": OutputConfig,
}
_REQUIRED = ("source",)


def _convert(tp, raw: str):
    raw = raw.strip()
    tp = str(tp)
    if tp.startswith("tuple"):
        items = [x.strip() for x in raw.split(",") if x.strip()]
        if "float" in tp:
            return tuple(float(x) for x in items)
        return tuple(items)
    if tp == "float":
        return float(raw)
    if tp == "int":
        value = float(raw)
        if value != int(value):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(value)
    return raw


def _line_numbers(text: str) -> dict:
    """Map ``section`` and ``(section, key)`` to their 1-based line numbers."""
    lines = {}
    section = None
    for k, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"\[([^\]]+)\]", stripped)
        if m:
            section = m.group(1).strip().lower()
            lines.setdefault(section, k)
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", stripped)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), k)
    return lines


def _check(cond: bool, message: str, line):
    if not cond:
        raise ConfigError(message, line)


def _validate(cfg: ExperimentConfig, lines: dict) -> None:
    def at(section, key):
        return lines.get((section, key.lower()), lines.get(section))

    s, c, r, a, o = cfg.source, cfg.chain, cfg.receiver, cfg.analysis, cfg.output
    _check(s.kind in ("quantum", "classical", "both"),
           f"kind must be quantum, classical or both, got {s.kind!r}", at("source", "kind"))
    _check(bool(s.n_grid) != bool(s.pump_grid),
           "give exactly one of n_grid or pump_grid", lines.get("source"))
    grid = s.n_grid or s.pump_grid
    key = "n_grid" if s.n_grid else "pump_grid"
    _check(all(np.isfinite(x) and x >= 0 for x in grid), f"{key} values must be >= 0", at("source", key))
    _check(all(b > a_ for a_, b in zip(grid, grid[1:])), f"{key} must be strictly ascending",
           at("source", key))
    _check(0 <= s.rho <= 1, f"rho must lie in [0, 1], got {s.rho}", at("source", "rho"))
    _check(s.kappa > 0, f"kappa must be > 0, got {s.kappa}", at("source", "kappa"))
    _check(s.roc_n >= 0, f"roc_n must be >= 0, got {s.roc_n}", at("source", "roc_n"))

    _check(c.G_dB >= 0, f"G_dB must be >= 0, got {c.G_dB}", at("chain", "G_dB"))
    _check(c.T_N_K >= 0, f"T_N_K must be >= 0, got {c.T_N_K}", at("chain", "T_N_K"))
    _check(c.T_env_K >= 0, f"T_env_K must be >= 0, got {c.T_env_K}", at("chain", "T_env_K"))
    for k in ("f_s_Hz", "f_i_Hz"):
        _check(getattr(c, k) > 0, f"{k} must be > 0, got {getattr(c, k)}", at("chain", k))
    for k in ("eta_s", "eta_i"):
        v = getattr(c, k)
        _check(0 < v <= 1, f"{k} must lie in (0, 1], got {v}", at("chain", k))
    try:
        chain = cfg.chain_params
    except ValueError as exc:
        raise ConfigError(str(exc), lines.get("chain")) from exc
    floor = amplifier_noise_floor(chain.G)
    _check(bool(np.all(chain.n_sys >= floor - EPS_TOL)),
           f"T_N_K = {c.T_N_K:g} K gives {chain.n_sys.min():.4g} added photons, below the "
           f"quantum limit {floor:.4g} of a {c.G_dB:g} dB amplifier", at("chain", "T_N_K"))

    _check(r.N >= 2, f"N must be >= 2, got {r.N}", at("receiver", "N"))
    _check(r.roc_N >= 2, f"roc_N must be >= 2, got {r.roc_N}", at("receiver", "roc_N"))
    _check(r.trials >= 100, f"trials must be >= 100, got {r.trials}", at("receiver", "trials"))
    _check(r.seed >= 0, f"seed must be >= 0, got {r.seed}", at("receiver", "seed"))
    _check(r.estimator in ESTIMATORS, f"estimator must be one of {ESTIMATORS}, got {r.estimator!r}",
           at("receiver", "estimator"))

    _check(all(x in SWEEPS for x in a.sweeps), f"sweeps must be drawn from {SWEEPS}",
           at("analysis", "sweeps"))
    _check(all(0 < p < 1 for p in a.pfa_grid), "pfa_grid values must lie in (0, 1)",
           at("analysis", "pfa_grid"))
    _check(o.formats == ("csv",), f"only the csv format is supported, got {o.formats}",
           at("output", "formats"))


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text, applying defaults.

    Raises
    ------
    ConfigError
        Unknown section or key, unparsable or out-of-range value, or a
        missing required section. The message carries the line number.
    """
    lines = _line_numbers(text)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}", getattr(exc, "lineno", None)) from exc

    for name in parser.sections():
        if name.lower() not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]", lines.get(name.lower()))
    present = {name.lower(): parser[name] for name in parser.sections()}
    for name in _REQUIRED:
        if name not in present or not present[name]:
            raise ConfigError(f"missing required section [{name}]", lines.get(name))

    blocks = {}
    for name, cls in _SECTIONS.items():
        known = {f.name.lower(): f for f in dataclasses.fields(cls)}
        values = {}
        for key, raw in present.get(name, {}).items():
            line = lines.get((name, key))
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{name}]", line)
            f = known[key]
            try:
                values[f.name] = _convert(f.type, raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {f.name}: {exc}", line) from exc
        blocks[name] = cls(**values)
    cfg = ExperimentConfig(**blocks)
    _validate(cfg, lines)
    return cfg


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def canonicalize(config: ExperimentConfig) -> str:
    """Canonical configuration text: every section and key, defaults filled in."""
    out = io.StringIO()
    for name in _SECTIONS:
        block = getattr(config, name)
        out.write(f"[{name}]\n")
        for f in dataclasses.fields(block):
            out.write(f"{f.name} = {_fmt(getattr(block, f.name))}\n")
        out.write("\n")
    return out.getvalue()


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(canonicalize(config).encode()).hexdigest()


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


@dataclass(frozen=True)
class RunManifest:
    config_hash: str
    seed: int
    version: str
    timestamp: str
    files: tuple[str, ...]
    directory: Path

    def text(self) -> str:
        lines = [
            f"config_sha256 = {self.config_hash}",
            f"seed = {self.seed}",
            f"version = {self.version}",
            f"timestamp = {self.timestamp}",
            "status = complete",
            "files =",
        ]
        lines += [f"  {name}" for name in self.files]
        return "\n".join(lines) + "\n"


def resolve_out_dir(config: ExperimentConfig, out_dir=None) -> Path:
    """``out_dir`` argument, then ``$QENR_OUT_DIR``, then the config value."""
    return Path(out_dir or os.environ.get(OUT_DIR_ENV) or config.output.directory)


def _sweep(config: ExperimentConfig, threads: int) -> SweepResult:
    r = config.receiver
    N = None if r.estimator == "analytic" else r.N
    estimator = "explicit" if r.estimator == "analytic" else r.estimator
    return power_sweep(config.photon_grid, config.chain_params, config.source.rho, N,
                       seed=r.seed, estimator=estimator, workers=threads)


def _write_roc(path: Path, roc, trials: int, pfa_grid, comment: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"# {comment}\n")
        fh.write("pfa,pd,pd_err,threshold\n")
        for pfa in pfa_grid:
            eligible = [p for p in roc if p.pfa <= pfa]
            best = max(eligible, key=lambda p: (p.pd, -p.threshold))
            err = np.sqrt(best.pd * (1 - best.pd) / trials)
            fh.write(f"{pfa!r},{best.pd!r},{float(err)!r},{best.threshold!r}\n")


def run_experiment(config: ExperimentConfig, out_dir=None, threads: int = 1) -> RunManifest:
    """Run the configured sweeps and write figure data plus a manifest.

    Files: ``config.ini`` (canonical), ``fig2_entanglement.csv``,
    ``fig3_covariance.csv``, ``fig4_enhancement.csv`` with ``fig4_fit.txt``,
    ``roc_<kind>.csv``, and ``manifest.txt``. On any error the files written
    so far are removed and the exception propagates.
    """
    directory = resolve_out_dir(config, out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    digest = config_hash(config)
    kinds = ("quantum", "classical") if config.source.kind == "both" else (config.source.kind,)
    sweeps = config.analysis.sweeps
    written: list[str] = []

    def emit(name: str) -> Path:
        written.append(name)
        return directory / name

    try:
        emit("config.ini").write_text(canonicalize(config))
        chain = config.chain_params
        needs_sweep = {"entanglement", "covariance", "enhancement"} & set(sweeps)
        sweep = _sweep(config, threads) if needs_sweep else None

        cols = {"quantum": ("nu_q", "nu_q_err", "c_q", "c_q_err"),
                "classical": ("nu_c", "nu_c_err", "c_c", "c_c_err")}
        if "entanglement" in sweeps:
            columns = ("n", "P_d") + tuple(c for k in kinds for c in cols[k][:2])
            sweep.write_csv(emit("fig2_entanglement.csv"), columns,
                            f"config_sha256={digest} figure=fig2")
        if "covariance" in sweeps:
            columns = ("n", "P_d", "P_d_err") + tuple(c for k in kinds for c in cols[k][2:])
            sweep.write_csv(emit("fig3_covariance.csv"), columns,
                            f"config_sha256={digest} figure=fig3")
        if "enhancement" in sweeps and len(kinds) == 2:
            path = emit("fig4_enhancement.csv")
            with open(path, "w") as fh:
                fh.write(f"# config_sha256={digest} figure=fig4 P0_model={chain.G!r}\n")
                fh.write("n,P_d,P_d_err,E_Q,E_Q_err,E_Q_model\n")
                for row in sweep.rows:
                    model = enhancement_model(row.P_d, chain.G) if row.P_d > 0 else float("nan")
                    fh.write(",".join(repr(float(v)) for v in
                                      (row.n, row.P_d, row.P_d_err, row.E_Q, row.E_Q_err, model)))
                    fh.write("\n")
            try:
                fit = fit_gain(enhancement_points(sweep))
                report = f"{fit}\nP0_linear = {fit.P0!r}\nP0_dB = {fit.P0_dB!r}\n"
            except (FitError, ValueError) as exc:
                report = f"fit failed: {exc}\n"
            emit("fig4_fit.txt").write_text(f"# config_sha256={digest}\n{report}")

        if "roc" in sweeps:
            r = config.receiver
            for j, kind in enumerate(kinds):
                spec = SourceSpec(kind, config.source.roc_n, config.source.rho)
                roc = roc_curve(spec, chain, r.roc_N, r.trials, derive_seed(r.seed, 1, j), threads)
                _write_roc(emit(f"roc_{kind}.csv"), roc, r.trials, config.analysis.pfa_grid,
                           f"config_sha256={digest} source={kind} n={config.source.roc_n!r}")

        names = tuple(written) + ("manifest.txt",)
        manifest = RunManifest(digest, config.receiver.seed, __version__,
                               datetime.now(timezone.utc).isoformat(timespec="seconds"),
                               names, directory)
        (directory / "manifest.txt").write_text(manifest.text())
        return manifest
    except BaseException:
        for name in written:
            (directory / name).unlink(missing_ok=True)
        raise


def describe(config: ExperimentConfig) -> str:
    """Analytic predictions for every grid point, printed before a run."""
    chain = config.chain_params
    s = config.source
    out = io.StringIO()
    out.write(f"chain: G = {chain.G:.6g} ({chain.G_dB:.2f} dB), T_N = {chain.T_N:g} K, "
              f"eta = ({chain.eta_s:g}, {chain.eta_i:g})\n")
    out.write(f"  signal f = {chain.f_s / 1e9:g} GHz: n_sys = {chain.n_sys[0]:.4g} photons\n")
    out.write(f"  idler  f = {chain.f_i / 1e9:g} GHz: n_sys = {chain.n_sys[1]:.4g} photons\n")
    out.write(f"source: kind = {s.kind}, rho = {s.rho:g}\n")
    out.write(f"receiver: N = {config.receiver.N}, estimator = {config.receiver.estimator}, "
              f"seed = {config.receiver.seed}\n\n")
    out.write(f"{'n':>10} {'r':>8} {'nu_q':>8} {'nu_c':>8} {'E_Q model':>10} {'E_Q ratio':>10}\n")
    exact = power_sweep(config.photon_grid, chain, s.rho, None)
    for row in exact.rows:
        n = row.n
        r = np.arcsinh(np.sqrt(n))
        e_model = enhancement_model(row.P_d, chain.G) if row.P_d > 0 else float("inf")
        out.write(f"{n:>10.4g} {r:>8.4f} {row.nu_q:>8.4f} {row.nu_c:>8.4f} "
                  f"{e_model:>10.4f} {row.E_Q:>10.4f}\n")
    return out.getvalue()
