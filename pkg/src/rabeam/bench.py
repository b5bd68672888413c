"""Monte Carlo experiment runner: SNR x (p, q) sweeps, CSV and SVG output.

Configs are flat TOML files. Keys (all optional, defaults reproduce the
reference protocol)::

    seed, runs, snr_list_db, pq_list (list of [p, q]; "inf" and "3/2" allowed)
    eta_factor, gamma_factor, alpha, max_iter, grid_points
    constraint_mode ("quadratic" | "robust_norm"), p1, q1, eta1_factor
    n_sensors, spacing, noise_power, snapshots, exact_covariance
    signal_density, signal_center, signal_spread
    presumed_density, presumed_center, presumed_spread, model_exact
    interferer_density, interferer_center, interferer_spread, inr_db (lists)
    out_csv, out_svg
"""
from __future__ import annotations

import csv
import logging
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .linalg import ExtRational, gram_factor
from .rab import (QuadraticConstraint, RabError, RabProblem, RobustNormConstraint,
                  StoppingRule, solve_sequential, worst_case_sinr)
from .scenario import (Density, ScatteredSource, Scenario, ULAConfig, build_covariances,
                       optimal_sinr, sample_covariance, sinr)
from .socp import SolverConfig, SolverError
from .worst_case import UncertaintySpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

CSV_COLUMNS = ["snr_db", "p", "q", "run", "sinr_db", "worst_case_sinr_db", "opt_bound_db",
               "iterations", "cpu_ms", "status"]


class ConfigError(ValueError):
    pass


def _pq(pair) -> tuple[ExtRational, ExtRational]:
    if len(pair) != 2:
        raise ConfigError(f"pq entry must be a pair, got {pair!r}")
    return ExtRational.of(pair[0]), ExtRational.of(pair[1])


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    runs: int = 100
    snr_list_db: tuple[float, ...] = (0.0, 10.0, 20.0, 30.0, 40.0)
    pq_list: tuple[tuple[ExtRational, ExtRational], ...] = tuple(
        _pq((2, q)) for q in (1, "3/2", 2, 4, "inf"))
    eta_factor: float = 0.05
    gamma_factor: float = 0.005
    alpha: float = 1e-6
    max_iter: int = 300
    grid_points: int = 2048
    constraint_mode: str = "quadratic"
    p1: ExtRational = ExtRational.of(2)
    q1: ExtRational = ExtRational.of(2)
    eta1_factor: float = 0.05
    # scenario
    n_sensors: int = 10
    spacing: float = 0.5
    noise_power: float = 1.0
    snapshots: int = 50
    exact_covariance: bool = False  # use the true covariance instead of sampling
    signal_density: str = "gaussian"
    signal_center: float = 30.0
    signal_spread: float = 4.0
    presumed_density: str = "gaussian"
    presumed_center: float = 34.0
    presumed_spread: float = 6.0
    model_exact: bool = False  # presumed signal equals the true one
    interferer_density: tuple[str, ...] = ("uniform",)
    interferer_center: tuple[float, ...] = (10.0,)
    interferer_spread: tuple[float, ...] = (10.0,)
    inr_db: tuple[float, ...] = (10.0,)
    out_csv: str | None = None
    out_svg: str | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if not self.snr_list_db:
            raise ConfigError("snr_list_db is empty")
        if not self.pq_list:
            raise ConfigError("pq_list is empty")
        for name in ("eta_factor", "gamma_factor", "eta1_factor"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.gamma_factor == 0:
            raise ConfigError("gamma_factor must be positive")
        if self.constraint_mode not in ("quadratic", "robust_norm"):
            raise ConfigError(f"unknown constraint_mode {self.constraint_mode!r}")
        n = len(self.interferer_center)
        if not (len(self.interferer_density) == len(self.interferer_spread)
                == len(self.inr_db) == n):
            raise ConfigError("interferer lists must have equal length")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(raw)
        try:
            if "pq_list" in kw:
                kw["pq_list"] = tuple(_pq(pair) for pair in kw["pq_list"])
            for key in ("p1", "q1"):
                if key in kw:
                    kw[key] = ExtRational.of(kw[key])
            for key in ("snr_list_db", "interferer_center", "interferer_spread", "inr_db"):
                if key in kw:
                    v = kw[key]
                    kw[key] = tuple(float(x) for x in (v if isinstance(v, list) else [v]))
            if "interferer_density" in kw:
                v = kw["interferer_density"]
                kw["interferer_density"] = tuple(v if isinstance(v, list) else [v])
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        with open(path, "rb") as fh:
            try:
                raw = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(raw)

    def scenario(self, snr_db: float) -> Scenario:
        power = self.noise_power * 10 ** (snr_db / 10)
        true = ScatteredSource(Density(self.signal_density), self.signal_center,
                               self.signal_spread, power)
        presumed = true if self.model_exact else ScatteredSource(
            Density(self.presumed_density), self.presumed_center, self.presumed_spread, power)
        interferers = tuple(
            ScatteredSource(Density(d), c, s, self.noise_power * 10 ** (inr / 10))
            for d, c, s, inr in zip(self.interferer_density, self.interferer_center,
                                    self.interferer_spread, self.inr_db))
        return Scenario(ULAConfig(self.n_sensors, self.spacing), true, presumed, interferers,
                        self.noise_power, self.snapshots, self.seed)


@dataclass
class ResultRow:
    snr_db: float
    p: ExtRational
    q: ExtRational
    run: int
    sinr_db: float
    worst_case_sinr_db: float
    opt_bound_db: float
    iterations: int
    cpu_ms: float
    status: str

    def sort_key(self):
        return (self.snr_db, float(self.p), float(self.q), self.run)


def _db(x: float) -> float:
    if math.isnan(x):
        return math.nan
    return 10 * math.log10(x) if x > 0 else -math.inf


def make_problem(config: ExperimentConfig, R_hat, Q, p, q) -> RabProblem:
    """Assemble the per-run problem with the configured scale conventions."""
    gamma = config.gamma_factor * np.linalg.norm(R_hat)
    eta = config.eta_factor * np.linalg.norm(Q, 2)
    constraint = QuadraticConstraint()
    if config.constraint_mode == "robust_norm":
        P = gram_factor(R_hat)
        eta1 = config.eta1_factor * np.linalg.norm(P, 2)
        constraint = RobustNormConstraint(P, UncertaintySpec(config.p1, config.q1, eta1))
    return RabProblem(R_hat, Q, gamma, UncertaintySpec(p, q, eta), constraint)


def _run_unit(args) -> list[ResultRow]:
    """All (p, q) cells for one (snr, run); they share the same snapshots."""
    config, snr_idx, run, cov = args
    snr = config.snr_list_db[snr_idx]
    R_s, R_ipn, R, Q, bound_db = cov
    if config.exact_covariance:
        R_hat = R
    else:
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, snr_idx, run]))
        R_hat = sample_covariance(R, config.snapshots, rng)
    rule = StoppingRule(config.alpha, config.max_iter)
    rows = []
    for p, q in config.pq_list:
        start = time.perf_counter()
        try:
            problem = make_problem(config, R_hat, Q, p, q)
            w, _, trace = solve_sequential(problem, rule, SolverConfig())
            cpu_ms = 1e3 * (time.perf_counter() - start)
            wc = worst_case_sinr(problem, w) / problem.worst_case_denominator(w)
            rows.append(ResultRow(snr, p, q, run, _db(sinr(w, R_s, R_ipn)), _db(wc), bound_db,
                                  len(trace.records) - 1, cpu_ms, trace.stop_reason.value))
        except (RabError, SolverError, FloatingPointError, np.linalg.LinAlgError) as exc:
            cpu_ms = 1e3 * (time.perf_counter() - start)
            log.warning("snr=%s p=%s q=%s run=%d failed: %s", snr, p, q, run, exc)
            rows.append(ResultRow(snr, p, q, run, math.nan, math.nan, bound_db, 0, cpu_ms,
                                  f"error:{type(exc).__name__}"))
    return rows


def run_experiment(config: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    """Rows for every (snr, p, q, run), sorted; deterministic given the seed."""
    units = []
    for i, snr in enumerate(config.snr_list_db):
        covs = build_covariances(config.scenario(snr), config.grid_points)
        Q = gram_factor(covs.R_s_presumed)
        cov = (covs.R_s, covs.R_ipn, covs.R, Q, _db(optimal_sinr(covs.R_s, covs.R_ipn)))
        units.extend((config, i, run, cov) for run in range(config.runs))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_unit, units, chunksize=max(1, len(units) // (4 * threads))))
    else:
        chunks = [_run_unit(u) for u in units]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=ResultRow.sort_key)
    return rows


# ---------------------------------------------------------------------------
# CSV


def _fmt_float(x: float) -> str:
    return repr(float(x))


def emit_csv(rows: Sequence[ResultRow], path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CSV_COLUMNS)
        for r in sorted(rows, key=ResultRow.sort_key):
            wr.writerow([_fmt_float(r.snr_db), str(r.p), str(r.q), r.run, _fmt_float(r.sinr_db),
                         _fmt_float(r.worst_case_sinr_db), _fmt_float(r.opt_bound_db),
                         r.iterations, _fmt_float(r.cpu_ms), r.status])


def read_csv(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected header {rd.fieldnames}")
        return [ResultRow(float(d["snr_db"]), ExtRational.of(d["p"]), ExtRational.of(d["q"]),
                          int(d["run"]), float(d["sinr_db"]), float(d["worst_case_sinr_db"]),
                          float(d["opt_bound_db"]), int(d["iterations"]), float(d["cpu_ms"]),
                          d["status"]) for d in rd]


# ---------------------------------------------------------------------------
# SVG

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf",
           "#7f7f7f"]


def aggregate(rows: Sequence[ResultRow], metric: str = "sinr_db"):
    """Mean of ``metric`` over runs: {(p, q): [(snr, mean), ...]} skipping non-finite values."""
    acc: dict = {}
    for r in rows:
        acc.setdefault((r.p, r.q), {}).setdefault(r.snr_db, []).append(getattr(r, metric))
    out = {}
    for key, by_snr in acc.items():
        pts = []
        for snr in sorted(by_snr):
            vals = [v for v in by_snr[snr] if math.isfinite(v)]
            if vals:
                pts.append((snr, float(np.mean(vals))))
        out[key] = pts
    return out


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    return [first + k * step for k in range(int((hi - first) / step + 1e-9) + 1)]


def emit_svg_lines(rows: Sequence[ResultRow], path, metric: str = "sinr_db",
                   title: str | None = None) -> int:
    """Line plot of the per-(p, q) mean of ``metric`` against SNR.

    Returns the number of polylines drawn. Series without a finite value
    are dropped with a warning.
    """
    if not rows:
        raise ValueError("no rows to plot")
    series = aggregate(rows, metric)
    drawn = {}
    for key, pts in series.items():
        if pts:
            drawn[key] = pts
        else:
            warnings.warn(f"series p={key[0]} q={key[1]} has no finite {metric}; skipped")
    width, height = 640, 420
    left, right, top, bottom = 70, 150, 40, 55
    xs = [x for pts in drawn.values() for x, _ in pts] or [0.0, 1.0]
    ys = [y for pts in drawn.values() for _, y in pts] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    pad = 0.05 * (y1 - y0) if y1 > y0 else 1.0
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (y1 - y) / (y1 - y0) * ph

    ylabel = {"sinr_db": "mean output SINR (dB)", "cpu_ms": "mean CPU time (ms)",
              "worst_case_sinr_db": "mean worst-case SINR (dB)"}.get(metric, metric)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        X = sx(t)
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        Y = sy(t)
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left + pw}" y2="{Y:.2f}" '
                   f'stroke="#dddddd"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">SNR (dB)</text>')
    out.append(f'<text x="18" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{left + pw / 2}" y="24" text-anchor="middle">{escape(title)}</text>')
    for k, (key, pts) in enumerate(sorted(drawn.items(), key=lambda kv: (float(kv[0][0]),
                                                                           float(kv[0][1])))):
        color = PALETTE[k % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        label = f"p={key[0]}, q={key[1]}"
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}">'
                   f'<title>{escape(label)}</title></polyline>')
        for x, y in pts:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        ly = top + 16 + 18 * k
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
    return len(drawn)


def cpu_svg_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + "_cpu" + p.suffix)


def apply_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    kw = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **kw) if kw else config
