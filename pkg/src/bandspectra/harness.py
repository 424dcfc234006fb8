"""Experiment orchestration: deterministic Monte Carlo runs and reports.

Every random draw is addressed by (master seed, experiment, size index,
replica index, row index), so replicas can run on any number of workers and
the aggregated reports come out byte-identical. Aggregation always walks
replicas in index order.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import ValidationError
from .histogram import Histogram, build_histogram, l1_distance, uniform_edges
from .limits import (
    clt_covariance_matrix,
    lln_limit,
    nu_reference_histogram,
    spectral_density_range,
    build_limit_table,
)
from .matrices import banded_covariance, symmetric_eigenvalues, trace_power
from .oracle import exact_trace_cumulant
from .process import convolve_rows, sample_driver_rows, simulate_data_matrix
from .rng import GOLDEN, RandomStream, child_seeds, derive_seed, mix64

EXPERIMENT_LLN = 0
EXPERIMENT_CLT = 1
EXPERIMENT_ORACLE = 2

N_BATCHES = 20
Z_THRESHOLD = 4.0
LLN_MOMENT_TOL = 0.05
CLT_DEGENERATE_FLOOR = 0.05
CLT_BAND_RATIO_WARN = 0.1


def _map_ordered(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def _batch_slices(m: int, n_batches: int = N_BATCHES) -> list[slice]:
    n_batches = min(n_batches, m)
    bounds = np.linspace(0, m, n_batches + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def batched_se(batch_stats) -> float:
    stats = np.asarray(batch_stats, dtype=np.float64)
    if stats.size < 2:
        return 0.0
    return float(np.std(stats, ddof=1) / math.sqrt(stats.size))


def _z_score(estimate: float, target: float, se: float) -> float:
    # standard errors at rounding scale mean the statistic is deterministic;
    # compare directly instead of dividing noise by noise
    floor = 1e-12 * max(1.0, abs(target), abs(estimate))
    if se <= floor:
        if abs(estimate - target) <= floor:
            return 0.0
        return math.inf if estimate > target else -math.inf
    return (estimate - target) / se


# ---------------------------------------------------------------------------
# law-of-large-numbers experiment


@dataclass
class LlnSizeResult:
    p: int
    n: int
    b: int
    replicas: int
    eigen_replicas: int
    moment_mean: dict  # k -> mean of p^-1 trace Y^k
    moment_target: dict  # k -> limit value
    moment_rel_err: dict
    moment_var: dict  # k -> across-replica variance
    moment_se: dict
    moment_z: dict
    empirical_hist: Histogram | None
    reference_hist: Histogram | None
    l1: float | None


@dataclass
class LlnReport:
    experiment: str
    config_echo: dict
    sizes: list[LlnSizeResult]
    variance_trend_ok: dict | None  # k -> strictly decreasing across sizes
    l1_trend_ok: bool | None
    runtime: float

    @property
    def all_pass(self) -> bool:
        for row in self.summary_rows():
            if row[-1] == "fail":
                return False
        return True

    def summary_rows(self) -> list[tuple]:
        rows = []
        for s in self.sizes:
            for k in sorted(s.moment_mean):
                ok = "pass" if s.moment_rel_err[k] <= LLN_MOMENT_TOL else "fail"
                rows.append(
                    ("lln_moment", s.p, s.n, s.b, k, "", s.moment_mean[k],
                     s.moment_target[k], s.moment_se[k], s.moment_z[k], ok)
                )
            for k in sorted(s.moment_var):
                rows.append(
                    ("lln_variance", s.p, s.n, s.b, k, "", s.moment_var[k], 0.0, "", "", "")
                )
            if s.l1 is not None:
                rows.append(("lln_l1", s.p, s.n, s.b, "", "", s.l1, "", "", "", ""))
        if self.variance_trend_ok is not None:
            last = self.sizes[-1]
            for k in sorted(self.variance_trend_ok):
                ok = self.variance_trend_ok[k]
                rows.append(
                    ("lln_variance_trend", last.p, last.n, last.b, k, "",
                     1.0 if ok else 0.0, 1.0, "", "", "pass" if ok else "fail")
                )
        if self.l1_trend_ok is not None:
            last = self.sizes[-1]
            rows.append(
                ("lln_l1_trend", last.p, last.n, last.b, "", "",
                 1.0 if self.l1_trend_ok else 0.0, 1.0, "", "",
                 "pass" if self.l1_trend_ok else "fail")
            )
        return rows


def _lln_replica(args):
    model, p, n, b, k_list, master, size_idx, rep_idx, want_eigs, jacobi_tol = args
    stream = RandomStream(master, (EXPERIMENT_LLN, size_idx, rep_idx))
    x = simulate_data_matrix(model, n, p, stream)
    y = banded_covariance(x, b)
    traces = np.array([trace_power(y, k) / p for k in k_list])
    eigs = symmetric_eigenvalues(y, jacobi_tol) if want_eigs else None
    return traces, eigs


def run_lln(config: ExperimentConfig) -> LlnReport:
    config.validate()
    t0 = time.perf_counter()
    model = config.model
    per_size = []
    for size_idx, (p, n, b) in enumerate(config.schedule):
        m = config.replicas
        eigen_count = m if config.eigen_replicas is None else min(config.eigen_replicas, m)
        args = [
            (model, p, n, b, config.k_list, config.seed, size_idx, rep,
             rep < eigen_count, config.jacobi_tol)
            for rep in range(m)
        ]
        results = _map_ordered(_lln_replica, args, config.workers)
        traces = np.vstack([r[0] for r in results])  # (m, K)
        eigs = None
        if eigen_count > 0:
            eigs = np.concatenate([results[r][1] for r in range(eigen_count)])
        per_size.append((p, n, b, m, eigen_count, traces, eigs))

    # one bin grid for the whole run, so distances compare across sizes:
    # union of every empirical support with the reference support, padded
    edges = None
    collected = [eigs for *_, eigs in per_size if eigs is not None]
    if collected:
        ref_lo, ref_hi = spectral_density_range(model, config.reference_grid)
        lo = min(ref_lo, min(float(np.min(e)) for e in collected))
        hi = max(ref_hi, max(float(np.max(e)) for e in collected))
        edges = uniform_edges(lo, hi, config.bins)

    sizes: list[LlnSizeResult] = []
    for p, n, b, m, eigen_count, traces, eigs in per_size:
        moment_mean, moment_target, moment_rel, moment_var, moment_se, moment_z = (
            {}, {}, {}, {}, {}, {}
        )
        for col, k in enumerate(config.k_list):
            vals = traces[:, col]
            mean = float(np.mean(vals))
            target = lln_limit(model, k)
            moment_mean[k] = mean
            moment_target[k] = target
            moment_rel[k] = abs(mean - target) / abs(target) if target != 0 else abs(mean)
            moment_var[k] = float(np.var(vals, ddof=1)) if m > 1 else 0.0
            se = math.sqrt(moment_var[k] / m) if m > 1 else 0.0
            moment_se[k] = se
            moment_z[k] = _z_score(mean, target, se)
        emp_hist = ref_hist = None
        l1 = None
        if eigs is not None:
            emp_hist = build_histogram(eigs, edges, 1.0 / eigs.size)
            ref_hist = nu_reference_histogram(model, edges, config.reference_grid)
            l1 = l1_distance(emp_hist, ref_hist)
        sizes.append(
            LlnSizeResult(
                p=p, n=n, b=b, replicas=m, eigen_replicas=eigen_count,
                moment_mean=moment_mean, moment_target=moment_target,
                moment_rel_err=moment_rel, moment_var=moment_var,
                moment_se=moment_se, moment_z=moment_z,
                empirical_hist=emp_hist, reference_hist=ref_hist, l1=l1,
            )
        )
    variance_trend = None
    l1_trend = None
    if config.trends_enabled and len(sizes) > 1:
        variance_trend = {}
        for k in config.k_list:
            seq = [s.moment_var[k] for s in sizes]
            variance_trend[k] = all(b < a for a, b in zip(seq, seq[1:]))
        if all(s.l1 is not None for s in sizes):
            l1s = [s.l1 for s in sizes]
            l1_trend = all(b < a for a, b in zip(l1s, l1s[1:]))
    return LlnReport(
        experiment="lln",
        config_echo=config.to_dict(),
        sizes=sizes,
        variance_trend_ok=variance_trend,
        l1_trend_ok=l1_trend,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# central-limit-theorem experiment


@dataclass
class CltSizeResult:
    p: int
    n: int
    b: int
    replicas: int
    k_list: tuple
    trace_mean: np.ndarray  # (K,) raw trace means
    sample_cov: np.ndarray  # (K, K) of scaled centered traces
    target_cov: np.ndarray
    se: np.ndarray
    z: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray
    skew_se: float
    kurt_se: float

    def entry_pass(self, a: int, b_: int) -> bool:
        target = self.target_cov[a, b_]
        if abs(target) < CLT_DEGENERATE_FLOOR:
            return abs(self.sample_cov[a, b_]) < CLT_DEGENERATE_FLOOR
        return abs(self.z[a, b_]) <= Z_THRESHOLD


@dataclass
class CltReport:
    experiment: str
    config_echo: dict
    sizes: list[CltSizeResult]
    runtime: float

    @property
    def all_pass(self) -> bool:
        return all(row[-1] != "fail" for row in self.summary_rows())

    def summary_rows(self) -> list[tuple]:
        rows = []
        for s in self.sizes:
            ks = list(s.k_list)
            for a, k in enumerate(ks):
                for b_, ell in enumerate(ks):
                    ok = "pass" if s.entry_pass(a, b_) else "fail"
                    rows.append(
                        ("clt_covariance", s.p, s.n, s.b, k, ell,
                         float(s.sample_cov[a, b_]), float(s.target_cov[a, b_]),
                         float(s.se[a, b_]), float(s.z[a, b_]), ok)
                    )
            for a, k in enumerate(ks):
                zs = _z_score(float(s.skewness[a]), 0.0, s.skew_se)
                ok = "pass" if abs(zs) <= Z_THRESHOLD else "fail"
                rows.append(
                    ("clt_skewness", s.p, s.n, s.b, k, "",
                     float(s.skewness[a]), 0.0, s.skew_se, zs, ok)
                )
                zk = _z_score(float(s.kurtosis[a]), 0.0, s.kurt_se)
                ok = "pass" if abs(zk) <= Z_THRESHOLD else "fail"
                rows.append(
                    ("clt_kurtosis", s.p, s.n, s.b, k, "",
                     float(s.kurtosis[a]), 0.0, s.kurt_se, zk, ok)
                )
        return rows


def _clt_replica(args):
    model, p, n, b, k_list, master, size_idx, rep_idx = args
    stream = RandomStream(master, (EXPERIMENT_CLT, size_idx, rep_idx))
    x = simulate_data_matrix(model, n, p, stream)
    y = banded_covariance(x, b)
    return np.array([trace_power(y, k) for k in k_list])


def _scaled_cov(traces: np.ndarray, scale: float) -> np.ndarray:
    centered = scale * (traces - np.mean(traces, axis=0, keepdims=True))
    m = traces.shape[0]
    return centered.T @ centered / (m - 1)


def run_clt(config: ExperimentConfig) -> CltReport:
    config.validate()
    if config.replicas < 200:
        raise ValidationError(
            [f"CLT runs need at least 200 replicas, got {config.replicas} "
             "(standard errors would be meaningless)"]
        )
    t0 = time.perf_counter()
    model = config.model
    target = clt_covariance_matrix(model, config.k_list)
    sizes: list[CltSizeResult] = []
    for size_idx, (p, n, b) in enumerate(config.schedule):
        if b / n > CLT_BAND_RATIO_WARN:
            warnings.warn(
                f"b/n = {b / n:.3f} > {CLT_BAND_RATIO_WARN} at (p={p}, n={n}, b={b}); "
                "the limiting covariance may be a poor match",
                stacklevel=2,
            )
        m = config.replicas
        args = [
            (model, p, n, b, config.k_list, config.seed, size_idx, rep)
            for rep in range(m)
        ]
        traces = np.vstack(_map_ordered(_clt_replica, args, config.workers))
        scale = math.sqrt(n / p)
        sample_cov = _scaled_cov(traces, scale)
        batch_covs = np.stack(
            [_scaled_cov(traces[sl], scale) for sl in _batch_slices(m)]
        )
        se = np.std(batch_covs, axis=0, ddof=1) / math.sqrt(batch_covs.shape[0])
        z = np.empty_like(sample_cov)
        for a in range(z.shape[0]):
            for b_ in range(z.shape[1]):
                z[a, b_] = _z_score(sample_cov[a, b_], target[a, b_], se[a, b_])
        scaled = scale * (traces - np.mean(traces, axis=0, keepdims=True))
        m2 = np.mean(scaled**2, axis=0)
        safe = np.where(m2 > 0, m2, 1.0)
        skew = np.where(m2 > 0, np.mean(scaled**3, axis=0) / safe**1.5, 0.0)
        kurt = np.where(m2 > 0, np.mean(scaled**4, axis=0) / safe**2 - 3.0, 0.0)
        sizes.append(
            CltSizeResult(
                p=p, n=n, b=b, replicas=m, k_list=config.k_list,
                trace_mean=np.mean(traces, axis=0),
                sample_cov=sample_cov, target_cov=target, se=se, z=z,
                skewness=skew, kurtosis=kurt,
                skew_se=math.sqrt(6.0 / m), kurt_se=math.sqrt(24.0 / m),
            )
        )
    return CltReport(
        experiment="clt",
        config_echo=config.to_dict(),
        sizes=sizes,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# oracle cross-check experiment


@dataclass
class OracleRow:
    p: int
    n: int
    b: int
    order: tuple
    exact: float
    estimate: float
    se: float
    z: float

    @property
    def ok(self) -> bool:
        return abs(self.z) <= Z_THRESHOLD


@dataclass
class OracleReport:
    experiment: str
    config_echo: dict
    rows: list[OracleRow]
    runtime: float

    @property
    def all_pass(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def max_abs_z(self) -> float:
        return max((abs(r.z) for r in self.rows), default=0.0)

    def summary_rows(self) -> list[tuple]:
        out = []
        for r in self.rows:
            k = r.order[0]
            ell = r.order[1] if len(r.order) > 1 else ""
            out.append(
                ("oracle", r.p, r.n, r.b, k, ell, r.estimate, r.exact, r.se,
                 r.z, "pass" if r.ok else "fail")
            )
        return out


def _oracle_chunk(args):
    model, p, n, b, powers, master, size_idx, rep_lo, rep_hi = args
    prefix = derive_seed(master, EXPERIMENT_ORACLE, size_idx)
    rep_seeds = child_seeds(prefix, rep_hi - rep_lo, start=rep_lo)
    row_index = np.arange(1, n + 1, dtype=np.uint64) * np.uint64(GOLDEN)
    row_seeds = mix64(rep_seeds[:, None] ^ row_index[None, :]).reshape(-1)
    window = model.kernel.diameter + p
    w = sample_driver_rows(model.driver, row_seeds, window)
    count = rep_hi - rep_lo
    x = convolve_rows(model.kernel, w, p).reshape(count, n, p) / math.sqrt(n)
    idx = np.arange(p)
    mask = (np.abs(idx[:, None] - idx[None, :]) <= b).astype(np.float64)
    gram = np.einsum("rni,rnj->rij", x, x) * mask
    out = {}
    for k in powers:
        if k == 1:
            out[k] = np.einsum("rii->r", gram)
        elif k == 2:
            out[k] = np.einsum("rij,rij->r", gram, gram)
        elif k == 3:
            out[k] = np.einsum("rij,rjk,rki->r", gram, gram, gram)
        else:
            power = gram
            for _ in range(k - 1):
                power = np.einsum("rij,rjk->rik", power, gram)
            out[k] = np.einsum("rii->r", power)
    return out


def _empirical_order(stats: dict, order: tuple, m: int) -> tuple[float, float]:
    """Full-sample estimate and its batched standard error for one order."""
    slices = _batch_slices(m)
    if len(order) == 1:
        vals = stats[order[0]]
        est = float(np.mean(vals))
        batches = [float(np.mean(vals[sl])) for sl in slices]
    else:
        va, vb = stats[order[0]], stats[order[1]]

        def cov(sl):
            a, b_ = va[sl], vb[sl]
            mm = a.size
            return float(np.sum((a - a.mean()) * (b_ - b_.mean())) / (mm - 1))

        est = cov(slice(0, m))
        batches = [cov(sl) for sl in slices]
    return est, batched_se(batches)


def run_oracle_check(config: ExperimentConfig, *, chunk_size: int = 50_000) -> OracleReport:
    config.validate(min_bandwidth=0)
    t0 = time.perf_counter()
    model = config.model
    powers = sorted({s for order in config.oracle_orders for s in order})
    rows: list[OracleRow] = []
    for size_idx, (p, n, b) in enumerate(config.schedule):
        exacts = {
            order: exact_trace_cumulant(model, order, p, n, b)
            for order in config.oracle_orders
        }
        m = config.replicas
        bounds = list(range(0, m, chunk_size)) + [m]
        args = [
            (model, p, n, b, powers, config.seed, size_idx, lo, hi)
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        chunks = _map_ordered(_oracle_chunk, args, config.workers)
        stats = {k: np.concatenate([c[k] for c in chunks]) for k in powers}
        for order in config.oracle_orders:
            est, se = _empirical_order(stats, order, m)
            z = _z_score(est, exacts[order], se)
            rows.append(
                OracleRow(p=p, n=n, b=b, order=order, exact=exacts[order],
                          estimate=est, se=se, z=z)
            )
    return OracleReport(
        experiment="oracle",
        config_echo=config.to_dict(),
        rows=rows,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# report emission


def _format_cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def summary_csv_text(report) -> str:
    header = "experiment,p,n,b,k,l,sample_value,target_value,se,z,pass"
    lines = [header]
    for row in report.summary_rows():
        lines.append(",".join(_format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def histograms_tsv_text(empirical: Histogram, reference: Histogram) -> str:
    lines = ["bin_left\tbin_right\tempirical_mass\treference_mass"]
    for i in range(empirical.masses.size):
        lines.append(
            f"{empirical.edges[i]!r}\t{empirical.edges[i + 1]!r}\t"
            f"{empirical.masses[i]!r}\t{reference.masses[i]!r}"
        )
    return "\n".join(lines) + "\n"


def spectrum_svg_text(empirical: Histogram, reference: Histogram) -> str:
    """Self-contained overlay of the two histograms as SVG bars."""
    width, height = 640, 400
    ml, mr, mt, mb = 55, 15, 15, 45
    plot_w, plot_h = width - ml - mr, height - mt - mb
    lo, hi = float(empirical.edges[0]), float(empirical.edges[-1])
    span = hi - lo if hi > lo else 1.0
    peak = max(float(np.max(empirical.masses)), float(np.max(reference.masses)), 1e-12)

    def x_of(v):
        return ml + (v - lo) / span * plot_w

    def bar(i, masses, color, opacity):
        x0 = x_of(float(empirical.edges[i]))
        x1 = x_of(float(empirical.edges[i + 1]))
        h = float(masses[i]) / peak * plot_h
        y = mt + plot_h - h
        return (
            f'<rect x="{x0:.2f}" y="{y:.2f}" width="{x1 - x0:.2f}" '
            f'height="{h:.2f}" fill="{color}" fill-opacity="{opacity}"/>'
        )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for i in range(empirical.masses.size):
        if reference.masses[i] > 0:
            parts.append(bar(i, reference.masses, "#e08214", "0.55"))
    for i in range(empirical.masses.size):
        if empirical.masses[i] > 0:
            parts.append(bar(i, empirical.masses, "#2c7fb8", "0.55"))
    axis_y = mt + plot_h
    parts.append(
        f'<line x1="{ml}" y1="{axis_y}" x2="{ml + plot_w}" y2="{axis_y}" '
        'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{axis_y}" '
        'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{ml}" y="{axis_y + 18}" font-size="12" text-anchor="middle">{lo:.4g}</text>'
    )
    parts.append(
        f'<text x="{ml + plot_w}" y="{axis_y + 18}" font-size="12" '
        f'text-anchor="middle">{hi:.4g}</text>'
    )
    parts.append(
        f'<text x="{ml - 6}" y="{mt + 10}" font-size="12" text-anchor="end">{peak:.3g}</text>'
    )
    parts.append(
        f'<text x="{ml + 10}" y="{mt + 14}" font-size="12" fill="#2c7fb8">empirical</text>'
    )
    parts.append(
        f'<text x="{ml + 10}" y="{mt + 30}" font-size="12" fill="#e08214">reference</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def manifest_text(report, config_json: str) -> str:
    lines = [
        f"bandspectra {__version__}",
        f"experiment: {report.experiment}",
        f"seed: {report.config_echo['seed']}",
        "config:",
        config_json,
    ]
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"failed writing report file {path}: {exc}") from exc


def emit_reports(report, directory) -> list[Path]:
    """Write summary.csv, manifest.txt and, when the report carries spectra,
    histograms.tsv and spectrum.svg. Returns the paths written."""
    import json

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    summary = directory / "summary.csv"
    _write(summary, summary_csv_text(report))
    written.append(summary)
    config_json = json.dumps(report.config_echo, indent=2, sort_keys=True)
    manifest = directory / "manifest.txt"
    _write(manifest, manifest_text(report, config_json))
    written.append(manifest)
    final_hist = None
    if isinstance(report, LlnReport):
        for s in report.sizes:
            if s.empirical_hist is not None:
                final_hist = (s.empirical_hist, s.reference_hist)
    if final_hist is not None:
        emp, ref = final_hist
        hist_path = directory / "histograms.tsv"
        _write(hist_path, histograms_tsv_text(emp, ref))
        written.append(hist_path)
        svg_path = directory / "spectrum.svg"
        _write(svg_path, spectrum_svg_text(emp, ref))
        written.append(svg_path)
    return written


def emit_limit_table(config: ExperimentConfig, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    table = build_limit_table(config.model, max(config.k_list))
    path = directory / "limit_table.csv"
    _write(path, "kind,k,l,i,j,value\n" + "\n".join(table.to_csv_rows()) + "\n")
    return path
