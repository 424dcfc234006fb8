"""Closed-form limit values for the banded Gram spectra.

Everything here is an exact finite computation on the model: the moment
targets of the limiting spectral law, the limiting covariance of scaled
trace fluctuations, and the reference histogram of the spectral-density
value distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .histogram import Histogram, build_histogram
from .process import (
    ProcessModel,
    iterated_autocovariance,
    iterated_autocovariance_sequence,
    nu_moment,
    q_table,
    spectral_density_values,
)


def lln_limit(model: ProcessModel, k: int) -> float:
    """Limit of the mean normalized trace of the k-th power; equals the k-th
    moment of the spectral-density value distribution."""
    return nu_moment(model, k)


def _r_vector(model: ProcessModel, m: int, radius: int) -> np.ndarray:
    """m-fold autocovariance convolution sampled on lags [-radius, radius]."""
    out = np.zeros(2 * radius + 1)
    if m == 0:
        out[radius] = 1.0
        return out
    seq, lo = iterated_autocovariance_sequence(model, m)
    for idx in range(seq.size):
        lag = lo + idx
        if -radius <= lag <= radius:
            out[radius + lag] = seq[idx]
    return out


def clt_covariance(model: ProcessModel, k: int, ell: int) -> float:
    """Limiting covariance of the scaled trace fluctuations at powers k, ell:

        k * ell * (2 R_0^(k+ell) + sum_{i,j} R_i^(k-1) Q_ij R_j^(ell-1))
    """
    if k < 1 or ell < 1:
        raise DomainError("powers must be positive")
    qmat, radius = q_table(model)
    ra = _r_vector(model, k - 1, radius)
    rb = _r_vector(model, ell - 1, radius)
    correction = float(ra @ qmat @ rb)
    return k * ell * (2.0 * iterated_autocovariance(model, k + ell, 0) + correction)


def clt_covariance_matrix(model: ProcessModel, k_list) -> np.ndarray:
    ks = list(k_list)
    out = np.empty((len(ks), len(ks)))
    for a, k in enumerate(ks):
        for b, ell in enumerate(ks):
            if b < a:
                out[a, b] = out[b, a]
            else:
                out[a, b] = clt_covariance(model, k, ell)
    return out


def nu_reference_histogram(model: ProcessModel, edges, grid: int) -> Histogram:
    """Histogram of spectral-density values on a uniform midpoint grid of
    [0, 1]; converges to the limiting spectral law as the grid refines."""
    if grid < 1000:
        raise DomainError("grid must be at least 1000")
    thetas = (np.arange(grid) + 0.5) / grid
    values = spectral_density_values(model, thetas)
    return build_histogram(values, edges, 1.0 / grid)


def spectral_density_range(model: ProcessModel, grid: int = 100_000) -> tuple[float, float]:
    thetas = (np.arange(grid) + 0.5) / grid
    values = spectral_density_values(model, thetas)
    return float(np.min(values)), float(np.max(values))


@dataclass(frozen=True)
class LimitTable:
    """Precomputed limit quantities for one model up to trace power K."""

    max_order: int
    r_tables: dict  # m -> {lag: value}, m = 1..2K
    q_values: dict  # (i, j) -> value over the support box
    nu_moments: dict  # k -> value, k = 1..K
    clt_matrix: np.ndarray  # (K, K), entry (a, b) for powers a+1, b+1

    def to_csv_rows(self) -> list[str]:
        """Rows of 'kind,k,l,i,j,value' covering every stored quantity."""
        rows = []
        for k in sorted(self.nu_moments):
            rows.append(f"nu_moment,{k},,,,{self.nu_moments[k]!r}")
        for m in sorted(self.r_tables):
            for lag in sorted(self.r_tables[m]):
                rows.append(f"r_convolution,{m},,{lag},,{self.r_tables[m][lag]!r}")
        for (i, j) in sorted(self.q_values):
            rows.append(f"q,,,{i},{j},{self.q_values[(i, j)]!r}")
        for a in range(self.max_order):
            for b in range(self.max_order):
                rows.append(f"clt_covariance,{a + 1},{b + 1},,,{self.clt_matrix[a, b]!r}")
        return rows


def build_limit_table(model: ProcessModel, max_order: int) -> LimitTable:
    if max_order < 1:
        raise DomainError("max_order must be positive")
    r_tables = {}
    for m in range(1, 2 * max_order + 1):
        seq, lo = iterated_autocovariance_sequence(model, m)
        r_tables[m] = {lo + i: float(v) for i, v in enumerate(seq) if v != 0.0}
    qmat, radius = q_table(model)
    q_values = {}
    for a in range(qmat.shape[0]):
        for b in range(qmat.shape[1]):
            if qmat[a, b] != 0.0:
                q_values[(a - radius, b - radius)] = float(qmat[a, b])
    nu = {k: nu_moment(model, k) for k in range(1, max_order + 1)}
    return LimitTable(
        max_order=max_order,
        r_tables=r_tables,
        q_values=q_values,
        nu_moments=nu,
        clt_matrix=clt_covariance_matrix(model, range(1, max_order + 1)),
    )
