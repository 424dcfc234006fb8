"""Fixed-bin histograms with explicit out-of-range mass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    masses: np.ndarray
    underflow: float = 0.0
    overflow: float = 0.0

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses) + self.underflow + self.overflow)

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def moment(self, k: int) -> float:
        """k-th moment of the binned mass (out-of-range mass ignored)."""
        return float(np.dot(self.masses, self.midpoints() ** k))

    @property
    def mean(self) -> float:
        return self.moment(1)


def check_edges(edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2:
        raise DomainError("need at least two bin edges")
    if np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be strictly increasing")
    return edges


def build_histogram(values, edges, mass_each: float) -> Histogram:
    """Histogram of values with a fixed mass per value; values outside the
    edge range land in the underflow/overflow counters."""
    edges = check_edges(edges)
    values = np.asarray(values, dtype=np.float64)
    counts, _ = np.histogram(values, bins=edges)
    under = int(np.sum(values < edges[0]))
    over = int(np.sum(values >= edges[-1]))
    # np.histogram closes the last bin on the right; fold those back out
    on_top_edge = int(np.sum(values == edges[-1]))
    if on_top_edge:
        counts = counts.copy()
        counts[-1] -= on_top_edge
    return Histogram(
        edges=edges,
        masses=counts * mass_each,
        underflow=under * mass_each,
        overflow=over * mass_each,
    )


def uniform_edges(lo: float, hi: float, bins: int, pad_fraction: float = 0.05) -> np.ndarray:
    """Equal-width edges spanning [lo, hi] padded on both sides."""
    if bins < 1:
        raise DomainError("need at least one bin")
    span = hi - lo
    pad = pad_fraction * span if span > 0 else max(abs(lo), 1.0) * pad_fraction + 1e-9
    return np.linspace(lo - pad, hi + pad, bins + 1)


def mean_histogram(histograms) -> Histogram:
    """Pointwise average of histograms sharing the same edges."""
    hs = list(histograms)
    edges = hs[0].edges
    for h in hs[1:]:
        if h.edges.shape != edges.shape or np.any(h.edges != edges):
            raise DomainError("histograms must share edges")
    m = np.mean([h.masses for h in hs], axis=0)
    return Histogram(
        edges=edges,
        masses=m,
        underflow=float(np.mean([h.underflow for h in hs])),
        overflow=float(np.mean([h.overflow for h in hs])),
    )


def l1_distance(a: Histogram, b: Histogram) -> float:
    """Total absolute difference of per-bin masses, out-of-range included."""
    if a.edges.shape != b.edges.shape or np.any(a.edges != b.edges):
        raise DomainError("histograms must share edges")
    return float(
        np.sum(np.abs(a.masses - b.masses))
        + abs(a.underflow - b.underflow)
        + abs(a.overflow - b.overflow)
    )
