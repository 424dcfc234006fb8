"""Symmetric banded matrices: the masked Gram estimator and its spectra.

Storage is the b+1 central diagonals (main first); entries farther than b
from the diagonal are structurally zero. Trace powers stay in diagonal
form, with the bandwidth growing by b per multiplication, and fall back to
dense arithmetic only when the product band would cover the whole matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DomainError, NumericalError
from .histogram import Histogram, build_histogram

JACOBI_SWEEP_CAP = 50


@dataclass(frozen=True)
class BandedMatrix:
    """Symmetric p x p matrix with entries zero beyond distance b from the
    diagonal. diagonals[d] holds entries (i, i+d), length p - d."""

    dimension: int
    bandwidth: int
    diagonals: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.bandwidth < 0 or self.bandwidth > max(self.dimension - 1, 0):
            raise DomainError("bandwidth must lie in [0, p-1] after clamping")
        if len(self.diagonals) != self.bandwidth + 1:
            raise DomainError("need one array per stored diagonal")
        for d, diag in enumerate(self.diagonals):
            if diag.shape != (self.dimension - d,):
                raise DomainError(f"diagonal {d} has wrong length")

    def entry(self, i: int, j: int) -> float:
        d = abs(i - j)
        if d > self.bandwidth:
            return 0.0
        return float(self.diagonals[d][min(i, j)])

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.dimension, self.dimension))
        idx = np.arange(self.dimension)
        a[idx, idx] = self.diagonals[0]
        for d in range(1, self.bandwidth + 1):
            rows = idx[: self.dimension - d]
            a[rows, rows + d] = self.diagonals[d]
            a[rows + d, rows] = self.diagonals[d]
        return a

    @staticmethod
    def from_dense(a: np.ndarray, bandwidth: int) -> "BandedMatrix":
        a = np.asarray(a, dtype=np.float64)
        p = a.shape[0]
        if a.shape != (p, p):
            raise DomainError("matrix must be square")
        if not np.array_equal(a, a.T):
            raise DomainError("matrix must be symmetric")
        b = min(bandwidth, p - 1)
        diags = tuple(np.diagonal(a, d).copy() for d in range(b + 1))
        return BandedMatrix(p, b, diags)

    @property
    def trace(self) -> float:
        return math.fsum(self.diagonals[0])

    @property
    def frobenius_norm(self) -> float:
        total = float(np.dot(self.diagonals[0], self.diagonals[0]))
        for d in range(1, self.bandwidth + 1):
            total += 2.0 * float(np.dot(self.diagonals[d], self.diagonals[d]))
        return math.sqrt(total)

    def frobenius_sq(self) -> float:
        n = self.frobenius_norm
        return n * n


def banded_covariance(x: np.ndarray, bandwidth: int) -> BandedMatrix:
    """Masked Gram matrix of the data: entry (i, j) is column_i . column_j
    when |i - j| <= b, else zero. Only the stored diagonals are computed."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise DomainError("data matrix must be non-empty and 2-d")
    if bandwidth < 0:
        raise DomainError("bandwidth must be non-negative")
    p = x.shape[1]
    b = min(bandwidth, p - 1)
    diags = tuple(
        np.einsum("ki,ki->i", x[:, : p - d], x[:, d:]) for d in range(b + 1)
    )
    return BandedMatrix(p, b, diags)


def centered_banded_covariance(x: np.ndarray, bandwidth: int) -> tuple[BandedMatrix, BandedMatrix]:
    """Masked Gram matrix of the column-centered data, plus the perturbation
    it removes.

    The perturbation has entries n * mean_i * mean_j on the band, where
    mean_j is the j-th column mean.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DomainError("need at least two rows to center")
    n, p = x.shape
    col_means = np.mean(x, axis=0)
    centered = banded_covariance(x - col_means, bandwidth)
    b = centered.bandwidth
    delta = tuple(
        n * col_means[: p - d] * col_means[d:] for d in range(b + 1)
    )
    return centered, BandedMatrix(p, b, delta)


def _signed_rep(m: BandedMatrix) -> tuple[np.ndarray, int]:
    """Signed-diagonal layout: row w + s holds entries (i, i + s), padded
    with zeros where undefined."""
    p, w = m.dimension, m.bandwidth
    rep = np.zeros((2 * w + 1, p))
    rep[w, :] = m.diagonals[0]
    for d in range(1, w + 1):
        rep[w + d, : p - d] = m.diagonals[d]
        rep[w - d, d:] = m.diagonals[d]
    return rep, w


def _signed_multiply(a: np.ndarray, wa: int, b: np.ndarray, wb: int, p: int) -> tuple[np.ndarray, int]:
    wc = min(wa + wb, p - 1)
    c = np.zeros((2 * wc + 1, p))
    for s in range(-wa, wa + 1):
        row_a = a[wa + s]
        for t in range(-wb, wb + 1):
            u = s + t
            if abs(u) > wc:
                continue
            # C[i, i+u] += A[i, i+s] * B[i+s, i+u]; read row t of B shifted by s
            row_b = b[wb + t]
            if s >= 0:
                c[wc + u, : p - s] += row_a[: p - s] * row_b[s:]
            else:
                c[wc + u, -s:] += row_a[-s:] * row_b[: p + s]
    return c, wc


def trace_power(m: BandedMatrix, k: int) -> float:
    """Trace of the k-th power, by band-aware multiplication while the
    product bandwidth stays below the dimension, dense otherwise."""
    if k < 1:
        raise DomainError("k must be positive")
    if k == 1:
        return m.trace
    p, b = m.dimension, m.bandwidth
    if k * b >= p:
        dense = m.to_dense()
        power = np.linalg.matrix_power(dense, k)
        return math.fsum(np.diagonal(power))
    base, wb = _signed_rep(m)
    acc, wa = base, wb
    for _ in range(k - 1):
        acc, wa = _signed_multiply(acc, wa, base, wb, p)
    return math.fsum(acc[wa])


@numba.njit(cache=True)
def _jacobi_sweeps(a, target, max_sweeps):  # pragma: no cover - jitted
    p = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(p - 1):
            for j in range(i + 1, p):
                off += a[i, j] * a[i, j]
        off = np.sqrt(2.0 * off)
        if off <= target:
            return sweep, off
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = a[i, j]
                if aij == 0.0:
                    continue
                tau = (a[j, j] - a[i, i]) / (2.0 * aij)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = 1.0 / (tau - np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for m in range(i):
                    ami = a[m, i]
                    amj = a[m, j]
                    a[m, i] = c * ami - s * amj
                    a[m, j] = s * ami + c * amj
                for m in range(i + 1, j):
                    aim = a[i, m]
                    amj = a[m, j]
                    a[i, m] = c * aim - s * amj
                    a[m, j] = s * aim + c * amj
                for m in range(j + 1, p):
                    aim = a[i, m]
                    ajm = a[j, m]
                    a[i, m] = c * aim - s * ajm
                    a[j, m] = s * aim + c * ajm
                aii = a[i, i]
                ajj = a[j, j]
                a[i, i] = aii - t * aij
                a[j, j] = ajj + t * aij
                a[i, j] = 0.0
    off = 0.0
    for i in range(p - 1):
        for j in range(i + 1, p):
            off += a[i, j] * a[i, j]
    return max_sweeps, np.sqrt(2.0 * off)


def symmetric_eigenvalues(
    m: BandedMatrix, tol: float = 1e-10, *, max_sweeps: int = JACOBI_SWEEP_CAP
) -> np.ndarray:
    """All eigenvalues, ascending, via cyclic two-sided rotations.

    Sweeps run until the off-diagonal Frobenius mass drops below
    tol * ||m||_F. Rotations only touch the upper triangle, which is why
    this is not simply handed to a LAPACK driver: the operation count and
    order are fixed, so results are bit-reproducible run to run.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    fro = m.frobenius_norm
    if fro == 0.0:
        return np.zeros(m.dimension)
    dense = m.to_dense()
    sweeps, residual = _jacobi_sweeps(dense, tol * fro, max_sweeps)
    if residual > tol * fro:
        raise NumericalError(
            f"rotation sweeps did not converge in {max_sweeps} sweeps "
            f"(off-diagonal residual {residual:.3e})",
            residual=residual,
        )
    return np.sort(np.diagonal(dense))


def empirical_spectral_histogram(eigenvalues, edges) -> Histogram:
    """Uniform measure on the eigenvalues, binned."""
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    if eigenvalues.size == 0:
        raise DomainError("need at least one eigenvalue")
    return build_histogram(eigenvalues, edges, 1.0 / eigenvalues.size)


def dump_banded(m: BandedMatrix) -> str:
    """Text form: header 'p b', then the stored diagonals (main first,
    super-diagonals ascending), one line each. Symmetry makes the
    sub-diagonals redundant, so they are not written."""
    lines = [f"{m.dimension} {m.bandwidth}"]
    for diag in m.diagonals:
        lines.append(" ".join(repr(float(v)) for v in diag))
    return "\n".join(lines) + "\n"


def load_banded(text: str) -> BandedMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DomainError("empty banded-matrix dump")
    head = lines[0].split()
    p, b = int(head[0]), int(head[1])
    if len(lines) != b + 2:
        raise DomainError(f"expected {b + 1} diagonal lines, got {len(lines) - 1}")
    diags = []
    for d in range(b + 1):
        vals = np.array([float(v) for v in lines[1 + d].split()])
        if vals.size != p - d:
            raise DomainError(f"diagonal {d} has length {vals.size}, expected {p - d}")
        diags.append(vals)
    return BandedMatrix(p, b, tuple(diags))
