"""Stationary linear processes driven by i.i.d. innovations.

A model is a finitely supported kernel h convolved against an i.i.d. driver
W: the process value at index j is sum_l h(j + l) W_l. Finite support makes
every second- and fourth-order quantity an exact finite sum, with no
truncation tolerance anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ConfigurationError, DomainError

DEFAULT_MAX_ORDER = 10

# even cumulants of a +-1 sign variable: (2n)! times the t^{2n} coefficient
# of log cosh t
_SIGN_CUMULANTS = {2: 1.0, 4: -2.0, 6: 16.0, 8: -272.0, 10: 7936.0}

# Bernoulli numbers B_2..B_10 for the uniform family
_BERNOULLI = {2: 1.0 / 6, 4: -1.0 / 30, 6: 1.0 / 42, 8: -1.0 / 30, 10: 5.0 / 66}


@dataclass(frozen=True)
class DriverSpec:
    """An i.i.d. innovation law, described by its cumulant sequence.

    cumulants[r-1] holds the order-r cumulant; the first cumulant is always
    zero (drivers are centered) and the second is positive. Named families
    also know how to sample themselves; custom drivers are cumulants-only.
    """

    family: str
    cumulants: tuple[float, ...]
    scale: float = 1.0

    def __post_init__(self):
        if len(self.cumulants) < 2:
            raise DomainError("drivers need cumulants at least to order 2")
        if self.cumulants[0] != 0.0:
            raise DomainError("drivers must be centered (first cumulant zero)")
        if self.cumulants[1] <= 0.0:
            raise DomainError("driver variance must be positive")

    @property
    def max_order(self) -> int:
        return len(self.cumulants)

    def cumulant(self, order: int) -> float:
        if order < 1:
            raise DomainError("cumulant order must be positive")
        if order > self.max_order:
            raise ConfigurationError(
                f"driver '{self.family}' has cumulants only to order "
                f"{self.max_order}, order {order} requested"
            )
        return self.cumulants[order - 1]

    @staticmethod
    def gaussian(variance: float = 1.0, max_order: int = DEFAULT_MAX_ORDER) -> "DriverSpec":
        if variance <= 0:
            raise DomainError("variance must be positive")
        cms = [0.0] * max_order
        cms[1] = variance
        return DriverSpec("gaussian", tuple(cms), scale=math.sqrt(variance))

    @staticmethod
    def rademacher(max_order: int = DEFAULT_MAX_ORDER) -> "DriverSpec":
        cms = [0.0] * max_order
        for r, v in _SIGN_CUMULANTS.items():
            if r <= max_order:
                cms[r - 1] = v
        return DriverSpec("rademacher", tuple(cms))

    @staticmethod
    def uniform(half_width: float = math.sqrt(3.0), max_order: int = DEFAULT_MAX_ORDER) -> "DriverSpec":
        if half_width <= 0:
            raise DomainError("half_width must be positive")
        cms = [0.0] * max_order
        for r, b in _BERNOULLI.items():
            if r <= max_order:
                cms[r - 1] = b * (2.0 * half_width) ** r / r
        return DriverSpec("uniform", tuple(cms), scale=half_width)

    @staticmethod
    def centered_exponential(max_order: int = DEFAULT_MAX_ORDER) -> "DriverSpec":
        cms = [0.0] + [float(math.factorial(r - 1)) for r in range(2, max_order + 1)]
        return DriverSpec("centered-exponential", tuple(cms))

    @staticmethod
    def custom(cumulants) -> "DriverSpec":
        return DriverSpec("custom", tuple(float(c) for c in cumulants))


def sample_driver_rows(driver: DriverSpec, seeds: np.ndarray, count: int) -> np.ndarray:
    """Draw (len(seeds), count) i.i.d. driver values, one stream per row.

    gaussian uses the polar method, rademacher the top bit of each word,
    uniform and centered-exponential the inverse CDF of a unit uniform.
    """
    if driver.family == "gaussian":
        return driver.scale * rng.gaussian_rows(seeds, count)
    if driver.family == "rademacher":
        return rng.sign_rows(seeds, count)
    if driver.family == "uniform":
        u = rng.uniform_rows(seeds, count)
        return driver.scale * (2.0 * u - 1.0)
    if driver.family == "centered-exponential":
        u = rng.uniform_rows(seeds, count)
        return -np.log1p(-u) - 1.0
    raise ConfigurationError(
        f"driver family '{driver.family}' defines cumulants only and cannot be sampled"
    )


@dataclass(frozen=True)
class Kernel:
    """Finitely supported convolution kernel, offset -> coefficient."""

    offsets: tuple[int, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        if not self.offsets:
            raise DomainError("kernel support must be non-empty")
        if len(self.offsets) != len(self.coefficients):
            raise DomainError("offsets and coefficients must align")
        if len(set(self.offsets)) != len(self.offsets):
            raise DomainError("duplicate kernel offsets")
        if all(c == 0.0 for c in self.coefficients):
            raise DomainError("kernel needs at least one nonzero coefficient")
        if list(self.offsets) != sorted(self.offsets):
            raise DomainError("kernel offsets must be sorted")

    @staticmethod
    def from_pairs(pairs) -> "Kernel":
        items = sorted((int(o), float(c)) for o, c in pairs)
        return Kernel(tuple(o for o, _ in items), tuple(c for _, c in items))

    @staticmethod
    def moving_average(coeffs) -> "Kernel":
        """Kernel with coefficients at offsets 0, 1, 2, ..."""
        return Kernel.from_pairs(enumerate(coeffs))

    @staticmethod
    def impulse() -> "Kernel":
        return Kernel((0,), (1.0,))

    @property
    def support(self) -> tuple[int, ...]:
        return self.offsets

    @property
    def diameter(self) -> int:
        return self.offsets[-1] - self.offsets[0]

    def coefficient(self, offset: int) -> float:
        try:
            return self.coefficients[self.offsets.index(offset)]
        except ValueError:
            return 0.0

    def as_array(self) -> tuple[np.ndarray, int]:
        """Dense coefficient array plus the offset of its first entry."""
        lo = self.offsets[0]
        arr = np.zeros(self.diameter + 1)
        for o, c in zip(self.offsets, self.coefficients):
            arr[o - lo] = c
        return arr, lo


@dataclass(frozen=True)
class ProcessModel:
    kernel: Kernel
    driver: DriverSpec


def autocovariance(model: ProcessModel, j: int) -> float:
    """Covariance between process values j apart: kappa_2 sum_l h(l) h(j+l)."""
    h, lo = model.kernel.as_array()
    j = int(j)
    if abs(j) > model.kernel.diameter:
        return 0.0
    if j >= 0:
        overlap = float(np.dot(h[: h.size - j], h[j:]))
    else:
        overlap = float(np.dot(h[-j:], h[: h.size + j]))
    return model.driver.cumulant(2) * overlap


def autocovariance_sequence(model: ProcessModel) -> tuple[np.ndarray, int]:
    """All autocovariances as a dense array over lags [-D, D], plus -D."""
    d = model.kernel.diameter
    vals = np.array([autocovariance(model, j) for j in range(-d, d + 1)])
    return vals, -d


def iterated_autocovariance(model: ProcessModel, m: int, i: int) -> float:
    """m-fold self-convolution of the autocovariance sequence at lag i.

    m = 0 is the unit impulse at lag zero.
    """
    if m < 0:
        raise DomainError("m must be non-negative")
    if m == 0:
        return 1.0 if i == 0 else 0.0
    seq, lo = iterated_autocovariance_sequence(model, m)
    idx = i - lo
    if idx < 0 or idx >= seq.size:
        return 0.0
    return float(seq[idx])


def iterated_autocovariance_sequence(model: ProcessModel, m: int) -> tuple[np.ndarray, int]:
    """Dense array of the m-fold convolution over its full support, plus the
    lag of its first entry."""
    if m < 1:
        raise DomainError("m must be at least 1 here")
    base, lo = autocovariance_sequence(model)
    seq, off = base, lo
    for _ in range(m - 1):
        seq = np.convolve(seq, base)
        off += lo
    return seq, off


def q_coefficient(model: ProcessModel, i: int, j: int) -> float:
    """Summed fourth-order cumulant array:

        Q_ij = kappa_4 * sum_{l,m} h(i+m) h(m) h(j+l+m) h(l+m)
    """
    kappa4 = model.driver.cumulant(4)
    if kappa4 == 0.0:
        return 0.0
    h, lo = model.kernel.as_array()
    hi = lo + h.size - 1
    total = 0.0
    for m in range(lo, hi + 1):
        hm = h[m - lo]
        if hm == 0.0:
            continue
        him = model.kernel.coefficient(i + m)
        if him == 0.0:
            continue
        # inner sum over x = l + m with h(x) h(j + x) both in support
        for x in range(lo, hi + 1):
            hx = h[x - lo]
            if hx == 0.0:
                continue
            total += him * hm * model.kernel.coefficient(j + x) * hx
    return kappa4 * total


def q_table(model: ProcessModel) -> tuple[np.ndarray, int]:
    """Dense (i, j) table of the fourth-order array over its support box,
    plus the offset of index 0."""
    d = model.kernel.diameter
    table = np.zeros((2 * d + 1, 2 * d + 1))
    for a, i in enumerate(range(-d, d + 1)):
        for b, j in enumerate(range(-d, d + 1)):
            table[a, b] = q_coefficient(model, i, j)
    return table, d


def nu_moment(model: ProcessModel, k: int) -> float:
    """k-th moment of the spectral-density value distribution."""
    if k < 1:
        raise DomainError("k must be positive")
    return iterated_autocovariance(model, k, 0)


def spectral_density(model: ProcessModel, theta: float) -> float:
    """Fourier series of the autocovariances at frequency theta in [0, 1]."""
    if theta < 0.0 or theta > 1.0:
        raise DomainError(f"theta={theta} outside [0, 1]")
    return float(spectral_density_values(model, np.array([theta]))[0])


def spectral_density_values(model: ProcessModel, thetas: np.ndarray) -> np.ndarray:
    out = np.full(thetas.shape, autocovariance(model, 0))
    for j in range(1, model.kernel.diameter + 1):
        r = autocovariance(model, j)
        if r != 0.0:
            out += 2.0 * r * np.cos(2.0 * np.pi * j * thetas)
    return out


def convolution_matrix(kernel: Kernel, p: int) -> tuple[np.ndarray, int, int]:
    """Matrix H with Z_row = W_row @ H for W drawn on the exact index window.

    Returns (H, window_lo, window_len): the driver must be drawn at indices
    window_lo .. window_lo + window_len - 1.
    """
    lo_off = kernel.offsets[0]
    window_lo = lo_off - p
    window_len = kernel.diameter + p
    h = np.zeros((window_len, p))
    cols = np.arange(1, p + 1)
    for o, c in zip(kernel.offsets, kernel.coefficients):
        h[o - lo_off + p - cols, cols - 1] = c
    return h, window_lo, window_len


def convolve_rows(kernel: Kernel, w: np.ndarray, p: int) -> np.ndarray:
    """Row-wise exact convolution of the driver window against the kernel.

    w has shape (rows, diameter + p), drawn on the window that
    convolution_matrix describes; equals w @ H up to rounding but costs one
    shifted slice-add per support point.
    """
    diam = kernel.diameter
    lo = kernel.offsets[0]
    w_rev = w[:, ::-1]
    out = np.zeros((w.shape[0], p))
    for o, c in zip(kernel.offsets, kernel.coefficients):
        if c == 0.0:
            continue
        s = diam - (o - lo)
        out += c * w_rev[:, s : s + p]
    return out


def simulate_data_matrix(model: ProcessModel, n: int, p: int, stream) -> np.ndarray:
    """n rows, each an independent length-p stretch of the process, all
    scaled by 1/sqrt(n).

    Row i draws its innovations from the child stream (i,) of `stream`, so
    output is identical however rows are scheduled.
    """
    if n < 1 or p < 1:
        raise DomainError("n and p must be positive")
    window_len = model.kernel.diameter + p
    seeds = stream.child_seed_block(n)
    w = sample_driver_rows(model.driver, seeds, window_len)
    return convolve_rows(model.kernel, w, p) / math.sqrt(n)
