"""Deterministic splittable random streams.

Substreams are addressed by a (master seed, path) pair where the path is a
tuple of non-negative integers, e.g. (experiment, size_index, replica, row).
The derivation rule is published so runs are reproducible across machines
and independent of scheduling:

    derive(s, c)  = mix64(s XOR ((c + 1) * GOLDEN mod 2^64))
    seed(master, path) = fold(derive, mix64(master), path)
    word_j(seed)  = mix64((seed + (j + 1) * GOLDEN) mod 2^64)      j = 0, 1, ...

mix64 is the 64-bit finalizer (xorshift-multiply avalanche, Stafford mix 13)
and GOLDEN is the 64-bit golden-ratio increment. Streams with distinct
(master, path) are treated as independent. uniforms map word -> [0, 1) via
the top 53 bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U = np.uint64


def mix64_int(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U(30))) * _U(_M1)
    z = (z ^ (z >> _U(27))) * _U(_M2)
    return z ^ (z >> _U(31))


def derive_seed(master: int, *path: int) -> int:
    s = mix64_int(master)
    for c in path:
        if c < 0:
            raise ValueError("stream path components must be non-negative")
        s = mix64_int(s ^ (((c + 1) * GOLDEN) & MASK64))
    return s


def child_seeds(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Seeds of children start..start+count-1 of the stream with the given seed."""
    c = np.arange(start + 1, start + count + 1, dtype=np.uint64) * _U(GOLDEN)
    return mix64(_U(seed) ^ c)


def words(seed: int, start: int, count: int) -> np.ndarray:
    """Raw 64-bit words at positions start..start+count-1 of one stream."""
    j = np.arange(start + 1, start + count + 1, dtype=np.uint64) * _U(GOLDEN)
    return mix64(_U(seed) + j)


def words_block(seeds: np.ndarray, start: int, count: int) -> np.ndarray:
    """Raw words for many streams at once; row i is stream seeds[i]."""
    j = np.arange(start + 1, start + count + 1, dtype=np.uint64) * _U(GOLDEN)
    return mix64(seeds[:, None] + j[None, :])


def to_unit(w: np.ndarray) -> np.ndarray:
    """Map raw words to floats in [0, 1)."""
    return (w >> _U(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class RandomStream:
    """Immutable handle on one substream: a master seed plus a path.

    Values are drawn by the family samplers (see process module), always
    from position 0 of a stream, so identical (master, path) gives identical
    output no matter where or when it is sampled.
    """

    master: int
    path: tuple[int, ...] = ()

    def child(self, *components: int) -> "RandomStream":
        return RandomStream(self.master, self.path + components)

    @property
    def seed(self) -> int:
        return derive_seed(self.master, *self.path)

    def child_seed_block(self, count: int) -> np.ndarray:
        """Seeds of children 0..count-1, vectorized."""
        return child_seeds(self.seed, count)

    def words(self, count: int, start: int = 0) -> np.ndarray:
        return words(self.seed, start, count)

    def uniforms(self, count: int, start: int = 0) -> np.ndarray:
        return to_unit(self.words(count, start))


@numba.njit(cache=True)
def _gaussian_rows_kernel(seeds, count, out):  # pragma: no cover - jitted
    golden = np.uint64(0x9E3779B97F4A7C15)
    m1 = np.uint64(0xBF58476D1CE4E5B9)
    m2 = np.uint64(0x94D049BB133111EB)
    two53 = 1.1102230246251565e-16  # 2**-53
    for r in range(seeds.size):
        s = seeds[r]
        pos = np.uint64(0)
        filled = 0
        while filled < count:
            pos += np.uint64(1)
            z = s + pos * golden
            z = (z ^ (z >> np.uint64(30))) * m1
            z = (z ^ (z >> np.uint64(27))) * m2
            z = z ^ (z >> np.uint64(31))
            u = np.float64(z >> np.uint64(11)) * two53
            pos += np.uint64(1)
            z = s + pos * golden
            z = (z ^ (z >> np.uint64(30))) * m1
            z = (z ^ (z >> np.uint64(27))) * m2
            z = z ^ (z >> np.uint64(31))
            v = np.float64(z >> np.uint64(11)) * two53
            x = 2.0 * u - 1.0
            y = 2.0 * v - 1.0
            ss = x * x + y * y
            if ss <= 0.0 or ss >= 1.0:
                continue
            f = np.sqrt(-2.0 * np.log(ss) / ss)
            out[r, filled] = x * f
            filled += 1
            if filled < count:
                out[r, filled] = y * f
                filled += 1


def gaussian_rows(seeds: np.ndarray, count: int) -> np.ndarray:
    """Standard normals, shape (len(seeds), count), one stream per row.

    Polar rejection sampling: words are read in pairs, mapped to the square
    (-1, 1)^2, and a pair (x, y) with 0 < s = x^2 + y^2 < 1 yields the two
    values x*sqrt(-2 ln s / s) and y*sqrt(-2 ln s / s). Row i's output is
    the first `count` accepted values of stream seeds[i], a pure function of
    the stream contents.
    """
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    out = np.empty((seeds.size, count), dtype=np.float64)
    if count and seeds.size:
        _gaussian_rows_kernel(seeds, count, out)
    return out


def uniform_rows(seeds: np.ndarray, count: int) -> np.ndarray:
    """Uniform [0, 1) values, shape (len(seeds), count)."""
    return to_unit(words_block(seeds, 0, count))


def sign_rows(seeds: np.ndarray, count: int) -> np.ndarray:
    """Random signs +-1 from the top bit of each word."""
    w = words_block(seeds, 0, count)
    return np.where((w >> _U(63)) == 0, 1.0, -1.0)
