import math

import numpy as np
import pytest

from bandspectra import rng


def reference_gaussians(seed, count):
    # slow but direct restatement of the polar rule, kept independent of the
    # jitted production kernel
    out = []
    pos = 0
    while len(out) < count:
        w = rng.words(seed, pos, 2)
        pos += 2
        u, v = rng.to_unit(w)
        x, y = 2 * u - 1, 2 * v - 1
        s = x * x + y * y
        if 0.0 < s < 1.0:
            f = math.sqrt(-2.0 * math.log(s) / s)
            out.append(x * f)
            if len(out) < count:
                out.append(y * f)
    return np.array(out)


class TestStreams:
    def test_words_reproducible(self):
        a = rng.words(123, 0, 16)
        b = rng.words(123, 0, 16)
        assert np.array_equal(a, b)

    def test_words_offset_consistent(self):
        whole = rng.words(9, 0, 20)
        tail = rng.words(9, 5, 15)
        assert np.array_equal(whole[5:], tail)

    def test_child_seeds_match_derive(self):
        seed = rng.derive_seed(42, 1, 2)
        block = rng.child_seeds(seed, 5)
        for i in range(5):
            assert int(block[i]) == rng.derive_seed(42, 1, 2, i)

    def test_child_seed_start(self):
        seed = 77
        assert np.array_equal(rng.child_seeds(seed, 3, start=4), rng.child_seeds(seed, 7)[4:])

    def test_distinct_paths_distinct_streams(self):
        s1 = rng.RandomStream(5, (0, 1)).words(8)
        s2 = rng.RandomStream(5, (0, 2)).words(8)
        s3 = rng.RandomStream(6, (0, 1)).words(8)
        assert not np.array_equal(s1, s2)
        assert not np.array_equal(s1, s3)

    def test_negative_path_rejected(self):
        with pytest.raises(ValueError):
            rng.derive_seed(1, -2)

    def test_uniforms_in_unit_interval(self):
        u = rng.RandomStream(2024).uniforms(10_000)
        assert np.all(u >= 0.0) and np.all(u < 1.0)
        assert abs(u.mean() - 0.5) < 5 * math.sqrt(1 / 12 / 10_000)


class TestGaussians:
    def test_matches_reference(self):
        seeds = rng.child_seeds(987, 4)
        fast = rng.gaussian_rows(seeds, 33)
        for i in range(4):
            assert np.array_equal(fast[i], reference_gaussians(int(seeds[i]), 33))

    def test_moments(self):
        m = 1_000_000
        g = rng.gaussian_rows(rng.child_seeds(11, 1), m)[0]
        assert abs(g.mean()) < 5 / math.sqrt(m)
        assert abs(g.var() - 1.0) < 5 * math.sqrt(2.0 / m)
        assert abs((g**3).mean()) < 5 * math.sqrt(15.0 / m)

    def test_rows_independent_of_batching(self):
        seeds = rng.child_seeds(55, 6)
        whole = rng.gaussian_rows(seeds, 21)
        parts = np.vstack([rng.gaussian_rows(seeds[i : i + 1], 21) for i in range(6)])
        assert np.array_equal(whole, parts)

    def test_empty(self):
        assert rng.gaussian_rows(rng.child_seeds(1, 0), 3).shape == (0, 3)
        assert rng.gaussian_rows(rng.child_seeds(1, 2), 0).shape == (2, 0)


class TestSigns:
    def test_values_are_signs(self):
        s = rng.sign_rows(rng.child_seeds(3, 2), 1000)
        assert set(np.unique(s)) == {-1.0, 1.0}

    def test_balanced(self):
        s = rng.sign_rows(rng.child_seeds(8, 1), 1_000_000)[0]
        assert abs(s.mean()) < 5 / math.sqrt(1_000_000)
