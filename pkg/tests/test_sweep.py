"""Tests for the randomized sweeps."""

import math

import numpy as np
import pytest

from markov_embed.linalg import eigen_decompose
from markov_embed.sweep import (
    BATTERY_TIMES,
    WIDE_RATE_RANGE,
    error_bound_sweep,
    random_generator,
    random_permutation,
    soundness_sweep,
)


class TestRandomMatrices:
    def test_generator_rates(self):
        rng = np.random.default_rng(7)
        for n in (3, 5, 8):
            G = random_generator(rng, n)
            rates = -np.diag(G.values)
            assert rates.min() >= 0.05 and rates.max() <= 0.5
            off = G.values[~np.eye(n, dtype=bool)]
            assert off.min() > 0

    def test_sparse_wide_generator(self):
        rng = np.random.default_rng(13)
        zeros = 0
        for n in (3, 5, 8):
            for _ in range(10):
                G = random_generator(rng, n, rates=WIDE_RATE_RANGE, density=0.4)
                rates = -np.diag(G.values)
                assert rates.min() >= WIDE_RATE_RANGE[0] and rates.max() <= WIDE_RATE_RANGE[1]
                off = np.where(np.eye(n, dtype=bool), 0.0, G.values)
                assert np.all(off.max(axis=1) > 0)
                zeros += int(np.count_nonzero(off == 0.0)) - n
        assert zeros > 0

    def test_spectrum_in_strip(self):
        rng = np.random.default_rng(11)
        G = random_generator(rng, 6)
        assert np.all(np.abs(eigen_decompose(G.values).eigenvalues.imag) < math.pi)

    def test_permutation(self):
        P = random_permutation(np.random.default_rng(3), 5).values
        np.testing.assert_array_equal(P.sum(axis=0), 1.0)
        np.testing.assert_array_equal(P.sum(axis=1), 1.0)

    def test_seeded(self):
        a = random_generator(np.random.default_rng(5), 4).values
        b = random_generator(np.random.default_rng(5), 4).values
        np.testing.assert_array_equal(a, b)


class TestSweeps:
    def test_small_soundness_sweep(self):
        result = soundness_sweep(25, seed=2)
        assert result.count == 25
        assert result.ok, result.failures

    def test_battery_runs_at_every_time(self):
        result = soundness_sweep(10, seed=3)
        assert result.battery_checked == 10 * len(BATTERY_TIMES) + result.strip_contained

    @pytest.mark.parametrize("t", BATTERY_TIMES)
    def test_battery_sound_on_sparse_generators(self, t):
        result = soundness_sweep(40, seed=17, times=(t,))
        assert result.battery_rate == 1.0, result.failures

    def test_small_error_bound_sweep(self):
        result = error_bound_sweep(25, seed=2)
        assert result.violations == 0
        assert result.count == 25
