"""Poisson encoding and round-robin demultiplexing."""

import math

import numpy as np
import pytest
from scipy import stats

from snnlzc.core import SeedSpec, SpikeTrain, TimeGrid, derive_rng, inter_spike_intervals
from snnlzc.encoding import PoissonSpec, demux_bits, demux_input, generate_poisson
from snnlzc.errors import WidthDoesNotDivideSequenceError

GRID = TimeGrid(dt_ms=1.0, n_bins=1024)


class TestPoissonSpec:
    def test_spike_probability_formula(self):
        spec = PoissonSpec(50.0, GRID)
        assert spec.spike_probability == pytest.approx(1.0 - math.exp(-50.0 * 1e-3))

    def test_zero_rate_is_silent(self):
        train = generate_poisson(PoissonSpec(0.0, GRID), derive_rng(SeedSpec(1)))
        assert train.bits.sum() == 0

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            PoissonSpec(-1.0, GRID)

    def test_determinism(self):
        spec = PoissonSpec(30.0, GRID)
        a = generate_poisson(spec, derive_rng(SeedSpec(5, 2)))
        b = generate_poisson(spec, derive_rng(SeedSpec(5, 2)))
        assert a == b

    def test_mean_count_matches_expectation(self):
        spec = PoissonSpec(20.0, GRID)
        rng = derive_rng(SeedSpec(9))
        counts = [generate_poisson(spec, rng).bits.sum() for _ in range(2000)]
        expected = GRID.n_bins * spec.spike_probability
        se = math.sqrt(GRID.n_bins * spec.spike_probability * (1 - spec.spike_probability) / 2000)
        assert abs(np.mean(counts) - expected) < 4 * se

    def test_isi_distribution_is_exponential(self):
        # Pool ISIs from a batch of trains and KS-test against the
        # exponential law.  The sample is capped: intervals are discretized
        # to 1 ms bins, so an arbitrarily large sample would let KS resolve
        # the binning itself (the true KS distance to the exponential is
        # spike_probability / 2).  A long window avoids censoring long ISIs
        # and a half-bin shift centers each discretization step on the
        # continuous CDF.
        spec = PoissonSpec(20.0, TimeGrid(dt_ms=1.0, n_bins=16384))
        rng = derive_rng(SeedSpec(11))
        isis = []
        total = 0
        while total < 120:
            train = generate_poisson(spec, rng)
            if train.bits.sum() >= 2:
                vals = inter_spike_intervals(train)
                isis.append(vals)
                total += len(vals)
        isis = np.concatenate(isis)[:120] / 1000.0  # seconds
        _, p = stats.kstest(isis - 5e-4, stats.expon(scale=1 / 20.0).cdf)
        assert p > 0.01


class TestDemux:
    def test_round_robin_mapping(self):
        seq = np.arange(12) % 2  # alternating bits
        out = demux_bits(seq.astype(np.uint8), 4)
        assert out.shape == (4, 3)
        # bit t lands on channel t mod n at bin t // n
        for t in range(12):
            assert out[t % 4, t // 4] == seq[t]

    def test_concatenation_round_trip(self, rng):
        seq = (rng.random(1024) < 0.3).astype(np.uint8)
        out = demux_bits(seq, 8)
        np.testing.assert_array_equal(out.T.reshape(-1), seq)

    def test_width_must_divide(self):
        train = SpikeTrain(GRID, np.zeros(1024, dtype=np.uint8))
        with pytest.raises(WidthDoesNotDivideSequenceError):
            demux_input(train, 7)

    def test_demux_input_returns_trains(self, rng):
        train = SpikeTrain(GRID, (rng.random(1024) < 0.2).astype(np.uint8))
        channels = demux_input(train, 16)
        assert len(channels) == 16
        assert all(ch.grid.n_bins == 64 for ch in channels)
        total = sum(int(ch.bits.sum()) for ch in channels)
        assert total == int(train.bits.sum())
