"""LZ76 parser tests against an independent brute-force reference."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snnlzc.errors import EmptySequenceError, SequenceTooShortError
from snnlzc.lzc import entropy_rate_estimate, lz76_parse, lzc_normalized

from conftest import oracle_lz76_components


def parse_components_as_strings(s: str) -> list[str]:
    result = lz76_parse(s)
    return [s[start : start + length] for start, length in result.components]


class TestAgainstOracle:
    def test_all_sequences_up_to_length_10(self):
        for n in range(1, 11):
            for bits in itertools.product("01", repeat=n):
                s = "".join(bits)
                assert parse_components_as_strings(s) == oracle_lz76_components(s), s

    def test_random_long_sequences(self, rng):
        for _ in range(50):
            n = int(rng.integers(11, 300))
            p = rng.uniform(0.05, 0.95)
            s = "".join("1" if rng.random() < p else "0" for _ in range(n))
            assert parse_components_as_strings(s) == oracle_lz76_components(s)

    @given(st.text(alphabet="01", min_size=1, max_size=64))
    @settings(max_examples=300, deadline=None)
    def test_hypothesis_equivalence(self, s):
        assert parse_components_as_strings(s) == oracle_lz76_components(s)


class TestCanonicalValues:
    def test_canonical_parse(self):
        s = "0001101001000101"
        assert parse_components_as_strings(s) == ["0", "001", "10", "100", "1000", "101"]
        assert lz76_parse(s).component_count == 6

    def test_constant_sequences_have_two_components(self):
        for s in ("00", "0000", "1" * 100):
            assert lz76_parse(s).component_count == 2

    def test_single_symbol(self):
        assert lz76_parse("0").component_count == 1
        assert lz76_parse("1").component_count == 1

    def test_normalized_value(self):
        # C = 2 over n = 4 gives (2/4) * log2(4) = 1.0
        assert lzc_normalized("0000") == pytest.approx(1.0)

    def test_components_tile_the_sequence(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 200))
            bits = (rng.random(n) < 0.5).astype(np.uint8)
            result = lz76_parse(bits)
            pos = 0
            for start, length in result.components:
                assert start == pos and length >= 1
                pos += length
            assert pos == n


class TestInputHandling:
    def test_empty_sequence_rejected(self):
        with pytest.raises(EmptySequenceError):
            lz76_parse("")
        with pytest.raises(EmptySequenceError):
            lzc_normalized(np.array([], dtype=np.uint8))

    def test_normalized_needs_two_symbols(self):
        with pytest.raises(SequenceTooShortError):
            lzc_normalized("1")

    def test_nonbinary_rejected(self):
        with pytest.raises(ValueError):
            lz76_parse("012")
        with pytest.raises(ValueError):
            lz76_parse(np.array([0, 1, 2], dtype=np.uint8))

    def test_accepts_array_and_string_equally(self, rng):
        bits = (rng.random(500) < 0.3).astype(np.uint8)
        s = "".join(map(str, bits.tolist()))
        assert lz76_parse(bits).component_count == lz76_parse(s).component_count


class TestEntropyRate:
    def test_alias(self, rng):
        bits = (rng.random(1000) < 0.3).astype(np.uint8)
        assert entropy_rate_estimate(bits) == lzc_normalized(bits)

    def test_converges_to_binary_entropy(self, rng):
        # Small version; the acceptance suite runs the full criterion.
        def h(p):
            return -p * math.log2(p) - (1 - p) * math.log2(1 - p)

        for p in (0.1, 0.5):
            vals = [
                lzc_normalized((rng.random(20_000) < p).astype(np.uint8))
                for _ in range(10)
            ]
            assert np.mean(vals) == pytest.approx(h(p), abs=0.18)
