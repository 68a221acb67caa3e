"""Random hyperparameter search: spaces, determinism, tie-breaking."""

import numpy as np
import pytest

from snnlzc.core import SeedSpec, derive_rng
from snnlzc.errors import ConfigError, NumericalError
from snnlzc.learning import (
    SearchSpace,
    default_search_space,
    hyper_search,
    sample_candidates,
)


class TestSearchSpace:
    def test_baseline_covers_only_eta(self):
        space = default_search_space("baseline", "lif", "bp")
        assert set(space.ranges) == {"eta"}

    def test_extended_is_strict_superset(self):
        for kind in ("lif", "meta"):
            for rule in ("bp", "stdp", "tempotron"):
                base = default_search_space("baseline", kind, rule)
                ext = default_search_space("extended", kind, rule)
                assert set(base.ranges) < set(ext.ranges)
                assert {"v_th", "tau_m_ms"} <= set(ext.ranges)

    def test_meta_extended_adds_adaptation_params(self):
        ext = default_search_space("extended", "meta", "stdp")
        assert {"th_jump", "tau_adapt_ms"} <= set(ext.ranges)
        lif_ext = default_search_space("extended", "lif", "stdp")
        assert "th_jump" not in lif_ext.ranges

    def test_baseline_rejects_extra_ranges(self):
        with pytest.raises(ConfigError):
            SearchSpace(mode="baseline", ranges={"eta": (0.1, 1.0), "v_th": (0.5, 1.5)})

    def test_extended_requires_core_ranges(self):
        with pytest.raises(ConfigError):
            SearchSpace(mode="extended", ranges={"eta": (0.1, 1.0)})

    def test_unknown_parameter_rejected(self):
        with pytest.raises(ConfigError):
            SearchSpace(mode="baseline", ranges={"bogus": (0.0, 1.0)})

    def test_invalid_budget(self):
        with pytest.raises(ConfigError):
            SearchSpace(mode="baseline", ranges={"eta": (0.1, 1.0)}, budget=0)


class TestSampling:
    def test_deterministic(self):
        space = default_search_space("extended", "meta", "bp", budget=10)
        a = sample_candidates(space, derive_rng(SeedSpec(4, 10)))
        b = sample_candidates(space, derive_rng(SeedSpec(4, 10)))
        assert a == b

    def test_within_ranges(self):
        space = default_search_space("extended", "lif", "bp", budget=50)
        for cand in sample_candidates(space, derive_rng(SeedSpec(5, 10))):
            assert cand["n"] in space.n_choices
            for name, (lo, hi) in space.ranges.items():
                assert lo <= cand[name] <= hi


class TestHyperSearch:
    def test_budget_one_returns_single_candidate(self):
        space = SearchSpace(mode="baseline", ranges={"eta": (0.1, 1.0)}, budget=1,
                            inner_seeds=2)
        seen = []

        def evaluate(idx, params, seed):
            seen.append((idx, seed))
            return 0.5

        outcome = hyper_search(space, evaluate, derive_rng(SeedSpec(6, 10)))
        assert outcome.winner_index == 0
        assert seen == [(0, 0), (0, 1)]

    def test_argmax_and_inner_seed_average(self):
        space = SearchSpace(mode="baseline", ranges={"eta": (0.1, 1.0)}, budget=5,
                            inner_seeds=2)

        def evaluate(idx, params, seed):
            return [0.2, 0.9, 0.4, 0.9, 0.1][idx] + 0.01 * seed

        outcome = hyper_search(space, evaluate, derive_rng(SeedSpec(7, 10)))
        assert outcome.scores[1] == pytest.approx(0.905)
        # Candidates 1 and 3 tie on score; smaller n (then eta) wins.
        c1, c3 = outcome.candidates[1], outcome.candidates[3]
        expect = min((c1["n"], c1["eta"], 1), (c3["n"], c3["eta"], 3))
        assert outcome.winner_index == expect[2]

    def test_deterministic_winner(self):
        space = default_search_space("extended", "lif", "stdp", budget=6, inner_seeds=1)

        def evaluate(idx, params, seed):
            return float(np.sin(idx * 1.7))

        a = hyper_search(space, evaluate, derive_rng(SeedSpec(8, 10)))
        b = hyper_search(space, evaluate, derive_rng(SeedSpec(8, 10)))
        assert a.winner_params == b.winner_params
        assert a.scores == b.scores

    def test_numerical_failure_scores_zero(self):
        space = SearchSpace(mode="baseline", ranges={"eta": (0.1, 1.0)}, budget=3,
                            inner_seeds=1)

        def evaluate(idx, params, seed):
            if idx == 1:
                raise NumericalError("diverged")
            return 0.3

        outcome = hyper_search(space, evaluate, derive_rng(SeedSpec(9, 10)))
        assert outcome.scores[1] == 0.0
        assert outcome.failures == (1,)
        assert outcome.winner_index != 1
