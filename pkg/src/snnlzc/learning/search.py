"""Random hyperparameter search over neuron counts and learning parameters.

Two search modes share one mechanism: "baseline" samples only the neuron
count and the learning rate; "extended" additionally samples intrinsic
neuron parameters (threshold, membrane time constant, and for adaptive
neurons the threshold jump and adaptation time constant).  The extended
range set is a strict superset of the baseline's, so any uplift measured
between the two modes is attributable to the extra degrees of freedom.

The search itself is rule-agnostic: candidates are scored by a caller-
supplied evaluation function and reduced deterministically by candidate
index, never by completion order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ..errors import ConfigError, NumericalError

__all__ = [
    "SearchSpace",
    "SearchOutcome",
    "default_search_space",
    "sample_candidates",
    "hyper_search",
]

_BASELINE_PARAMS = frozenset({"eta"})
_EXTENDED_PARAMS = frozenset({"eta", "v_th", "tau_m_ms"})
_META_EXTRA_PARAMS = frozenset({"th_jump", "tau_adapt_ms"})


@dataclass(frozen=True)
class SearchSpace:
    """Sampling ranges for one search run.

    ``n_choices`` is the discrete set of neuron counts; every entry must
    divide the input sequence length so demultiplexing stays lossless.
    ``ranges`` maps continuous parameter names to (low, high) intervals.
    """

    mode: str
    ranges: Mapping[str, tuple[float, float]]
    n_choices: tuple[int, ...] = (8, 16, 32, 64)
    budget: int = 20
    inner_seeds: int = 3

    def __post_init__(self) -> None:
        if self.mode not in ("baseline", "extended"):
            raise ConfigError(f"unknown search mode {self.mode!r}")
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")
        if self.inner_seeds < 1:
            raise ConfigError("inner_seeds must be >= 1")
        if len(self.n_choices) == 0 or any(n < 1 for n in self.n_choices):
            raise ConfigError("n_choices must be non-empty positive integers")
        names = frozenset(self.ranges)
        required = _BASELINE_PARAMS if self.mode == "baseline" else _EXTENDED_PARAMS
        missing = required - names
        if missing:
            raise ConfigError(f"{self.mode} search must cover {sorted(missing)}")
        if self.mode == "baseline" and names != _BASELINE_PARAMS:
            raise ConfigError("baseline search may only cover {'eta'}")
        allowed = _EXTENDED_PARAMS | _META_EXTRA_PARAMS
        unknown = names - allowed
        if unknown:
            raise ConfigError(f"unknown search parameters {sorted(unknown)}")
        for name, (lo, hi) in self.ranges.items():
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ConfigError(f"range for {name} must be finite with low <= high")
        object.__setattr__(self, "ranges", dict(self.ranges))
        object.__setattr__(self, "n_choices", tuple(int(n) for n in self.n_choices))


@dataclass(frozen=True)
class SearchOutcome:
    """Winner of a search plus the full per-candidate score trace.

    ``seed_scores[i]`` holds candidate i's individual inner-seed scores
    (empty for failed candidates); ``scores[i]`` is their mean.
    """

    winner_index: int
    winner_params: dict[str, float]
    winner_score: float
    candidates: tuple[dict[str, float], ...]
    scores: tuple[float, ...]
    failures: tuple[int, ...] = field(default=())
    seed_scores: tuple[tuple[float, ...], ...] = field(default=())


# Default learning-rate ranges per rule.  For STDP eta is a multiplier on
# the pairing amplitudes; for BP and Tempotron it is the gradient step.
_ETA_RANGES = {
    "bp": (0.02, 0.6),
    "stdp": (0.2, 5.0),
    "tempotron": (0.005, 0.2),
}


def default_search_space(
    mode: str,
    model_kind: str,
    rule: str,
    budget: int = 20,
    inner_seeds: int = 3,
) -> SearchSpace:
    """Stock search space for a (mode, model kind, rule) combination."""
    if rule not in _ETA_RANGES:
        raise ConfigError(f"unknown rule {rule!r}")
    ranges: dict[str, tuple[float, float]] = {"eta": _ETA_RANGES[rule]}
    if mode == "extended":
        ranges["v_th"] = (0.4, 2.0)
        ranges["tau_m_ms"] = (5.0, 50.0)
        if model_kind == "meta":
            ranges["th_jump"] = (0.0, 0.6)
            ranges["tau_adapt_ms"] = (10.0, 100.0)
    return SearchSpace(
        mode=mode, ranges=ranges, budget=budget, inner_seeds=inner_seeds
    )


def sample_candidates(space: SearchSpace, rng: np.random.Generator) -> list[dict[str, float]]:
    """Draw the full candidate list up front, in a fixed parameter order.

    Sampling all candidates before any evaluation keeps the draws
    independent of evaluation cost or ordering.
    """
    out = []
    names = sorted(space.ranges)
    for _ in range(space.budget):
        cand: dict[str, float] = {
            "n": int(space.n_choices[rng.integers(len(space.n_choices))])
        }
        for name in names:
            lo, hi = space.ranges[name]
            cand[name] = float(rng.uniform(lo, hi))
        out.append(cand)
    return out


def hyper_search(
    space: SearchSpace,
    evaluate: Callable[[int, dict[str, float], int], float],
    rng: np.random.Generator,
) -> SearchOutcome:
    """Random search: sample ``budget`` candidates, score each as the mean
    of ``evaluate(candidate_index, params, inner_seed)`` over
    ``inner_seeds`` repeats, and return the argmax.  The candidate index is
    passed through so the evaluation can derive per-candidate random
    streams.

    Ties break toward the smallest neuron count, then the smallest eta,
    then the lowest candidate index.  A candidate whose evaluation raises
    NumericalError scores 0 instead of aborting the search.
    """
    candidates = sample_candidates(space, rng)
    scores: list[float] = []
    seed_scores: list[tuple[float, ...]] = []
    failures: list[int] = []
    for idx, cand in enumerate(candidates):
        vals = []
        try:
            for seed in range(space.inner_seeds):
                vals.append(float(evaluate(idx, cand, seed)))
        except NumericalError:
            failures.append(idx)
            seed_scores.append(())
            vals = [0.0]
        else:
            seed_scores.append(tuple(vals))
        scores.append(float(np.mean(vals)))
    order = sorted(
        range(len(candidates)),
        key=lambda i: (-scores[i], candidates[i]["n"], candidates[i]["eta"], i),
    )
    best = order[0]
    return SearchOutcome(
        winner_index=best,
        winner_params=dict(candidates[best]),
        winner_score=scores[best],
        candidates=tuple(dict(c) for c in candidates),
        scores=tuple(scores),
        failures=tuple(failures),
        seed_scores=tuple(seed_scores),
    )
