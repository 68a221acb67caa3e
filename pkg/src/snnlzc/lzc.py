"""Lempel-Ziv (LZ76) exhaustive-history parsing and normalized complexity.

The readout that turns output spike trains into classification features:
``C`` counts the components of the production parse, and the normalized
complexity ``(C/n) * log2(n)`` estimates the entropy rate in bits/symbol for
binary sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import SpikeTrain
from .errors import EmptySequenceError, SequenceTooShortError
from .kernels import lz76_starts_lengths

__all__ = ["LzcResult", "lz76_parse", "lzc_normalized", "entropy_rate_estimate"]


@dataclass(frozen=True)
class LzcResult:
    """Parse outcome for one binary sequence.

    ``component_count`` is the number of components C; ``normalized`` is
    (C/n) * log2(n) for the binary alphabet; ``components`` lists the
    (start, length) pairs tiling [0, n).
    """

    component_count: int
    normalized: float
    alpha: int
    n: int
    components: tuple[tuple[int, int], ...] | None = None


def _as_symbols(sequence: "SpikeTrain | Sequence[int] | str | np.ndarray") -> np.ndarray:
    if isinstance(sequence, SpikeTrain):
        return sequence.bits
    if isinstance(sequence, str):
        if set(sequence) - {"0", "1"}:
            raise ValueError("string sequences must contain only '0' and '1'")
        return np.frombuffer(sequence.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.ascontiguousarray(sequence, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("sequence must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise ValueError("sequence must be binary (0/1)")
    return arr


def lz76_parse(sequence, keep_components: bool = True) -> LzcResult:
    """Exhaustive-history LZ76 production parse of a binary sequence.

    Scanning left to right, each component is extended while the candidate
    phrase occurs as a substring of the prefix ending one symbol before the
    candidate's last symbol; the final, possibly reproducible, tail counts
    as one component.
    """
    symbols = _as_symbols(sequence)
    n = int(symbols.shape[0])
    if n == 0:
        raise EmptySequenceError("cannot parse an empty sequence")
    starts, lengths = lz76_starts_lengths(symbols)
    c = int(starts.shape[0])
    normalized = (c / n) * math.log2(n) if n >= 2 else 0.0
    components = tuple(zip(starts.tolist(), lengths.tolist())) if keep_components else None
    return LzcResult(
        component_count=c, normalized=normalized, alpha=2, n=n, components=components
    )


def lzc_normalized(sequence) -> float:
    """Normalized LZ76 complexity (C/n) * log2(n); requires length >= 2."""
    symbols = _as_symbols(sequence)
    n = int(symbols.shape[0])
    if n == 0:
        raise EmptySequenceError("cannot parse an empty sequence")
    if n < 2:
        raise SequenceTooShortError("normalized LZC needs length >= 2")
    starts, _ = lz76_starts_lengths(symbols)
    return (starts.shape[0] / n) * math.log2(n)


def entropy_rate_estimate(sequence) -> float:
    """Entropy-rate estimate in bits/symbol; alias of the normalized LZC.

    For stationary ergodic binary sources the normalized complexity converges
    to the entropy rate, so the same number serves analysis tooling under a
    more descriptive name.
    """
    return lzc_normalized(sequence)
