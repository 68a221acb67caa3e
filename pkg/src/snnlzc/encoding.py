"""Poisson spike-train generation and input demultiplexing.

Homogeneous Poisson trains are discretized per bin with spike probability
``1 - exp(-rate * dt)`` (exact discretization of the process, at most one
spike per bin).  Fixed-length binary input sequences are demultiplexed
round-robin onto the input layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SpikeTrain, TimeGrid
from .errors import WidthDoesNotDivideSequenceError

__all__ = ["PoissonSpec", "generate_poisson", "demux_input", "demux_bits"]


@dataclass(frozen=True)
class PoissonSpec:
    """Mean firing rate in Hz plus the grid the train is discretized to."""

    rate_hz: float
    grid: TimeGrid

    def __post_init__(self) -> None:
        if not (self.rate_hz >= 0 and math.isfinite(self.rate_hz)):
            raise ValueError(f"rate_hz must be finite and >= 0, got {self.rate_hz}")

    @property
    def spike_probability(self) -> float:
        """Per-bin spike probability 1 - exp(-rate * dt)."""
        return -math.expm1(-self.rate_hz * self.grid.dt_s)


def generate_poisson(spec: PoissonSpec, rng: np.random.Generator) -> SpikeTrain:
    """Draw one homogeneous Poisson spike train on the given grid."""
    p = spec.spike_probability
    bits = (rng.random(spec.grid.n_bins) < p).astype(np.uint8)
    return SpikeTrain(spec.grid, bits)


def demux_bits(sequence: np.ndarray, n: int) -> np.ndarray:
    """Round-robin demultiplex a flat bit sequence onto ``n`` channels.

    Source bit at position t goes to channel t % n at bin t // n.  Returns a
    (n, len(sequence) // n) array; the multiset of bits is preserved.
    """
    seq = np.ascontiguousarray(sequence, dtype=np.uint8)
    length = seq.shape[0]
    if n < 1 or length % n != 0:
        raise WidthDoesNotDivideSequenceError(
            f"layer width {n} must divide the sequence length {length}"
        )
    return seq.reshape(length // n, n).T.copy()


def demux_input(sequence: SpikeTrain, n: int) -> list[SpikeTrain]:
    """Demultiplex one input sequence into ``n`` parallel spike trains."""
    channels = demux_bits(sequence.bits, n)
    grid = TimeGrid(dt_ms=sequence.grid.dt_ms, n_bins=channels.shape[1])
    return [SpikeTrain(grid, channels[i]) for i in range(n)]
