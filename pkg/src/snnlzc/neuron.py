"""Discrete-time membrane dynamics: classic LIF and the adaptive meta-neuron.

Integration is explicit forward Euler on the simulation grid.  The
meta-neuron keeps the LIF integrate-threshold-reset core but lets the
threshold and membrane time constant vary: each emitted spike raises the
threshold by ``th_jump`` (decaying back with ``tau_adapt_ms``), and a running
average of the input current modulates the effective time constant through
``tau_mod_gain``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatchError

__all__ = [
    "LifParams",
    "MetaParams",
    "NeuronState",
    "input_current",
    "lif_step",
    "meta_step",
]


@dataclass(frozen=True)
class LifParams:
    """Static LIF constants (times in ms, resistance dimensionless)."""

    tau_m_ms: float = 20.0
    r_m: float = 1.0
    v_th: float = 1.0
    v_reset: float = 0.0
    v_rest: float = 0.0

    def __post_init__(self) -> None:
        if not self.tau_m_ms > 0:
            raise ValueError("tau_m_ms must be > 0")
        if not self.r_m > 0:
            raise ValueError("r_m must be > 0")
        if not self.v_th > self.v_reset:
            raise ValueError("v_th must exceed v_reset")

    def check_grid(self, dt_ms: float) -> None:
        # Explicit Euler stability guard.
        if self.tau_m_ms < dt_ms:
            raise ValueError(
                f"tau_m_ms={self.tau_m_ms} must be >= dt_ms={dt_ms} for stable integration"
            )


@dataclass(frozen=True)
class MetaParams:
    """Adaptive extension of :class:`LifParams`.

    The effective time constant is clamped to [dt_ms, 10 * base.tau_m_ms].
    With ``th_jump = 0`` and ``tau_mod_gain = 0`` the dynamics degenerate to
    the plain LIF neuron bit-for-bit.
    """

    base: LifParams
    th_jump: float = 0.2
    tau_adapt_ms: float = 50.0
    tau_mod_gain: float = 0.0

    def __post_init__(self) -> None:
        if self.th_jump < 0:
            raise ValueError("th_jump must be >= 0")
        if not self.tau_adapt_ms > 0:
            raise ValueError("tau_adapt_ms must be > 0")

    @property
    def adapt_decay_per_ms(self) -> float:
        return math.exp(-1.0 / self.tau_adapt_ms)


@dataclass(frozen=True)
class NeuronState:
    """Per-neuron dynamic state; ``th_offset`` and ``i_avg`` stay 0 for LIF."""

    v: float = 0.0
    th_offset: float = 0.0
    i_avg: float = 0.0
    last_spike_bin: int | None = None

    @classmethod
    def resting(cls, params: LifParams | MetaParams) -> "NeuronState":
        base = params.base if isinstance(params, MetaParams) else params
        return cls(v=base.v_rest)


def input_current(weights, inputs, bias: float = 0.0) -> float:
    """Total input current: dot(weights, inputs) + bias."""
    w = np.asarray(weights, dtype=np.float64)
    x = np.asarray(inputs, dtype=np.float64)
    if w.shape != x.shape:
        raise DimensionMismatchError(f"weights {w.shape} vs inputs {x.shape}")
    return float(w @ x + bias)


def lif_step(
    state: NeuronState,
    params: LifParams,
    i_t: float,
    dt_ms: float,
    bin_index: int | None = None,
) -> tuple[NeuronState, int]:
    """One Euler step of the LIF membrane; returns (new state, spike flag).

    Threshold comparison is >= and the reset happens within the same bin.
    """
    a = dt_ms / params.tau_m_ms
    v = state.v + a * (-(state.v - params.v_rest) + params.r_m * i_t)
    if v >= params.v_th:
        return replace(state, v=params.v_reset, last_spike_bin=bin_index), 1
    return replace(state, v=v), 0


def meta_step(
    state: NeuronState,
    params: MetaParams,
    i_t: float,
    dt_ms: float,
    bin_index: int | None = None,
) -> tuple[NeuronState, int]:
    """One step of the adaptive meta-neuron; returns (new state, spike flag).

    Order per bin: threshold-offset decay, membrane update with the effective
    parameters, spike test and reset, spike-triggered threshold jump, running
    input-average update.
    """
    base = params.base
    adapt_decay = math.exp(-dt_ms / params.tau_adapt_ms)
    th_offset = state.th_offset * adapt_decay
    tau_eff = base.tau_m_ms * (1.0 + params.tau_mod_gain * state.i_avg)
    tau_eff = min(max(tau_eff, dt_ms), 10.0 * base.tau_m_ms)
    vth_eff = base.v_th + th_offset

    a = dt_ms / tau_eff
    v = state.v + a * (-(state.v - base.v_rest) + base.r_m * i_t)
    spike = 0
    last = state.last_spike_bin
    if v >= vth_eff:
        spike = 1
        v = base.v_reset
        th_offset = th_offset + params.th_jump
        last = bin_index if bin_index is not None else last
    i_avg = state.i_avg + (dt_ms / params.tau_adapt_ms) * (i_t - state.i_avg)
    return NeuronState(v=v, th_offset=th_offset, i_avg=i_avg, last_spike_bin=last), spike
