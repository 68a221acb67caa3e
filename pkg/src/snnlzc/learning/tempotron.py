"""Tempotron supervised learning for the output layer.

Each output neuron is trained as an independent tempotron against its class
indicator: it should fire for samples of its own class group and stay silent
otherwise.  On an error, weights move by the PSP kernel summed over
presynaptic spike times up to the decisive moment: the membrane-potential
maximum when the neuron wrongly stayed silent, or the erroneous threshold
crossing when it wrongly fired.  Hidden weights stay frozen at
initialization (random projection); only hidden->output weights learn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import GridMismatchError, MissingPotentialTraceError
from ..network import ForwardTrace, NetworkModel, run_layer

__all__ = [
    "TempotronConfig",
    "psp_kernel",
    "psp_kernel_peak_time",
    "tempotron_delta",
    "tempotron_train",
]


@dataclass(frozen=True)
class TempotronConfig:
    """Learning rate and PSP kernel constants (tau_s defaults to tau/4)."""

    eta: float = 0.05
    tau_ms: float = 20.0
    tau_s_ms: float | None = None
    epochs: int = 3
    n_classes: int = 2

    def __post_init__(self) -> None:
        if self.tau_s_ms is None:
            object.__setattr__(self, "tau_s_ms", self.tau_ms / 4.0)
        if not (self.tau_ms > self.tau_s_ms > 0):
            raise ValueError("need tau_ms > tau_s_ms > 0")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")

    @property
    def v0(self) -> float:
        """Normalization putting the kernel peak at exactly 1."""
        t_peak = psp_kernel_peak_time(self.tau_ms, self.tau_s_ms)
        return 1.0 / (math.exp(-t_peak / self.tau_ms) - math.exp(-t_peak / self.tau_s_ms))


def psp_kernel_peak_time(tau_ms: float, tau_s_ms: float) -> float:
    """Closed-form time of the kernel maximum."""
    return (tau_ms * tau_s_ms / (tau_ms - tau_s_ms)) * math.log(tau_ms / tau_s_ms)


def psp_kernel(t_ms, cfg: TempotronConfig) -> np.ndarray:
    """PSP kernel K(t) = v0 * (exp(-t/tau) - exp(-t/tau_s)) for t >= 0, else 0."""
    t = np.asarray(t_ms, dtype=np.float64)
    k = cfg.v0 * (np.exp(-t / cfg.tau_ms) - np.exp(-t / cfg.tau_s_ms))
    return np.where(t >= 0, k, 0.0)


def _delta_from_arrays(
    v_hist: np.ndarray,
    out_spikes: np.ndarray,
    pre_spikes: np.ndarray,
    should_fire: bool,
    did_fire: bool,
    cfg: TempotronConfig,
    dt_ms: float,
) -> np.ndarray:
    """Per-synapse update for one output neuron; zeros when classification is correct."""
    n_pre, n_bins = pre_spikes.shape
    if should_fire == did_fire:
        return np.zeros(n_pre)
    if did_fire:
        t_f = int(np.flatnonzero(out_spikes)[0])  # erroneous crossing
        sign = -1.0
    else:
        t_f = int(np.argmax(v_hist))  # moment of maximal potential
        sign = 1.0
    lags = (t_f - np.arange(n_bins)) * dt_ms
    k = psp_kernel(lags, cfg)  # zero for bins after t_f
    return sign * cfg.eta * (pre_spikes.astype(np.float64) @ k)


def tempotron_delta(
    trace: ForwardTrace,
    pre_trains,
    label_should_fire: bool,
    did_fire: bool,
    cfg: TempotronConfig,
    neuron: int = 0,
) -> np.ndarray:
    """Weight change for one output neuron given a potential-retaining trace."""
    if trace.v_hist_z is None:
        raise MissingPotentialTraceError("forward trace must retain membrane potentials")
    if isinstance(pre_trains, np.ndarray):
        pre = np.ascontiguousarray(pre_trains, dtype=np.uint8)
    else:
        pre = np.stack([t.bits for t in pre_trains]).astype(np.uint8)
    return _delta_from_arrays(
        trace.v_hist_z[neuron],
        trace.output_spikes[neuron],
        pre,
        label_should_fire,
        did_fire,
        cfg,
        trace.grid.dt_ms,
    )


def class_groups(n: int, n_classes: int) -> np.ndarray:
    """Class index of each output neuron: contiguous blocks."""
    return (np.arange(n) * n_classes) // n


def tempotron_train(
    model: NetworkModel,
    inputs: np.ndarray,
    labels: np.ndarray,
    cfg: TempotronConfig,
    rng: np.random.Generator,
) -> NetworkModel:
    """Train hidden->output weights with the tempotron rule.

    ``inputs`` is (B, n, T) binary, ``labels`` length B.  Hidden spikes are
    precomputed once since the hidden weights stay frozen.
    """
    if inputs.ndim != 3 or inputs.shape[1] != model.n or inputs.shape[2] != model.grid.n_bins:
        raise GridMismatchError(f"inputs shape {inputs.shape} does not match the model")
    dt = model.grid.dt_ms
    groups = class_groups(model.n, cfg.n_classes)
    hidden = []
    for idx in range(inputs.shape[0]):
        s_h, _ = run_layer(
            np.ascontiguousarray(inputs[idx]), model.w_xh, model.b_h, model.params_h, dt
        )
        if model.delay_one_bin:
            shifted = np.zeros_like(s_h)
            shifted[:, 1:] = s_h[:, :-1]
            s_h = shifted
        hidden.append(s_h)
    w_hz = model.w_hz.copy()
    for _ in range(cfg.epochs):
        order = rng.permutation(inputs.shape[0])
        for idx in order:
            s_h = hidden[idx]
            s_z, v_z = run_layer(s_h, w_hz, model.b_z, model.params_z, dt, record_v=True)
            fired = s_z.any(axis=1)
            for j in range(model.n):
                should = groups[j] == labels[idx]
                if bool(should) == bool(fired[j]):
                    continue
                w_hz[j] += _delta_from_arrays(
                    v_z[j], s_z[j], s_h, bool(should), bool(fired[j]), cfg, dt
                )
    return model.with_weights(w_hz=w_hz)
