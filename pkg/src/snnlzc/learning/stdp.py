"""Spike-timing-dependent plasticity with nearest-neighbor pairing.

Unsupervised: labels never influence the weight updates.  Both weight
matrices are trained, with hard clamping to [w_min, w_max] after every
presentation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import GridMismatchError
from ..kernels import stdp_accumulate
from ..network import NetworkModel, run_layer

__all__ = ["StdpConfig", "stdp_delta", "stdp_train"]


@dataclass(frozen=True)
class StdpConfig:
    """Amplitudes, window time constants, and hard weight bounds."""

    a_plus: float = 0.01
    a_minus: float = 0.012
    tau_plus_ms: float = 20.0
    tau_minus_ms: float = 20.0
    w_min: float = 0.0
    w_max: float = 10.0
    epochs: int = 1

    def __post_init__(self) -> None:
        for name in ("a_plus", "a_minus", "tau_plus_ms", "tau_minus_ms"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.w_min < self.w_max:
            raise ValueError("w_min must be < w_max")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")

    def scaled(self, eta: float) -> "StdpConfig":
        """Scale both amplitudes by a learning-rate factor."""
        return StdpConfig(
            a_plus=self.a_plus * eta,
            a_minus=self.a_minus * eta,
            tau_plus_ms=self.tau_plus_ms,
            tau_minus_ms=self.tau_minus_ms,
            w_min=self.w_min,
            w_max=self.w_max,
            epochs=self.epochs,
        )


def stdp_delta(t_pre_ms: float, t_post_ms: float, cfg: StdpConfig) -> float:
    """Weight change for a single pre/post spike pair.

    Potentiation when the pre spike leads, depression when it lags, zero at
    exact coincidence.
    """
    if not (math.isfinite(t_pre_ms) and math.isfinite(t_post_ms)):
        raise ValueError("spike times must be finite")
    if t_post_ms > t_pre_ms:
        return cfg.a_plus * math.exp(-(t_post_ms - t_pre_ms) / cfg.tau_plus_ms)
    if t_pre_ms > t_post_ms:
        return -cfg.a_minus * math.exp(-(t_pre_ms - t_post_ms) / cfg.tau_minus_ms)
    return 0.0


def _decay_tables(cfg: StdpConfig, dt_ms: float, n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    lags = np.arange(n_bins, dtype=np.float64) * dt_ms
    plus = cfg.a_plus * np.exp(-lags / cfg.tau_plus_ms)
    minus = cfg.a_minus * np.exp(-lags / cfg.tau_minus_ms)
    return plus, minus


def stdp_train(
    model: NetworkModel,
    inputs: np.ndarray,
    cfg: StdpConfig,
    rng: np.random.Generator,
) -> NetworkModel:
    """Unsupervised STDP over both layers; returns the trained model.

    ``inputs`` is (B, n, T) binary.  Presentations are shuffled each epoch;
    for each presentation the accumulated nearest-neighbor updates of both
    synapse matrices are applied, then clamped to [w_min, w_max].
    """
    if inputs.ndim != 3 or inputs.shape[1] != model.n:
        raise GridMismatchError(f"inputs shape {inputs.shape} does not match model n={model.n}")
    if inputs.shape[2] != model.grid.n_bins:
        raise GridMismatchError(
            f"inputs have {inputs.shape[2]} bins, model grid has {model.grid.n_bins}"
        )
    dt = model.grid.dt_ms
    plus, minus = _decay_tables(cfg, dt, model.grid.n_bins)
    w_xh = model.w_xh.copy()
    w_hz = model.w_hz.copy()
    n_samples = inputs.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n_samples)
        for idx in order:
            pre = np.ascontiguousarray(inputs[idx])
            s_h, _ = run_layer(pre, w_xh, model.b_h, model.params_h, dt)
            s_h_in = s_h
            if model.delay_one_bin:
                s_h_in = np.zeros_like(s_h)
                s_h_in[:, 1:] = s_h[:, :-1]
            s_z, _ = run_layer(s_h_in, w_hz, model.b_z, model.params_z, dt)
            dw_xh = np.zeros_like(w_xh)
            dw_hz = np.zeros_like(w_hz)
            stdp_accumulate(pre, s_h, plus, minus, dw_xh)
            stdp_accumulate(s_h_in, s_z, plus, minus, dw_hz)
            w_xh = np.clip(w_xh + dw_xh, cfg.w_min, cfg.w_max)
            w_hz = np.clip(w_hz + dw_hz, cfg.w_min, cfg.w_max)
    return model.with_weights(w_xh=w_xh, w_hz=w_hz)
