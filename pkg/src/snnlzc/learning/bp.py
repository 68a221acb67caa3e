"""Surrogate-gradient backpropagation through the unrolled network dynamics.

The discrete dynamics are unrolled over all bins and differentiated
manually.  The non-differentiable threshold uses a triangular surrogate
derivative (peak 1 at v = v_th, support half-width ``surrogate_width``).
Logits are time-summed membrane potentials of contiguous output-neuron class
groups; the loss is softmax cross-entropy.

Two modes share the code path:

* hard (training): spikes are 0/1, the surrogate only replaces the
  derivative in the backward pass;
* smooth (verification): the spike nonlinearity is replaced by the C1 ramp
  whose derivative is the (area-normalized) triangle, making the whole loss
  differentiable so analytic gradients can be checked against central
  finite differences.

For meta-neurons the backward pass also unrolls the adaptation state: the
spike-triggered threshold offset and the running input average carry their
own adjoint recurrences, so gradients reach the base threshold and time
constant through every path (clamped bins contribute zero through the
modulation branch).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import GridMismatchError, NonfiniteLossError
from ..network import KIND_META, NetworkModel
from ..neuron import LifParams, MetaParams

__all__ = ["BpConfig", "bp_train", "bp_loss_and_grads"]


@dataclass(frozen=True)
class BpConfig:
    """Learning rate, surrogate width, epochs, and loss settings.

    ``surrogate_width=None`` resolves to 0.5 * (v_th - v_reset) of each
    layer.  ``learn_intrinsic`` additionally applies gradient updates to the
    per-layer thresholds and membrane time constants (EXTENDED mode).
    """

    eta: float = 0.1
    surrogate_width: float | None = None
    epochs: int = 5
    batch_size: int = 32
    loss_kind: str = "softmax_ce"
    learn_intrinsic: bool = False
    n_classes: int = 2
    logit_gain: float = 10.0

    def __post_init__(self) -> None:
        if not self.eta >= 0:
            raise ValueError("eta must be >= 0")
        if self.surrogate_width is not None and not self.surrogate_width > 0:
            raise ValueError("surrogate_width must be > 0")
        if self.loss_kind != "softmax_ce":
            raise ValueError("loss_kind is fixed to softmax_ce")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


def _triangle(x: np.ndarray, width: float) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(x) / width)


def _soft_spike(x: np.ndarray, width: float) -> np.ndarray:
    # C1 ramp: integral of the triangle, normalized to run from 0 to 1.
    w = width
    y = np.where(
        x <= 0.0,
        np.square(np.maximum(x + w, 0.0)) / (2.0 * w * w),
        1.0 - np.square(np.maximum(w - x, 0.0)) / (2.0 * w * w),
    )
    return y


class _LayerCfg:
    """Per-layer scalars extracted from LifParams/MetaParams for the unroll."""

    def __init__(self, params: LifParams | MetaParams, dt_ms: float, width: float | None):
        self.is_meta = isinstance(params, MetaParams)
        base = params.base if self.is_meta else params
        self.tau = base.tau_m_ms
        self.r = base.r_m
        self.v_th = base.v_th
        self.v_reset = base.v_reset
        self.v_rest = base.v_rest
        self.dt = dt_ms
        self.width = width if width is not None else 0.5 * (base.v_th - base.v_reset)
        if self.is_meta:
            self.th_jump = params.th_jump
            self.tau_adapt = params.tau_adapt_ms
            self.gain = params.tau_mod_gain
            self.adapt_decay = math.exp(-dt_ms / params.tau_adapt_ms)


def _unroll_layer(pre: np.ndarray, w: np.ndarray, b: np.ndarray, lc: _LayerCfg, smooth: bool):
    """Forward one layer over all bins; returns stored tensors for backward."""
    batch, _, n_bins = pre.shape
    n = w.shape[0]
    cur = np.einsum("ij,bjt->bit", w, pre) + b[None, :, None]
    u = np.empty((batch, n, n_bins))
    s = np.empty((batch, n, n_bins))
    v = np.full((batch, n), lc.v_rest)
    if lc.is_meta:
        a_hist = np.empty((batch, n, n_bins))
        vth_hist = np.empty((batch, n, n_bins))
        tau_mult = np.empty((batch, n, n_bins))
        free = np.empty((batch, n, n_bins))
        th_off = np.zeros((batch, n))
        i_avg = np.zeros((batch, n))
    else:
        a_hist = vth_hist = tau_mult = free = None
    tau_lo, tau_hi = lc.dt, 10.0 * lc.tau
    a_lif = lc.dt / lc.tau
    for t in range(n_bins):
        i_t = cur[:, :, t]
        if lc.is_meta:
            th_off *= lc.adapt_decay
            mult = 1.0 + lc.gain * i_avg
            tau_eff = lc.tau * mult
            low = tau_eff < tau_lo
            high = tau_eff > tau_hi
            tau_eff = np.clip(tau_eff, tau_lo, tau_hi)
            # d(tau_eff)/d(tau_base): mult when free, 10 at the upper clamp, 0 at the lower
            tau_mult[:, :, t] = np.where(low, 0.0, np.where(high, 10.0, mult))
            free[:, :, t] = np.where(low | high, 0.0, 1.0)
            a = lc.dt / tau_eff
            vth = lc.v_th + th_off
            a_hist[:, :, t] = a
            vth_hist[:, :, t] = vth
        else:
            a = a_lif
            vth = lc.v_th
        u_t = v * (1.0 - a) + a * (lc.v_rest + lc.r * i_t)
        x = u_t - vth
        s_t = _soft_spike(x, lc.width) if smooth else (x >= 0.0).astype(np.float64)
        v = u_t + s_t * (lc.v_reset - u_t)
        u[:, :, t] = u_t
        s[:, :, t] = s_t
        if lc.is_meta:
            th_off = th_off + lc.th_jump * s_t
            i_avg = i_avg + (lc.dt / lc.tau_adapt) * (i_t - i_avg)
    return {
        "u": u,
        "s": s,
        "a": a_hist,
        "vth": vth_hist,
        "tau_mult": tau_mult,
        "free": free,
        "cur": cur,
    }


def _backward_layer(store, pre, w, lc: _LayerCfg, smooth: bool, ds_ext, dv_ext):
    """Backward through one unrolled layer.

    Returns (dw, db, dpre, dvth, dtau): gradients for the weights, biases,
    upstream spikes, and the layer's scalar threshold and time constant.
    """
    u, s = store["u"], store["s"]
    batch, n, n_bins = u.shape
    if lc.is_meta:
        a_all, vth_all = store["a"], store["vth"]
        tau_mult, free = store["tau_mult"], store["free"]
        c_adapt = lc.dt / lc.tau_adapt
    else:
        a_scalar = lc.dt / lc.tau
    dI = np.empty_like(u)
    dv_carry = np.zeros((batch, n))
    dth_carry = np.zeros((batch, n))  # adjoint of th_offset[t] (meta)
    dia_carry = np.zeros((batch, n))  # adjoint of i_avg[t] (meta)
    dvth = 0.0
    dtau = 0.0
    scale = 1.0 / lc.width if smooth else 1.0
    for t in range(n_bins - 1, -1, -1):
        a = a_all[:, :, t] if lc.is_meta else a_scalar
        vth = vth_all[:, :, t] if lc.is_meta else lc.v_th
        u_t = u[:, :, t]
        s_t = s[:, :, t]
        g = _triangle(u_t - vth, lc.width) * scale
        dv = dv_carry
        if dv_ext is not None:
            dv = dv + dv_ext[:, :, t]
        ds_tot = ds_ext[:, :, t] + dv * (lc.v_reset - u_t)
        if lc.is_meta:
            # th_offset[t] = th_pre[t] + th_jump * s[t]
            ds_tot = ds_tot + lc.th_jump * dth_carry
        du = dv * (1.0 - s_t) + ds_tot * g
        dv_carry = du * (1.0 - a)
        dI[:, :, t] = du * (a * lc.r)
        v_prev = (
            u[:, :, t - 1] + s[:, :, t - 1] * (lc.v_reset - u[:, :, t - 1])
            if t > 0
            else lc.v_rest
        )
        da = du * (u_t - v_prev) / a
        dvth_eff = -ds_tot * g
        dvth += float(np.sum(dvth_eff))
        if lc.is_meta:
            dtau_eff = da * (-(a * a) / lc.dt)  # d a / d tau_eff = -dt / tau_eff^2
            dtau += float(np.sum(dtau_eff * tau_mult[:, :, t]))
            # vth_eff[t] = v_th + th_pre[t];  th_pre[t] = decay * th_offset[t-1]
            dth_pre = dvth_eff + dth_carry
            dth_carry = dth_pre * lc.adapt_decay
            # tau_eff[t] reads i_avg[t-1]; i_avg[t] = (1-c) i_avg[t-1] + c I[t]
            dI[:, :, t] += dia_carry * c_adapt
            dia_carry = dia_carry * (1.0 - c_adapt) + dtau_eff * (
                lc.tau * lc.gain
            ) * free[:, :, t]
        else:
            dtau += float(np.sum(da)) * (-lc.dt / lc.tau**2)
    dw = np.tensordot(dI, pre, axes=([0, 2], [0, 2]))
    db = dI.sum(axis=(0, 2))
    dpre = np.einsum("bit,ij->bjt", dI, w)
    return dw, db, dpre, dvth, dtau


def _loss_and_dlogits(logits: np.ndarray, labels: np.ndarray):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=1, keepdims=True)
    batch = logits.shape[0]
    loss = float(-np.mean(np.log(p[np.arange(batch), labels] + 1e-300)))
    onehot = np.zeros_like(p)
    onehot[np.arange(batch), labels] = 1.0
    return loss, (p - onehot) / batch


def bp_loss_and_grads(
    model: NetworkModel,
    inputs: np.ndarray,
    labels: np.ndarray,
    cfg: BpConfig,
    smooth: bool = False,
):
    """Loss plus analytic gradients for one batch.

    Returns (loss, grads) with grads keyed by w_xh, w_hz, b_h, b_z, vth_h,
    vth_z, tau_h, tau_z.  With ``smooth=True`` the whole forward is the
    differentiable surrogate-smoothed network, suitable for
    finite-difference verification.
    """
    if inputs.ndim != 3 or inputs.shape[1] != model.n or inputs.shape[2] != model.grid.n_bins:
        raise GridMismatchError(f"inputs shape {inputs.shape} does not match the model")
    dt = model.grid.dt_ms
    lc_h = _LayerCfg(model.params_h, dt, cfg.surrogate_width)
    lc_z = _LayerCfg(model.params_z, dt, cfg.surrogate_width)
    pre = inputs.astype(np.float64)
    st_h = _unroll_layer(pre, model.w_xh, model.b_h, lc_h, smooth)
    s_h = st_h["s"]
    if model.delay_one_bin:
        s_h_in = np.zeros_like(s_h)
        s_h_in[:, :, 1:] = s_h[:, :, :-1]
    else:
        s_h_in = s_h
    st_z = _unroll_layer(s_h_in, model.w_hz, model.b_z, lc_z, smooth)

    batch, n, n_bins = st_z["u"].shape
    u_z, s_z = st_z["u"], st_z["s"]
    v_post = u_z + s_z * (lc_z.v_reset - u_z)
    groups = (np.arange(n) * cfg.n_classes) // n
    gmat = np.zeros((cfg.n_classes, n))
    gmat[groups, np.arange(n)] = 1.0
    gmat /= gmat.sum(axis=1, keepdims=True) * n_bins
    logits = cfg.logit_gain * np.einsum("cn,bnt->bc", gmat, v_post)
    loss, dlogits = _loss_and_dlogits(logits, labels)
    if not math.isfinite(loss):
        raise NonfiniteLossError(f"loss diverged: {loss}")

    # dL/dv_post, spread uniformly over bins and group members
    dv_ext_z = cfg.logit_gain * np.einsum("bc,cn->bn", dlogits, gmat)[:, :, None]
    dv_ext_z = np.broadcast_to(dv_ext_z, (batch, n, n_bins)).copy()
    ds_zero = np.zeros((batch, n, n_bins))
    dw_hz, db_z, dpre_z, dvth_z, dtau_z = _backward_layer(
        st_z, s_h_in, model.w_hz, lc_z, smooth, ds_zero, dv_ext_z
    )
    if model.delay_one_bin:
        ds_h = np.zeros_like(dpre_z)
        ds_h[:, :, :-1] = dpre_z[:, :, 1:]
    else:
        ds_h = dpre_z
    dw_xh, db_h, _, dvth_h, dtau_h = _backward_layer(
        st_h, pre, model.w_xh, lc_h, smooth, ds_h, None
    )
    grads = {
        "w_xh": dw_xh,
        "w_hz": dw_hz,
        "b_h": db_h,
        "b_z": db_z,
        "vth_h": dvth_h,
        "vth_z": dvth_z,
        "tau_h": dtau_h,
        "tau_z": dtau_z,
    }
    return loss, grads


def _update_params(params: LifParams | MetaParams, vth: float, tau: float):
    if isinstance(params, MetaParams):
        return replace(params, base=replace(params.base, v_th=vth, tau_m_ms=tau))
    return replace(params, v_th=vth, tau_m_ms=tau)


def bp_train(
    model: NetworkModel,
    inputs: np.ndarray,
    labels: np.ndarray,
    cfg: BpConfig,
    rng: np.random.Generator,
) -> tuple[NetworkModel, list[float]]:
    """Minibatch gradient descent; returns (trained model, per-epoch losses).

    Epoch losses are the mean over that epoch's minibatch losses.  Raises
    NonfiniteLossError if the loss diverges.
    """
    work = model
    n_samples = inputs.shape[0]
    losses: list[float] = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n_samples)
        epoch_losses = []
        for start in range(0, n_samples, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = bp_loss_and_grads(work, inputs[idx], labels[idx], cfg)
            epoch_losses.append(loss)
            eta = cfg.eta
            w_xh = work.w_xh - eta * grads["w_xh"]
            w_hz = work.w_hz - eta * grads["w_hz"]
            b_h = work.b_h - eta * grads["b_h"]
            b_z = work.b_z - eta * grads["b_z"]
            work = work.with_weights(w_xh=w_xh, w_hz=w_hz, b_h=b_h, b_z=b_z)
            if cfg.learn_intrinsic:
                new_params = []
                for params, kv, kt in (
                    (work.params_h, grads["vth_h"], grads["tau_h"]),
                    (work.params_z, grads["vth_z"], grads["tau_z"]),
                ):
                    base = params.base if isinstance(params, MetaParams) else params
                    vth = max(base.v_th - eta * kv, base.v_reset + 1e-3)
                    tau = max(base.tau_m_ms - eta * kt, work.grid.dt_ms)
                    new_params.append(_update_params(params, vth, tau))
                work = replace(work, params_h=new_params[0], params_z=new_params[1])
        losses.append(float(np.mean(epoch_losses)))
    return work, losses
