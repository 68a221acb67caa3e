"""Pure-Python twin of the compiled kernels in ``_kernels.pyx``.

Used when the extension is unavailable (or when SNNLZC_BACKEND=python).
The arithmetic follows the compiled version operation-for-operation so both
backends produce identical spike trains and weight updates.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def lz76_starts_lengths(symbols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exhaustive-history LZ76 parse; returns (starts, lengths) tiling [0, n).

    Direct scan: the current component is extended while the candidate
    occurs in the prefix ending one symbol before the candidate's last
    symbol; the final tail counts as one component even if reproducible.
    """
    s = np.asarray(symbols, dtype=np.uint8).tobytes()
    n = len(s)
    if n == 0:
        raise ValueError("empty sequence")
    starts: list[int] = []
    lengths: list[int] = []
    m = 0
    while m < n:
        k = 1
        while m + k < n and s[m : m + k] in s[: m + k - 1]:
            k += 1
        starts.append(m)
        lengths.append(k)
        m += k
    return (np.asarray(starts, dtype=np.int64), np.asarray(lengths, dtype=np.int64))


def simulate_layer(
    pre_spikes: np.ndarray,
    w: np.ndarray,
    b: np.ndarray,
    dt_ms: float,
    tau_m: float,
    r_m: float,
    v_th: float,
    v_reset: float,
    v_rest: float,
    is_meta: bool,
    th_jump: float,
    tau_adapt: float,
    tau_mod_gain: float,
    adapt_decay: float,
    record_v: bool,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Single-sample layer simulation; see the compiled twin for semantics."""
    n_pre, T = pre_spikes.shape
    n_post = w.shape[0]
    out = np.zeros((n_post, T), dtype=np.uint8)
    vh = np.empty((n_post, T), dtype=np.float64) if record_v else None
    v = np.full(n_post, v_rest, dtype=np.float64)
    th_off = np.zeros(n_post, dtype=np.float64)
    i_avg = np.zeros(n_post, dtype=np.float64)
    tau_lo, tau_hi = dt_ms, 10.0 * tau_m
    for t in range(T):
        cur = b.astype(np.float64).copy()
        for i in np.flatnonzero(pre_spikes[:, t]):
            cur += w[:, i]
        if is_meta:
            th_off *= adapt_decay
            tau_eff = np.clip(tau_m * (1.0 + tau_mod_gain * i_avg), tau_lo, tau_hi)
            vth_eff = v_th + th_off
        else:
            tau_eff = tau_m
            vth_eff = v_th
        a = dt_ms / tau_eff
        v = v + a * (-(v - v_rest) + r_m * cur)
        spiked = v >= vth_eff
        out[spiked, t] = 1
        v[spiked] = v_reset
        if is_meta:
            th_off[spiked] += th_jump
        if record_v:
            vh[:, t] = v
        if is_meta:
            i_avg = i_avg + (dt_ms / tau_adapt) * (cur - i_avg)
    return out, vh


def stdp_accumulate(
    pre_spikes: np.ndarray,
    post_spikes: np.ndarray,
    plus_table: np.ndarray,
    minus_table: np.ndarray,
    dw: np.ndarray,
) -> None:
    """Nearest-neighbor STDP pair accumulation; see the compiled twin."""
    n_pre, T = pre_spikes.shape
    last_pre = np.full(n_pre, -1, dtype=np.int64)
    last_post = np.full(post_spikes.shape[0], -1, dtype=np.int64)
    for t in range(T):
        posts = np.flatnonzero(post_spikes[:, t])
        pres = np.flatnonzero(pre_spikes[:, t])
        if posts.size:
            valid = last_pre >= 0
            if valid.any():
                contrib = plus_table[t - last_pre[valid]]
                for j in posts:
                    dw[j, valid] += contrib
        if pres.size:
            for j in np.flatnonzero(last_post >= 0):
                dw[j, pres] -= minus_table[t - last_post[j]]
        last_pre[pres] = t
        last_post[posts] = t
