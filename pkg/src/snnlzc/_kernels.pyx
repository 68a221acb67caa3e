# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: LZ76 parsing, single-train layer simulation, STDP
pair accumulation.

A pure-Python twin lives in ``_kernels_py``; the public wrappers in
``kernels.py`` pick whichever is importable.  Both implementations follow the
same arithmetic order so their outputs agree.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def lz76_starts_lengths(const unsigned char[::1] symbols):
    """Exhaustive-history LZ76 parse of a binary {0,1} symbol array.

    Returns (starts, lengths) int64 arrays tiling [0, n).  A component is the
    shortest prefix of the remaining suffix that does not occur starting at
    any earlier position (overlap with the component itself allowed); the
    final, possibly reproducible, tail counts as one component.

    Implemented with an online suffix automaton over the whole sequence.  For
    each automaton state we record the end position of the first occurrence
    of its substrings; the candidate s[m:m+k] is reproducible iff that first
    end position is <= m+k-2, i.e. iff it occurs starting before m.
    """
    cdef Py_ssize_t n = symbols.shape[0]
    if n == 0:
        raise ValueError("empty sequence")

    cdef Py_ssize_t cap = 2 * n + 5
    cdef cnp.ndarray[cnp.int64_t, ndim=2] nxt_arr = np.full((cap, 2), -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] link_arr = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] len_arr = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] minend_arr = np.empty(cap, dtype=np.int64)
    cdef long long[:, ::1] nxt = nxt_arr
    cdef long long[::1] link = link_arr
    cdef long long[::1] slen = len_arr
    cdef long long[::1] minend = minend_arr

    cdef Py_ssize_t size = 1, last = 0
    link[0] = -1
    slen[0] = 0
    minend[0] = -1

    cdef Py_ssize_t pos, cur, p, q, clone
    cdef int c
    for pos in range(n):
        c = symbols[pos]
        cur = size
        size += 1
        slen[cur] = slen[last] + 1
        minend[cur] = pos
        link[cur] = -1
        p = last
        while p != -1 and nxt[p][c] == -1:
            nxt[p][c] = cur
            p = link[p]
        if p == -1:
            link[cur] = 0
        else:
            q = nxt[p][c]
            if slen[p] + 1 == slen[q]:
                link[cur] = q
            else:
                clone = size
                size += 1
                slen[clone] = slen[p] + 1
                nxt[clone][0] = nxt[q][0]
                nxt[clone][1] = nxt[q][1]
                link[clone] = link[q]
                minend[clone] = minend[q]
                while p != -1 and nxt[p][c] == q:
                    nxt[p][c] = clone
                    p = link[p]
                link[q] = clone
                link[cur] = clone
        last = cur

    starts = []
    lengths = []
    cdef Py_ssize_t m = 0, k, state
    while m < n:
        state = 0
        k = 0
        while True:
            if m + k >= n:
                break
            state = nxt[state][symbols[m + k]]
            k += 1
            if minend[state] > m + k - 2:
                break
        starts.append(m)
        lengths.append(k)
        m += k
    return (np.asarray(starts, dtype=np.int64), np.asarray(lengths, dtype=np.int64))


def simulate_layer(const unsigned char[:, ::1] pre_spikes,
                   const double[:, ::1] w,
                   const double[::1] b,
                   double dt_ms,
                   double tau_m, double r_m, double v_th,
                   double v_reset, double v_rest,
                   bint is_meta, double th_jump, double tau_adapt,
                   double tau_mod_gain, double adapt_decay,
                   bint record_v):
    """Simulate one neuron layer over all bins for a single sample.

    ``pre_spikes`` is (n_pre, T) binary input; ``w`` is (n_post, n_pre).
    Returns (spikes uint8 (n_post, T), v_hist (n_post, T) or None).

    Per bin: threshold-offset decay (meta), membrane Euler update with the
    effective parameters, spike test (>=), reset, spike-triggered threshold
    jump, running input-average update.  ``adapt_decay`` is the precomputed
    per-bin decay factor exp(-dt/tau_adapt), shared with the Python twin so
    both backends use the identical constant.
    """
    cdef Py_ssize_t n_pre = pre_spikes.shape[0]
    cdef Py_ssize_t T = pre_spikes.shape[1]
    cdef Py_ssize_t n_post = w.shape[0]

    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out_arr = np.zeros((n_post, T), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vh_arr
    cdef double[:, ::1] vh = None
    if record_v:
        vh_arr = np.empty((n_post, T), dtype=np.float64)
        vh = vh_arr

    cdef cnp.ndarray[cnp.float64_t, ndim=1] cur_arr = np.empty(n_post, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v_arr = np.full(n_post, v_rest, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] th_arr = np.zeros(n_post, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ia_arr = np.zeros(n_post, dtype=np.float64)
    cdef double[::1] cur = cur_arr
    cdef double[::1] v = v_arr
    cdef double[::1] th_off = th_arr
    cdef double[::1] i_avg = ia_arr

    cdef double tau_lo = dt_ms
    cdef double tau_hi = 10.0 * tau_m
    cdef double tau_eff, vth_eff, a
    cdef Py_ssize_t t, i, j
    for t in range(T):
        for j in range(n_post):
            cur[j] = b[j]
        for i in range(n_pre):
            if pre_spikes[i][t]:
                for j in range(n_post):
                    cur[j] += w[j][i]
        for j in range(n_post):
            if is_meta:
                th_off[j] = th_off[j] * adapt_decay
                tau_eff = tau_m * (1.0 + tau_mod_gain * i_avg[j])
                if tau_eff < tau_lo:
                    tau_eff = tau_lo
                elif tau_eff > tau_hi:
                    tau_eff = tau_hi
                vth_eff = v_th + th_off[j]
            else:
                tau_eff = tau_m
                vth_eff = v_th
            a = dt_ms / tau_eff
            v[j] = v[j] + a * (-(v[j] - v_rest) + r_m * cur[j])
            if v[j] >= vth_eff:
                out[j][t] = 1
                v[j] = v_reset
                if is_meta:
                    th_off[j] = th_off[j] + th_jump
            if record_v:
                vh[j][t] = v[j]
            if is_meta:
                i_avg[j] = i_avg[j] + (dt_ms / tau_adapt) * (cur[j] - i_avg[j])
    return out_arr, (vh_arr if record_v else None)


def stdp_accumulate(const unsigned char[:, ::1] pre_spikes,
                    const unsigned char[:, ::1] post_spikes,
                    const double[::1] plus_table,
                    const double[::1] minus_table,
                    double[:, ::1] dw):
    """Accumulate nearest-neighbor STDP weight changes into ``dw``.

    ``plus_table[k]`` / ``minus_table[k]`` hold A+ * exp(-k*dt/tau+) and
    A- * exp(-k*dt/tau-) for a lag of k bins; precomputing them in Python
    keeps the two backends bit-for-bit consistent.  Each post spike pairs
    with the most recent earlier pre spike (potentiation), each pre spike
    with the most recent earlier post spike (depression); same-bin
    coincidences contribute nothing.
    """
    cdef Py_ssize_t n_pre = pre_spikes.shape[0]
    cdef Py_ssize_t n_post = post_spikes.shape[0]
    cdef Py_ssize_t T = pre_spikes.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lp_arr = np.full(n_pre, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lq_arr = np.full(n_post, -1, dtype=np.int64)
    cdef long long[::1] last_pre = lp_arr
    cdef long long[::1] last_post = lq_arr
    cdef Py_ssize_t t, i, j
    for t in range(T):
        for j in range(n_post):
            if post_spikes[j][t]:
                for i in range(n_pre):
                    if last_pre[i] >= 0:
                        dw[j][i] += plus_table[t - last_pre[i]]
        for i in range(n_pre):
            if pre_spikes[i][t]:
                for j in range(n_post):
                    if last_post[j] >= 0:
                        dw[j][i] -= minus_table[t - last_post[j]]
        for i in range(n_pre):
            if pre_spikes[i][t]:
                last_pre[i] = t
        for j in range(n_post):
            if post_spikes[j][t]:
                last_post[j] = t
