"""Vectorized fallback lane for the solver iteration loops.

Same signatures, return values and selection semantics as `_kernels_nb`;
see that module for the shared conventions.  Per-iteration work is done
with numpy vector operations, and all cumulative masses are built with
``np.cumsum`` (a strict left-to-right accumulation) so that selection
decisions match the compiled lane's sequential walks.  The greedy scheme
avoids numpy's fused complex multiply and is bit-identical to the compiled
lane; the residual-recomputing schemes use BLAS inner products and agree
with it to rounding accuracy.
"""

from __future__ import annotations

import numpy as np


def _scale_by_energy(r_i, e_i):
    # componentwise, not complex division: both lanes then round identically
    return complex(r_i.real / e_i, r_i.imag / e_i)


def _residual_at(h, b, u, v, xi, col, sup_idx, sup_ptr, use_sparse):
    if use_sparse:
        sup = sup_idx[sup_ptr[col] : sup_ptr[col + 1]]
        dot = np.vdot(h[sup, col], u[sup])
    else:
        dot = np.vdot(h[:, col], u)
    return b[col] - dot - xi * v[col]


def _apply_step(h, u, v, gamma, col, sup_idx, sup_ptr, use_sparse):
    if use_sparse:
        sup = sup_idx[sup_ptr[col] : sup_ptr[col + 1]]
        u[sup] += gamma * h[sup, col]
    else:
        u += gamma * h[:, col]
    v[col] += gamma


def _select(cum, target, fallback):
    i = int(np.searchsorted(cum, target, side="right"))
    return fallback if i >= cum.shape[0] else i


def _last_positive(masses):
    nz = np.nonzero(masses > 0.0)[0]
    return int(nz[-1])


def nrk_loop(h, b, e, p_cum, xi, uni, snaps, sup_idx, sup_ptr, use_sparse):
    m_ant, k_users = h.shape
    n_snaps = snaps.shape[0]
    t_max = int(snaps[-1])
    u = np.zeros(m_ant, np.complex128)
    v = np.zeros(k_users, np.complex128)
    v_snaps = np.zeros((n_snaps, k_users), np.complex128)
    mult_snaps = np.zeros(n_snaps, np.int64)
    trace = np.full(t_max, -1, np.int64)
    mults = 0
    s = 0
    while s < n_snaps and snaps[s] <= 0:
        s += 1
    # the distribution is fixed, so all selections can be made up front
    p_steps = np.diff(p_cum, prepend=0.0)
    fallback = _last_positive(p_steps)
    sel = np.searchsorted(p_cum, uni[:t_max] * p_cum[-1], side="right")
    sel = np.where(sel >= k_users, fallback, sel)
    for t in range(t_max):
        i = int(sel[t])
        r_i = _residual_at(h, b, u, v, xi, i, sup_idx, sup_ptr, use_sparse)
        mults += int(sup_ptr[i + 1] - sup_ptr[i]) if use_sparse else m_ant
        gamma = _scale_by_energy(r_i, e[i])
        _apply_step(h, u, v, gamma, i, sup_idx, sup_ptr, use_sparse)
        trace[t] = i
        while s < n_snaps and snaps[s] == t + 1:
            v_snaps[s] = v
            mult_snaps[s] = mults
            s += 1
    return v_snaps, trace, mult_snaps, t_max


def rk_loop(h, b, e, p, xi, uni, snaps, sup_idx, sup_ptr, use_sparse):
    m_ant, k_users = h.shape
    n_snaps = snaps.shape[0]
    t_max = int(snaps[-1])
    u = np.zeros(m_ant, np.complex128)
    v = np.zeros(k_users, np.complex128)
    v_snaps = np.zeros((n_snaps, k_users), np.complex128)
    mult_snaps = np.zeros(n_snaps, np.int64)
    trace = np.full(t_max, -1, np.int64)
    mults = 0
    s = 0
    while s < n_snaps and snaps[s] <= 0:
        s += 1
    active = np.ones(k_users, np.bool_)
    n_active = k_users
    for t in range(t_max):
        masses = np.where(active, p, 0.0)
        cum = np.cumsum(masses)
        target = uni[t] * cum[-1]
        i = _select(cum, target, _last_positive(masses))
        r_i = _residual_at(h, b, u, v, xi, i, sup_idx, sup_ptr, use_sparse)
        mults += int(sup_ptr[i + 1] - sup_ptr[i]) if use_sparse else m_ant
        gamma = _scale_by_energy(r_i, e[i])
        _apply_step(h, u, v, gamma, i, sup_idx, sup_ptr, use_sparse)
        active[i] = False
        n_active -= 1
        if n_active == 0:
            active[:] = True
            n_active = k_users
        trace[t] = i
        while s < n_snaps and snaps[s] == t + 1:
            v_snaps[s] = v
            mult_snaps[s] = mults
            s += 1
    return v_snaps, trace, mult_snaps, t_max


def grk_loop(h, gram, b, e, f_total, xi, rss_floor, uni, snaps, sup_idx, sup_ptr, use_sparse):
    m_ant, k_users = h.shape
    n_snaps = snaps.shape[0]
    t_max = int(snaps[-1])
    u = np.zeros(m_ant, np.complex128)
    v = np.zeros(k_users, np.complex128)
    v_snaps = np.zeros((n_snaps, k_users), np.complex128)
    mult_snaps = np.zeros(n_snaps, np.int64)
    trace = np.full(t_max, -1, np.int64)
    s = 0
    while s < n_snaps and snaps[s] <= 0:
        s += 1
    # the residual is tracked as separate real/imag arrays so every update is
    # a plain mul/sub ufunc; numpy's fused complex multiply rounds differently
    # from the compiled lane and would break bitwise trajectory equality
    rre = np.ascontiguousarray(b.real)
    rim = np.ascontiguousarray(b.imag)
    sar = rre * rre + rim * rim
    rss = float(np.cumsum(sar)[-1])
    iters = 0
    for t in range(t_max):
        if rss <= rss_floor:
            break
        jmax = int(np.argmax(sar / e))
        eps = 0.5 * (sar[jmax] / e[jmax] / rss + 1.0 / f_total)
        thr = eps * rss
        mask = sar >= thr * e
        mask[jmax] = True
        masses = np.where(mask, sar, 0.0)
        cum = np.cumsum(masses)
        target = uni[t] * cum[-1]
        i = _select(cum, target, _last_positive(masses))
        gamma = complex(rre[i] / e[i], rim[i] / e[i])
        _apply_step(h, u, v, gamma, i, sup_idx, sup_ptr, use_sparse)
        col_re = gram[:, i].real
        col_im = gram[:, i].imag
        rre = rre - (gamma.real * col_re - gamma.imag * col_im)
        rim = rim - (gamma.real * col_im + gamma.imag * col_re)
        sar = rre * rre + rim * rim
        rss = float(np.cumsum(sar)[-1])
        trace[t] = i
        iters = t + 1
        while s < n_snaps and snaps[s] == t + 1:
            v_snaps[s] = v
            s += 1
    while s < n_snaps:
        v_snaps[s] = v
        s += 1
    return v_snaps, trace, mult_snaps, iters


def rsk_loop(h, b, e, f_total, xi, omega, uni, snaps, sup_idx, sup_ptr, use_sparse):
    m_ant, k_users = h.shape
    n_snaps = snaps.shape[0]
    t_max = int(snaps[-1])
    u = np.zeros(m_ant, np.complex128)
    v = np.zeros(k_users, np.complex128)
    v_snaps = np.zeros((n_snaps, k_users), np.complex128)
    mult_snaps = np.zeros(n_snaps, np.int64)
    trace = np.full(t_max, -1, np.int64)
    mults = 0
    s = 0
    while s < n_snaps and snaps[s] <= 0:
        s += 1
    pool = np.empty(k_users, np.int64)
    for t in range(t_max):
        pool[:] = np.arange(k_users)
        for j in range(omega):
            rem = k_users - j
            step = int(uni[t * omega + j] * rem)
            if step >= rem:
                step = rem - 1
            swap = j + step
            pool[j], pool[swap] = pool[swap], pool[j]
        subset = np.sort(pool[:omega])
        best = -1.0
        ibest = 0
        rbest = 0.0 + 0.0j
        for k in subset:
            k = int(k)
            r_k = _residual_at(h, b, u, v, xi, k, sup_idx, sup_ptr, use_sparse)
            mults += int(sup_ptr[k + 1] - sup_ptr[k]) if use_sparse else m_ant
            rr = (r_k.real * r_k.real + r_k.imag * r_k.imag) / f_total
            if rr > best:
                best = rr
                ibest = k
                rbest = r_k
        gamma = _scale_by_energy(rbest, e[ibest])
        _apply_step(h, u, v, gamma, ibest, sup_idx, sup_ptr, use_sparse)
        trace[t] = ibest
        while s < n_snaps and snaps[s] == t + 1:
            v_snaps[s] = v
            mult_snaps[s] = mults
            s += 1
    return v_snaps, trace, mult_snaps, t_max
