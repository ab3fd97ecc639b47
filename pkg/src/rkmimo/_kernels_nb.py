"""Compiled solver iteration loops.

Each loop runs a full solver trajectory and records the per-user estimate
`v` at the requested snapshot iteration counts, so a whole convergence grid
costs one trajectory.  Randomness arrives as a pre-drawn array of uniforms:
one double per iteration for the single-draw schemes, `omega` doubles per
iteration for the subset scheme.  Keeping the draws outside the kernels
makes both lanes consume identical streams and keeps compilation cacheable.

Shared conventions (mirrored exactly by `_kernels_np`):

* Equation selection walks the cumulative mass in ascending index order and
  picks the first index whose running sum strictly exceeds
  ``uniform * total``; a roundoff overrun falls back to the last index whose
  mass is positive.
* Step sizes divide componentwise (`_scale_by_energy`), and the greedy
  scheme's residual recursion uses only unfused mul/add/sub, so its whole
  trajectory is bit-identical across lanes.  The other schemes recompute
  residuals through inner products whose summation order differs between
  lanes; their selections still agree wherever residual gaps sit above
  rounding noise (always, for the two energy-weighted schemes, whose
  selection ignores the iterate).
* Sparse columns are described by concatenated row indices `sup_idx` with
  offsets `sup_ptr`; `use_sparse` switches the inner products and updates
  between the support and the full antenna range.
* `mult_snaps` counts complex multiplies spent on channel-column inner
  products up to each snapshot (the effective-cost instrumentation).
* `trace` holds the selected equation per iteration, -1 past an early exit.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        return wrap


_OPTS = {"cache": True, "nogil": True}


@njit(**_OPTS)
def _bisect_right(arr, x):
    """First index with arr[i] > x; arr ascending."""
    lo = 0
    hi = arr.shape[0]
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] > x:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(**_OPTS)
def _scale_by_energy(r_i, e_i):
    # componentwise, not complex division: both lanes then round identically
    return complex(r_i.real / e_i, r_i.imag / e_i)


@njit(**_OPTS)
def _residual_at(h, b, u, v, xi, col, sup_idx, sup_ptr, use_sparse):
    acc = 0.0 + 0.0j
    if use_sparse:
        for p in range(sup_ptr[col], sup_ptr[col + 1]):
            m = sup_idx[p]
            acc += np.conj(h[m, col]) * u[m]
    else:
        for m in range(h.shape[0]):
            acc += np.conj(h[m, col]) * u[m]
    return b[col] - acc - xi * v[col]


@njit(**_OPTS)
def _apply_step(h, u, v, gamma, col, sup_idx, sup_ptr, use_sparse):
    if use_sparse:
        for p in range(sup_ptr[col], sup_ptr[col + 1]):
            m = sup_idx[p]
            u[m] += gamma * h[m, col]
    else:
        for m in range(h.shape[0]):
            u[m] += gamma * h[m, col]
    v[col] += gamma


@njit(**_OPTS)
def nrk_loop(h, b, e, p_cum, xi, uni, snaps, sup_idx, sup_ptr, use_sparse):
    """Independent draws from the fixed energy distribution (with replacement)."""
    m_ant, k_users = h.shape
    n_snaps = snaps.shape[0]
    t_max = snaps[n_snaps - 1]
    u = np.zeros(m_ant, np.complex128)
    v = np.zeros(k_users, np.complex128)
    v_snaps = np.zeros((n_snaps, k_users), np.complex128)
    mult_snaps = np.zeros(n_snaps, np.int64)
    trace = np.full(t_max, -1, np.int64)
    mults = 0
    s = 0
    while s < n_snaps and snaps[s] <= 0:
        s += 1
    total = p_cum[k_users - 1]
    for t in range(t_max):
        target = uni[t] * total
        i = _bisect_right(p_cum, target)
        if i >= k_users:
            i = k_users - 1
            while i > 0 and p_cum[i] == p_cum[i - 1]:
                i -= 1
        r_i = _residual_at(h, b, u, v, xi, i, sup_idx, sup_ptr, use_sparse)
        mults += (sup_ptr[i + 1] - sup_ptr[i]) if use_sparse else m_ant
        gamma = _scale_by_energy(r_i, e[i])
        _apply_step(h, u, v, gamma, i, sup_idx, sup_ptr, use_sparse)
        trace[t] = i
        while s < n_snaps and snaps[s] == t + 1:
            v_snaps[s] = v
            mult_snaps[s] = mults
            s += 1
    return v_snaps, trace, mult_snaps, t_max


@njit(**_OPTS)
def rk_loop(h, b, e, p, xi, uni, snaps, sup_idx, sup_ptr, use_sparse):
    """Energy draws without replacement; the pool refills every K iterations."""
    m_ant, k_users = h.shape
    n_snaps = snaps.shape[0]
    t_max = snaps[n_snaps - 1]
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
        total = 0.0
        for k in range(k_users):
            if active[k]:
                total += p[k]
        target = uni[t] * total
        acc = 0.0
        i = -1
        last = -1
        for k in range(k_users):
            if active[k]:
                last = k
                acc += p[k]
                if acc > target:
                    i = k
                    break
        if i < 0:
            i = last
        r_i = _residual_at(h, b, u, v, xi, i, sup_idx, sup_ptr, use_sparse)
        mults += (sup_ptr[i + 1] - sup_ptr[i]) if use_sparse else m_ant
        gamma = _scale_by_energy(r_i, e[i])
        _apply_step(h, u, v, gamma, i, sup_idx, sup_ptr, use_sparse)
        active[i] = False
        n_active -= 1
        if n_active == 0:
            for k in range(k_users):
                active[k] = True
            n_active = k_users
        trace[t] = i
        while s < n_snaps and snaps[s] == t + 1:
            v_snaps[s] = v
            mult_snaps[s] = mults
            s += 1
    return v_snaps, trace, mult_snaps, t_max


@njit(**_OPTS)
def grk_loop(h, gram, b, e, f_total, xi, rss_floor, uni, snaps, sup_idx, sup_ptr, use_sparse):
    """Greedy working-set selection with the rank-one residual recursion.

    Selection draws from residual mass restricted to the working set
    ``{k : sar_k >= eps rss e_k}``; the normalized-residual argmax is a
    member by construction and is forced in to make that robust to
    last-ulp rounding of the threshold.
    """
    m_ant, k_users = h.shape
    n_snaps = snaps.shape[0]
    t_max = snaps[n_snaps - 1]
    u = np.zeros(m_ant, np.complex128)
    v = np.zeros(k_users, np.complex128)
    v_snaps = np.zeros((n_snaps, k_users), np.complex128)
    mult_snaps = np.zeros(n_snaps, np.int64)
    trace = np.full(t_max, -1, np.int64)
    s = 0
    while s < n_snaps and snaps[s] <= 0:
        s += 1
    r = b.copy()
    sar = np.empty(k_users, np.float64)
    rss = 0.0
    for k in range(k_users):
        sar[k] = r[k].real * r[k].real + r[k].imag * r[k].imag
        rss += sar[k]
    iters = 0
    for t in range(t_max):
        if rss <= rss_floor:
            break
        maxratio = -1.0
        jmax = 0
        for k in range(k_users):
            ratio = sar[k] / e[k]
            if ratio > maxratio:
                maxratio = ratio
                jmax = k
        eps = 0.5 * (maxratio / rss + 1.0 / f_total)
        thr = eps * rss
        mass = 0.0
        for k in range(k_users):
            if sar[k] >= thr * e[k] or k == jmax:
                mass += sar[k]
        target = uni[t] * mass
        acc = 0.0
        i = -1
        last = -1
        for k in range(k_users):
            if sar[k] >= thr * e[k] or k == jmax:
                last = k
                acc += sar[k]
                if acc > target:
                    i = k
                    break
        if i < 0:
            i = last
        gamma = _scale_by_energy(r[i], e[i])
        _apply_step(h, u, v, gamma, i, sup_idx, sup_ptr, use_sparse)
        rss = 0.0
        for k in range(k_users):
            r[k] = r[k] - gamma * gram[k, i]
            sar[k] = r[k].real * r[k].real + r[k].imag * r[k].imag
            rss += sar[k]
        trace[t] = i
        iters = t + 1
        while s < n_snaps and snaps[s] == t + 1:
            v_snaps[s] = v
            s += 1
    while s < n_snaps:
        v_snaps[s] = v
        s += 1
    return v_snaps, trace, mult_snaps, iters


@njit(**_OPTS)
def rsk_loop(h, b, e, f_total, xi, omega, uni, snaps, sup_idx, sup_ptr, use_sparse):
    """Residual argmax over a fresh uniform without-replacement subset.

    The subset comes from a partial Fisher-Yates shuffle driven by
    ``floor(uniform * remaining)`` and is scanned in ascending equation
    order so residual-ratio ties resolve to the lowest index.
    """
    m_ant, k_users = h.shape
    n_snaps = snaps.shape[0]
    t_max = snaps[n_snaps - 1]
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
    subset = np.empty(omega, np.int64)
    for t in range(t_max):
        for k in range(k_users):
            pool[k] = k
        for j in range(omega):
            rem = k_users - j
            step = int(uni[t * omega + j] * rem)
            if step >= rem:
                step = rem - 1
            swap = j + step
            tmp = pool[j]
            pool[j] = pool[swap]
            pool[swap] = tmp
            subset[j] = pool[j]
        for a in range(1, omega):  # insertion sort, ascending equation index
            key = subset[a]
            bpos = a - 1
            while bpos >= 0 and subset[bpos] > key:
                subset[bpos + 1] = subset[bpos]
                bpos -= 1
            subset[bpos + 1] = key
        best = -1.0
        ibest = 0
        rbest = 0.0 + 0.0j
        for a in range(omega):
            k = subset[a]
            r_k = _residual_at(h, b, u, v, xi, k, sup_idx, sup_ptr, use_sparse)
            mults += (sup_ptr[k + 1] - sup_ptr[k]) if use_sparse else m_ant
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
