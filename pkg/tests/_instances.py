"""Shared seeded problem instances for the test modules.

All builders use unit large-scale coefficients and xi = 1 so the assembled
systems are well conditioned and solver convergence depends only on the
selection rule under test, not on pathloss spread.
"""

import numpy as np

import rkmimo as rk


def dense_instance(seed, m=64, k=8, iota=0.0, xi=1.0):
    """Stationary channel, optional antenna correlation, dense columns."""
    rng = rk.make_rng((9000, seed, int(iota * 1000)))
    cov = rk.build_covariance(rk.LargeScale(np.ones((k, m))), iota=iota)
    chan = rk.sample_channel(cov, rng)
    bits = rk.make_rng((9001, seed)).integers(0, 2, 4 * k)
    x = rk.qam_modulate(bits)
    y = chan.h @ x + rk.sample_complex_gaussian(m, rng)
    sle = rk.assemble_sle(chan.h, y, xi)
    return sle, chan, y


def sparse_instance(seed, m=256, k=32, d=8, xi=1.0):
    """Visibility-limited channel with D-antenna regions, sparse columns."""
    rng = rk.make_rng((9100, seed, d))
    mask = rk.build_visibility(m, d, rng, k)
    cov = rk.build_covariance(rk.LargeScale(np.ones((k, m))), visibility=mask)
    chan = rk.sample_channel(cov, rng)
    bits = rk.make_rng((9101, seed)).integers(0, 2, 4 * k)
    x = rk.qam_modulate(bits)
    y = chan.h @ x + rk.sample_complex_gaussian(m, rng)
    sle = rk.assemble_sle(chan.h, y, xi, chan.supports)
    return sle, chan, y


def rel_err(estimate, reference):
    return float(np.linalg.norm(estimate - reference) / np.linalg.norm(reference))
