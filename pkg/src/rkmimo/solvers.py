"""Randomized row-action solvers approximating the RZF estimate.

Four selection rules over the same projection step:

* ``nRK``: i.i.d. energy-weighted draws (with replacement), the naive
  baseline.
* ``RK``: energy-weighted draws without replacement; the candidate pool
  refills every K iterations, so each sweep visits every equation once.
* ``GRK``: greedy working-set selection driven by squared residuals, kept
  current through the rank-one Gram recursion (needs the K x K Gram).
* ``RSK``: residual argmax over a fresh uniformly-drawn subset of
  ceil(log2 K) equations per iteration.

Each run pre-draws its uniforms from a seeded Generator, hands them with
the assembled system to the active kernel lane (see `backend`), and wraps
the result with the closed-form FLOP model evaluated at the iterations
actually run plus the instrumented count of inner-product multiplies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend, flops
from .core import make_rng
from .sle import SleSystem, SoftEstimate, ensure_gram

__all__ = [
    "SolverConfig",
    "SolverResult",
    "energy_probabilities",
    "grk_epsilon",
    "grk_working_set",
    "grk_probabilities",
    "run_nrk",
    "run_rk_swor",
    "run_grk",
    "run_rsk",
    "run_scheme",
    "run_snapshots",
]

# GRK stops once the residual sum of squares falls this far below ||b||^2.
GRK_RSS_FLOOR = 1e-24

_SCHEME_LOOPS = {"nRK": "nrk", "RK": "rk", "GRK": "grk", "RSK": "rsk"}


@dataclass(frozen=True)
class SolverConfig:
    """One solver run: scheme name, iteration budget, subset size, seed.

    `omega` matters only for RSK and defaults to ceil(log2 K).  `seed`
    feeds the selection stream unless the caller passes an explicit
    Generator.
    """

    scheme: str
    iterations: int
    omega: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in _SCHEME_LOOPS:
            raise ValueError(
                f"unknown scheme {self.scheme!r}, expected one of {tuple(_SCHEME_LOOPS)}"
            )
        if self.iterations < 0:
            raise ValueError(f"iteration budget must be non-negative, got {self.iterations}")


@dataclass(frozen=True)
class SolverResult:
    """Estimate plus run accounting.

    `flops_model` evaluates the closed-form count at the iterations actually
    run.  `flops_effective` counts complex multiplies executed inside
    channel-column inner products (assembly, Gram and per-iteration
    residuals); `flops_effective_dense` is the same count with every column
    at full length M, so the two coincide on dense channels.
    """

    estimate: SoftEstimate
    iterations_run: int
    selection_trace: np.ndarray = field(repr=False)
    flops_model: int
    flops_effective: int
    flops_effective_dense: int


def energy_probabilities(sle: SleSystem) -> np.ndarray:
    """Row-energy sampling distribution p_k = e_k / sum_j e_j."""
    return sle.energies / sle.f_total


def grk_epsilon(residuals: np.ndarray, sle: SleSystem) -> float:
    """Greedy threshold: mean of the peak normalized residual share and 1/F."""
    sar = residuals.real**2 + residuals.imag**2
    rss = float(np.cumsum(sar)[-1])
    if rss <= 0.0:
        raise ValueError("residuals are all zero, the working set is undefined")
    maxratio = float(np.max(sar / sle.energies))
    return 0.5 * (maxratio / rss + 1.0 / sle.f_total)


def grk_working_set(
    residuals: np.ndarray, sle: SleSystem, epsilon: float | None = None
) -> np.ndarray:
    """Indices with sar_k >= eps rss e_k; always contains the normalized argmax."""
    sar = residuals.real**2 + residuals.imag**2
    rss = float(np.cumsum(sar)[-1])
    if epsilon is None:
        epsilon = grk_epsilon(residuals, sle)
    mask = sar >= (epsilon * rss) * sle.energies
    mask[int(np.argmax(sar / sle.energies))] = True
    return np.nonzero(mask)[0].astype(np.int64)


def grk_probabilities(residuals: np.ndarray, working_set: np.ndarray) -> np.ndarray:
    """Residual-mass distribution over the working set, in set order."""
    sar = residuals.real**2 + residuals.imag**2
    mass = sar[working_set]
    total = float(np.cumsum(mass)[-1])
    if total <= 0.0:
        raise ValueError("working set carries no residual mass")
    return mass / total


def _flatten_supports(sle: SleSystem, use_sparse: bool | None):
    if use_sparse is None:
        use_sparse = sle.supports is not None
    if use_sparse and sle.supports is None:
        raise ValueError("sparse path requested but the system has no column supports")
    k_users = sle.k_users
    if not use_sparse:
        return False, np.empty(0, np.int64), np.zeros(k_users + 1, np.int64)
    ptr = np.zeros(k_users + 1, np.int64)
    for k, sup in enumerate(sle.supports):
        ptr[k + 1] = ptr[k] + sup.size
    idx = np.concatenate(sle.supports).astype(np.int64) if k_users else np.empty(0, np.int64)
    return True, idx, ptr


def run_snapshots(
    sle: SleSystem,
    config: SolverConfig,
    snapshot_iterations,
    rng: np.random.Generator | None = None,
    use_sparse: bool | None = None,
) -> list[SolverResult]:
    """Run one trajectory, reporting the estimate at several budgets.

    `snapshot_iterations` must be non-decreasing; the largest entry is the
    budget actually run.  Because selection streams are pre-drawn, the
    snapshot at T equals a standalone run with budget T and the same seed,
    which is what makes convergence grids cheap.
    """
    snaps = np.asarray(sorted(snapshot_iterations), dtype=np.int64)
    if snaps.size == 0:
        raise ValueError("at least one snapshot iteration count is required")
    if snaps[0] < 0:
        raise ValueError("snapshot iteration counts must be non-negative")
    if rng is None:
        rng = make_rng(config.seed)
    t_max = int(snaps[-1])
    k_users = sle.k_users
    m_ant = sle.m_antennas
    sparse, sup_idx, sup_ptr = _flatten_supports(sle, use_sparse)
    kern = backend.kernels()
    scheme = config.scheme
    omega = None

    if scheme == "nRK":
        p_cum = np.cumsum(energy_probabilities(sle))
        uni = rng.random(t_max)
        out = kern.nrk_loop(
            sle.h, sle.b, sle.energies, p_cum, sle.xi, uni, snaps, sup_idx, sup_ptr, sparse
        )
        per_iter_dense = m_ant
    elif scheme == "RK":
        p = energy_probabilities(sle)
        uni = rng.random(t_max)
        out = kern.rk_loop(
            sle.h, sle.b, sle.energies, p, sle.xi, uni, snaps, sup_idx, sup_ptr, sparse
        )
        per_iter_dense = m_ant
    elif scheme == "GRK":
        gram = ensure_gram(sle)
        bnorm2 = float(np.cumsum(sle.b.real**2 + sle.b.imag**2)[-1])
        uni = rng.random(t_max)
        out = kern.grk_loop(
            sle.h,
            gram,
            sle.b,
            sle.energies,
            sle.f_total,
            sle.xi,
            GRK_RSS_FLOOR * bnorm2,
            uni,
            snaps,
            sup_idx,
            sup_ptr,
            sparse,
        )
        per_iter_dense = 0
    else:  # RSK
        omega = config.omega if config.omega is not None else flops.default_omega(k_users)
        if not 1 <= omega <= k_users:
            raise ValueError(f"subset size must lie in [1, {k_users}], got {omega}")
        uni = rng.random(t_max * omega)
        out = kern.rsk_loop(
            sle.h,
            sle.b,
            sle.energies,
            sle.f_total,
            sle.xi,
            omega,
            uni,
            snaps,
            sup_idx,
            sup_ptr,
            sparse,
        )
        per_iter_dense = omega * m_ant

    v_snaps, trace, mult_snaps, iters_run = out
    iters_run = int(iters_run)

    base_eff = sle.inner_mults
    base_dense = sle.inner_mults_dense
    if scheme == "GRK":
        base_eff += sle.gram_mults
        base_dense += sle.gram_mults_dense

    results = []
    for row, t_snap in enumerate(snaps):
        t_at = min(int(t_snap), iters_run)
        results.append(
            SolverResult(
                estimate=SoftEstimate(values=v_snaps[row].copy(), scheme=scheme),
                iterations_run=t_at,
                selection_trace=trace[:t_at].copy(),
                flops_model=flops.flops_count(scheme, m_ant, k_users, t_at, omega),
                flops_effective=base_eff + int(mult_snaps[row]),
                flops_effective_dense=base_dense + per_iter_dense * t_at,
            )
        )
    return results


def _run_single(sle, config, rng, use_sparse) -> SolverResult:
    return run_snapshots(sle, config, [config.iterations], rng, use_sparse)[-1]


def run_nrk(sle, config, rng=None, use_sparse=None) -> SolverResult:
    if config.scheme != "nRK":
        raise ValueError(f"config is for scheme {config.scheme!r}")
    return _run_single(sle, config, rng, use_sparse)


def run_rk_swor(sle, config, rng=None, use_sparse=None) -> SolverResult:
    if config.scheme != "RK":
        raise ValueError(f"config is for scheme {config.scheme!r}")
    return _run_single(sle, config, rng, use_sparse)


def run_grk(sle, config, rng=None, use_sparse=None) -> SolverResult:
    if config.scheme != "GRK":
        raise ValueError(f"config is for scheme {config.scheme!r}")
    return _run_single(sle, config, rng, use_sparse)


def run_rsk(sle, config, rng=None, use_sparse=None) -> SolverResult:
    if config.scheme != "RSK":
        raise ValueError(f"config is for scheme {config.scheme!r}")
    return _run_single(sle, config, rng, use_sparse)


def run_scheme(sle, config, rng=None, use_sparse=None) -> SolverResult:
    """Dispatch on config.scheme."""
    return _run_single(sle, config, rng, use_sparse)
