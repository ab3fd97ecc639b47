"""Consistent normal-equation system targeted by the iterative detectors.

Regularized zero-forcing solves ``(H^H H + xi I) x = H^H y``.  Rather than
iterating on that square system, the solvers here work on the equivalent
consistent fat system

    [H^H, sqrt(xi) I] [u; sqrt(xi) v] = b,   b = H^H y,

whose minimum-norm solution has ``u = H x`` and ``v = x`` equal to the RZF
estimate.  Row k of the stacked matrix has squared norm
``e_k = ||h_k||^2 + xi``, and one Kaczmarz projection onto it costs a single
inner product with the channel column, which is what keeps per-iteration
complexity at O(M).

The module holds the assembled system (:class:`SleSystem`), the two exact
baselines (matched filter and RZF), the elementary projection step, and
three ways of tracking equation residuals: direct evaluation, the rank-one
recursive update, and a from-scratch expansion over the whole selection
history used as a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import hermitian_dot, solve_hpd

__all__ = [
    "SleSystem",
    "KaczmarzState",
    "SoftEstimate",
    "assemble_sle",
    "ensure_gram",
    "mr_estimate",
    "rzf_exact",
    "kaczmarz_step",
    "residual_direct",
    "residual_recursive_update",
    "residual_expansion_oracle",
]


@dataclass(frozen=True)
class SoftEstimate:
    """Per-user soft symbol estimates produced by a detection scheme."""

    values: np.ndarray
    scheme: str


@dataclass
class SleSystem:
    """Assembled system for one received vector.

    Fields `b`, `energies` and `f_total` are precomputed so that solver runs
    never touch `y` again.  `b_mults` / `e_mults` count the complex
    multiplies actually executed on channel-column inner products while
    assembling the matched filter and the row energies (each is K*M on
    dense channels); the solvers add their own per-iteration counts on top.
    """

    h: np.ndarray  # (M, K), Fortran order
    xi: float
    b: np.ndarray  # (K,) matched filter output H^H y
    energies: np.ndarray  # (K,) row norms ||h_k||^2 + xi
    f_total: float  # sum of energies
    supports: list | None = None  # per-column nonzero rows, None when dense
    b_mults: int = 0
    e_mults: int = 0
    gram: np.ndarray | None = field(default=None, repr=False)
    gram_mults: int = 0
    gram_mults_dense: int = 0

    @property
    def m_antennas(self) -> int:
        return self.h.shape[0]

    @property
    def k_users(self) -> int:
        return self.h.shape[1]

    @property
    def inner_mults(self) -> int:
        return self.b_mults + self.e_mults

    @property
    def inner_mults_dense(self) -> int:
        return 2 * self.k_users * self.m_antennas


def assemble_sle(
    h: np.ndarray,
    y: np.ndarray,
    xi: float,
    supports: list | None = None,
) -> SleSystem:
    """Precompute b = H^H y, row energies and their total for one solve.

    When `supports` is given the matched filter and energies are evaluated
    only over the listed rows of each column, and the executed multiplies
    are recorded for the effective-cost instrumentation.
    """
    h = np.asarray(h, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if h.ndim != 2:
        raise ValueError(f"channel must be a matrix, got shape {h.shape}")
    m, k_users = h.shape
    if y.shape != (m,):
        raise ValueError(f"received vector shape {y.shape} does not match M={m}")
    if not xi > 0.0:
        raise ValueError(f"regularization must be positive, got {xi}")
    if supports is not None and len(supports) != k_users:
        raise ValueError("one support per channel column is required")

    h = np.asfortranarray(h)
    if supports is None:
        b = h.conj().T @ y
        norms = np.einsum("mk,mk->k", h.conj(), h).real
        col_mults = k_users * m
    else:
        b = np.empty(k_users, dtype=np.complex128)
        norms = np.empty(k_users)
        col_mults = 0
        for k, sup in enumerate(supports):
            col = h[sup, k]
            b[k] = np.vdot(col, y[sup])
            norms[k] = np.vdot(col, col).real
            col_mults += sup.size
    energies = norms + xi
    return SleSystem(
        h=h,
        xi=float(xi),
        b=b,
        energies=energies,
        f_total=float(np.cumsum(energies)[-1]),
        supports=supports,
        b_mults=col_mults,
        e_mults=col_mults,
    )


def ensure_gram(sle: SleSystem) -> np.ndarray:
    """Compute and cache R_yy = H^H H + xi I.

    The sparse path evaluates row i over the support of column i only
    (entries with both columns zero there vanish anyway), which is what the
    greedy solver's recursive residual update amortizes its O(K^2 M) setup
    into.
    """
    if sle.gram is not None:
        return sle.gram
    k_users = sle.k_users
    if sle.supports is None:
        gram = sle.h.conj().T @ sle.h
        mults = sle.m_antennas * k_users * (k_users + 1) // 2
    else:
        gram = np.zeros((k_users, k_users), dtype=np.complex128)
        mults = 0
        for i, sup in enumerate(sle.supports):
            row = sle.h[sup, i].conj() @ sle.h[sup, i:]
            gram[i, i:] = row
            gram[i:, i] = row.conj()
            mults += sup.size * (k_users - i)
    gram[np.diag_indices(k_users)] = gram.diagonal().real + sle.xi
    sle.gram = np.asfortranarray(gram)
    sle.gram_mults = mults
    sle.gram_mults_dense = sle.m_antennas * k_users * (k_users + 1) // 2
    return sle.gram


def mr_estimate(sle: SleSystem) -> SoftEstimate:
    """Matched filter (maximum ratio) estimate, a copy of b."""
    return SoftEstimate(values=sle.b.copy(), scheme="MR")


def rzf_exact(h: np.ndarray, y: np.ndarray, xi: float) -> SoftEstimate:
    """Exact regularized zero-forcing via Cholesky on the K x K Gram."""
    h = np.asarray(h, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if not xi > 0.0:
        raise ValueError(f"regularization must be positive, got {xi}")
    gram = h.conj().T @ h + xi * np.eye(h.shape[1])
    x = solve_hpd(gram, h.conj().T @ y)
    return SoftEstimate(values=x, scheme="RZF")


@dataclass
class KaczmarzState:
    """Iterate of the stacked system, kept in unscaled coordinates.

    `u` tracks H x and `v` tracks x; the sqrt(xi) scaling of the identity
    block is folded into the step so callers never see it.  Owned and
    mutated by exactly one solver run.
    """

    u: np.ndarray
    v: np.ndarray
    t: int = 0
    selection_trace: list = field(default_factory=list)

    @classmethod
    def zeros(cls, m_antennas: int, k_users: int) -> "KaczmarzState":
        return cls(
            u=np.zeros(m_antennas, dtype=np.complex128),
            v=np.zeros(k_users, dtype=np.complex128),
        )

    def stacked(self, xi: float) -> np.ndarray:
        """The iterate in stacked coordinates [u; sqrt(xi) v]."""
        return np.concatenate([self.u, np.sqrt(xi) * self.v])


def kaczmarz_step(state: KaczmarzState, sle: SleSystem, i: int) -> KaczmarzState:
    """Project the iterate onto equation `i` in place.

    gamma = (b_i - h_i^H u - xi v_i) / e_i, then u += gamma h_i and
    v_i += gamma.  At a solution the residual, hence gamma, is zero and the
    step is a no-op apart from the iteration counter.
    """
    if not 0 <= i < sle.k_users:
        raise ValueError(f"equation index {i} out of range [0, {sle.k_users})")
    sup = sle.supports[i] if sle.supports is not None else None
    if sup is None:
        r_i = sle.b[i] - np.vdot(sle.h[:, i], state.u) - sle.xi * state.v[i]
    else:
        r_i = sle.b[i] - np.vdot(sle.h[sup, i], state.u[sup]) - sle.xi * state.v[i]
    gamma = r_i / sle.energies[i]
    if sup is None:
        state.u += gamma * sle.h[:, i]
    else:
        state.u[sup] += gamma * sle.h[sup, i]
    state.v[i] += gamma
    state.t += 1
    state.selection_trace.append(int(i))
    return state


def residual_direct(state: KaczmarzState, sle: SleSystem) -> np.ndarray:
    """All K equation residuals r = b - H^H u - xi v evaluated from scratch."""
    return sle.b - sle.h.conj().T @ state.u - sle.xi * state.v


def residual_recursive_update(
    r: np.ndarray, gamma: complex, i: int, gram: np.ndarray
) -> np.ndarray:
    """Rank-one residual update after a step of size `gamma` on equation `i`.

    Projecting onto row i changes every residual by -gamma [R_yy]_{:, i},
    so the full residual vector stays current at O(K) per iteration instead
    of O(KM).
    """
    return r - gamma * gram[:, i]


def residual_expansion_oracle(
    selection_trace, gammas, sle: SleSystem, k: int
) -> complex:
    """Residual of equation `k` rebuilt from the full step history.

    Expands r_k^(t) = b_k - sum_t' gamma_t' (h_k^H h_{i_t'} + xi [i_t' = k]),
    the successive-cancellation reading of the iteration: each term is the
    interference the step on equation i_t' removed from (or injected into)
    equation k.  Quadratic in t, used only as a cross-check oracle.
    """
    if len(selection_trace) != len(gammas):
        raise ValueError("selection trace and step sizes must have equal length")
    sup_k = sle.supports[k] if sle.supports is not None else None
    h_k = sle.h[:, k]
    acc = complex(sle.b[k])
    for i, gamma in zip(selection_trace, gammas):
        coupling = hermitian_dot(h_k, sle.h[:, i], support=sup_k)
        if i == k:
            coupling += sle.xi
        acc -= gamma * coupling
    return acc
