"""Shared numerical primitives: seeded RNG, Hermitian products, HPD solves,
categorical and complex Gaussian sampling.

All randomness in this package flows through numpy Generator objects created
by :func:`make_rng`, so every result is reproducible from explicit integer
seeds.  No function here reads global RNG state.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "make_rng",
    "hermitian_dot",
    "solve_hpd",
    "sample_categorical",
    "sample_complex_gaussian",
]

# Probability vectors must sum to one within this tolerance before sampling.
_PROB_SUM_TOL = 1e-12


def make_rng(seed) -> np.random.Generator:
    """Create a deterministic Generator (PCG64) from an integer seed.

    `seed` may be an int, a tuple of ints, or a SeedSequence; tuples are
    handed to SeedSequence so that hierarchical stream derivation such as
    ``(master_seed, trial_index, stream_id)`` is collision resistant.
    """
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        ss = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(ss))


def hermitian_dot(a: np.ndarray, b: np.ndarray, support: np.ndarray | None = None) -> complex:
    """Conjugated inner product ``a^H b``.

    If `support` is given it must index every nonzero of `a`; the product is
    then evaluated only over those entries, which is what makes sparse
    (visibility-limited) channel columns cheap to work with.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"hermitian_dot expects equal-length vectors, got {a.shape} and {b.shape}")
    if support is None:
        return complex(np.vdot(a, b))
    return complex(np.vdot(a[support], b[support]))


def solve_hpd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a x = b`` for Hermitian positive definite `a` via Cholesky.

    Raises ValueError when `a` is not Hermitian within 1e-10 relative, and
    propagates numpy's LinAlgError when the factorization meets a
    non-positive pivot.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"solve_hpd expects a square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"rhs length {b.shape[0]} does not match matrix order {a.shape[0]}")
    scale = np.linalg.norm(a)
    if scale > 0 and np.linalg.norm(a - a.conj().T) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian within 1e-10 relative tolerance")
    lo = np.linalg.cholesky(a)  # raises LinAlgError if not positive definite
    y = np.linalg.solve(lo, b)
    return np.linalg.solve(lo.conj().T, y)


def _check_probabilities(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probability vector must be non-empty and one dimensional")
    if np.any(p < 0.0):
        raise ValueError("probabilities must be non-negative")
    s = float(np.cumsum(p)[-1])
    if abs(s - 1.0) > _PROB_SUM_TOL:
        raise ValueError(f"probabilities sum to {s!r}, expected 1 within {_PROB_SUM_TOL}")
    return p


def sample_categorical(p: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an index with probability ``p[k]`` by inverse CDF.

    The CDF is the running sum of `p` in index order and the draw picks the
    first index whose cumulative mass strictly exceeds ``rng.random() * sum``.
    Boundary hits therefore resolve to the lower-indexed nonzero entry, and
    zero-probability indices can never be returned.
    """
    p = _check_probabilities(p)
    cdf = np.cumsum(p)
    target = rng.random() * cdf[-1]
    k = int(np.searchsorted(cdf, target, side="right"))
    if k >= p.size:  # guard the roundoff corner where target reaches the total
        k = int(np.max(np.nonzero(p > 0.0)[0]))
    return k


def sample_complex_gaussian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. circularly symmetric CN(0, 1) samples.

    Real and imaginary parts are independent N(0, 1/2); the real block is
    drawn before the imaginary block so streams are reproducible.
    """
    if n <= 0:
        raise ValueError(f"sample size must be positive, got {n}")
    re = rng.standard_normal(n)
    im = rng.standard_normal(n)
    return (re + 1j * im) / np.sqrt(2.0)
