"""Closed-form real-FLOP counts for the detection schemes.

Counting conventions: one complex multiply is 6 FLOPs, one complex add is
2, so a length-n conjugated inner product costs 8n - 2.  Setup terms cover
the matched filter, row energies and (where needed) the Gram matrix; the
per-iteration terms cover selection bookkeeping, one residual, the step
size and the iterate update.  `TPE` is a truncated polynomial expansion
baseline included for cost comparison only; it has no solver here.

`relaxation_ratio_pct` expresses a scheme's count as the percentage saved
relative to exact RZF at the same (M, K).
"""

from __future__ import annotations

import math

__all__ = [
    "SCHEMES",
    "ITERATIVE_SCHEMES",
    "default_omega",
    "flops_count",
    "relaxation_ratio_pct",
    "flops_table",
]

SCHEMES = ("MR", "RZF", "nRK", "RK", "GRK", "RSK", "TPE")
# Schemes whose count grows with the iteration budget T.
ITERATIVE_SCHEMES = ("nRK", "RK", "GRK", "RSK", "TPE")


def default_omega(k_users: int) -> int:
    """Subset size for the sampled-argmax scheme, ceil(log2 K), at least 1."""
    if k_users < 1:
        raise ValueError(f"user count must be positive, got {k_users}")
    return max(1, math.ceil(math.log2(k_users)))


def _validate(scheme: str, m: int, k: int, t: int, omega: int | None) -> int:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    if m < 1 or k < 1:
        raise ValueError(f"array and user counts must be positive, got M={m}, K={k}")
    if t < 0:
        raise ValueError(f"iteration count must be non-negative, got {t}")
    if omega is None:
        omega = default_omega(k)
    if not 1 <= omega <= k:
        raise ValueError(f"subset size must lie in [1, {k}], got {omega}")
    return omega


def flops_count(scheme: str, m: int, k: int, t: int = 0, omega: int | None = None) -> int:
    """Total real FLOPs of `scheme` at array size M, K users, T iterations."""
    omega = _validate(scheme, m, k, t, omega)
    if scheme == "MR":
        return 8 * k * m - 2 * k
    if scheme == "RZF":
        return 4 * k * k * m + 12 * k * m + 5 * k**3 + 10 * k * k - 4 * k
    if scheme == "nRK":
        return 16 * k * m - k - 1 + (16 * m + 8) * t
    if scheme == "RK":
        return 16 * k * m - 2 * k - 1 + (k + 16 * m + 8) * t
    if scheme == "GRK":
        return 4 * k * k * m + 12 * k * m - k * k - k + (16 * k + 8 * m + 7) * t
    if scheme == "RSK":
        return 16 * k * m - 2 * k + (omega * (8 * m + 9) + 8 * m + 4) * t
    # TPE: Gram-based setup plus two K x K products per expansion order.
    return 4 * k * k * m + 12 * k * m + 3 * k + 4 + (8 * k * k + 4 * k) * t


def relaxation_ratio_pct(
    scheme: str, m: int, k: int, t: int = 0, omega: int | None = None
) -> float:
    """Percentage of exact-RZF FLOPs saved by running `scheme` instead."""
    total = flops_count(scheme, m, k, t, omega)
    rzf = flops_count("RZF", m, k)
    return 100.0 * (1.0 - total / rzf)


def flops_table(m: int, k: int, t: int, omega: int | None = None) -> list[dict]:
    """Per-scheme counts and RZF-relative savings at one operating point.

    `omega` applies to the subset scheme only and defaults to ceil(log2 K);
    the baselines ignore T.
    """
    rows = []
    resolved_omega = default_omega(k) if omega is None else omega
    for scheme in SCHEMES:
        t_eff = t if scheme in ITERATIVE_SCHEMES else 0
        rows.append(
            {
                "scheme": scheme,
                "m": m,
                "k": k,
                "t": t_eff,
                "omega": resolved_omega if scheme == "RSK" else "",
                "flops": flops_count(scheme, m, k, t_eff, resolved_omega),
                "relaxation_vs_rzf_pct": relaxation_ratio_pct(scheme, m, k, t_eff, resolved_omega),
            }
        )
    return rows
