"""Monte-Carlo uplink detection harness.

One trial is one channel drop: user positions, large-scale coefficients
(normalized so the median cell pathloss sits at 0 dB), a channel draw, and
`vectors_per_drop` received vectors.  Every received vector is detected by
each configured scheme at every SNR grid point and every iteration budget,
and bit errors against the transmitted Gray-coded 16-QAM bits are counted.

All randomness derives from ``(master_seed, trial_index, stream, ...)``
SeedSequence keys, so trials are independent work units: results do not
depend on execution order or parallelism degree, and a trial can be
reproduced in isolation.  Bits and noise are keyed independently of the SNR
point, so SNR sweeps reuse common randomness, and channel draws are keyed
by (K, D) only, so correlation and visibility variants of the same trial
share positions and fading.
"""

from __future__ import annotations

from dataclasses import dataclass
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import flops
from .channel import (
    build_covariance,
    build_visibility,
    drop_users,
    get_geometry,
    large_scale_from_drop,
    median_constraint_pathloss,
    sample_channel,
)
from .core import make_rng, sample_complex_gaussian, solve_hpd
from .sle import assemble_sle, ensure_gram
from .solvers import SolverConfig, run_snapshots

__all__ = [
    "Constellation",
    "make_qam16",
    "qam_modulate",
    "qam_demodulate",
    "TrialConfig",
    "run_trial",
    "run_experiment",
    "BASELINE_SCHEMES",
    "SOLVER_SCHEMES",
    "normalization_constant",
]

BASELINE_SCHEMES = ("MR", "RZF")
SOLVER_SCHEMES = ("nRK", "RK", "GRK", "RSK")
ALL_SCHEMES = BASELINE_SCHEMES + SOLVER_SCHEMES

# Stream labels for SeedSequence keys; never reorder, they define the
# reproducibility contract of emitted results.
_S_DROP, _S_VIS, _S_CHAN, _S_BITS, _S_NOISE, _S_SCHEME = 1, 2, 3, 4, 5, 6
_SCHEME_IDS = {"nRK": 0, "RK": 1, "GRK": 2, "RSK": 3}

# Seed of the once-per-geometry median-pathloss integration.
_NORM_SEED = 0x5EED_0F_CE11
_NORM_SAMPLES = 100_000


@dataclass(frozen=True)
class Constellation:
    """Square QAM with Gray-labeled axes; index equals the bit label."""

    points: np.ndarray
    bits_per_symbol: int


def make_qam16() -> Constellation:
    """Unit-energy 16-QAM, label b3 b2 b1 b0: (b3 b2) -> I, (b1 b0) -> Q.

    Per axis the Gray map is 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3 (scaled
    by 1/sqrt(10)), so axis-adjacent points differ in exactly one bit and
    the label 0000 sits at (-3 - 3j)/sqrt(10).
    """
    gray = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}
    points = np.empty(16, dtype=np.complex128)
    for b3 in (0, 1):
        for b2 in (0, 1):
            for b1 in (0, 1):
                for b0 in (0, 1):
                    label = 8 * b3 + 4 * b2 + 2 * b1 + b0
                    points[label] = (gray[(b3, b2)] + 1j * gray[(b1, b0)]) / np.sqrt(10.0)
    return Constellation(points=points, bits_per_symbol=4)


_QAM16 = make_qam16()
_BIT_SHIFTS = np.array([3, 2, 1, 0])


def qam_modulate(bits: np.ndarray, constellation: Constellation = _QAM16) -> np.ndarray:
    """Map a flat bit vector (MSB first per symbol) to constellation points."""
    bits = np.asarray(bits)
    bps = constellation.bits_per_symbol
    if bits.ndim != 1 or bits.size % bps:
        raise ValueError(f"bit count must be a multiple of {bps}, got shape {bits.shape}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    groups = bits.reshape(-1, bps)
    labels = groups @ (1 << _BIT_SHIFTS[-bps:])
    return constellation.points[labels]


def qam_demodulate(
    soft: np.ndarray, scale=1.0, constellation: Constellation = _QAM16
) -> np.ndarray:
    """Nearest-point hard decisions on soft symbols divided by `scale`.

    `scale` is scalar or per-symbol.  Distance ties resolve to the lowest
    label because points are stored in label order and argmin keeps the
    first minimum.
    """
    z = np.asarray(soft, dtype=np.complex128) / scale
    d = np.abs(z[:, None] - constellation.points[None, :])
    labels = np.argmin(d, axis=1)
    bps = constellation.bits_per_symbol
    return ((labels[:, None] >> _BIT_SHIFTS[-bps:]) & 1).reshape(-1).astype(np.int64)


@dataclass(frozen=True)
class TrialConfig:
    """One Monte-Carlo case: a geometry, a user load, a channel variant,
    an SNR grid and per-scheme iteration budgets.

    `d_antennas` None means a stationary channel with exponential antenna
    correlation `iota`; a value selects visibility-limited columns (which
    require `iota` = 0).  `iterations` is the snapshot grid shared by the
    iterative schemes; the exact baselines ignore it.  The noise power is
    fixed at 1, so the SNR grid sweeps the transmit power rho and the
    solver regularization is xi = 1 / rho.
    """

    geometry: str
    k_users: int
    iota: float = 0.0
    d_antennas: int | None = None
    snr_db: tuple = (0.0,)
    schemes: tuple = ALL_SCHEMES
    iterations: tuple = (12,)
    omega: int | None = None
    drops: int = 500
    vectors_per_drop: int = 20
    seed: int = 0

    def __post_init__(self):
        geom = get_geometry(self.geometry)
        if self.k_users < 1:
            raise ValueError(f"k_users must be positive, got {self.k_users}")
        if not 0.0 <= self.iota < 1.0:
            raise ValueError(f"iota must lie in [0, 1), got {self.iota}")
        if self.d_antennas is not None:
            if not 1 <= self.d_antennas <= geom.m_antennas:
                raise ValueError(
                    f"d_antennas must lie in [1, {geom.m_antennas}], got {self.d_antennas}"
                )
            if self.iota != 0.0:
                raise ValueError("visibility-limited channels require iota = 0")
        if len(self.snr_db) == 0:
            raise ValueError("snr_db grid must be non-empty")
        if len(self.schemes) == 0:
            raise ValueError("schemes must be non-empty")
        for s in self.schemes:
            if s not in ALL_SCHEMES:
                raise ValueError(f"unknown scheme {s!r}, expected one of {ALL_SCHEMES}")
        if len(self.iterations) == 0:
            raise ValueError("iterations grid must be non-empty")
        seen = -1
        for t in self.iterations:
            if t < 0 or t <= seen:
                raise ValueError("iterations grid must be strictly increasing and non-negative")
            seen = t
        if self.omega is not None and not 1 <= self.omega <= self.k_users:
            raise ValueError(f"omega must lie in [1, {self.k_users}], got {self.omega}")
        if self.drops < 1 or self.vectors_per_drop < 1:
            raise ValueError("drops and vectors_per_drop must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    def scheme_iteration_grid(self, scheme: str) -> tuple:
        return (0,) if scheme in BASELINE_SCHEMES else tuple(self.iterations)


_NORM_CACHE: dict[str, float] = {}


def normalization_constant(geometry_name: str) -> float:
    """Median linear pathloss of the geometry, a fixed package constant.

    Computed once by a seeded 1e5-point Monte-Carlo integration; dividing
    large-scale coefficients by it defines the 0 dB operating point.
    """
    if geometry_name not in _NORM_CACHE:
        geom = get_geometry(geometry_name)
        rng = make_rng((_NORM_SEED, int.from_bytes(geometry_name.encode(), "little")))
        _NORM_CACHE[geometry_name] = median_constraint_pathloss(geom, rng, _NORM_SAMPLES)
    return _NORM_CACHE[geometry_name]


def _trial_counts_zero(config: TrialConfig) -> dict:
    counts = {}
    n_snr = len(config.snr_db)
    for scheme in config.schemes:
        n_t = len(config.scheme_iteration_grid(scheme))
        counts[scheme] = {
            "errors": np.zeros((n_snr, n_t), np.int64),
            "eff": np.zeros((n_snr, n_t), np.int64),
            "model": np.zeros((n_snr, n_t), np.int64),
        }
    return counts


def run_trial(config: TrialConfig, trial_index: int, norm_pathloss: float | None = None) -> dict:
    """Simulate one channel drop; returns per-scheme error and cost sums.

    The result maps scheme name to arrays of shape (n_snr, n_T): bit error
    counts, effective inner-product multiplies, and model FLOPs (which vary
    per solve only through early exits).
    """
    geom = get_geometry(config.geometry)
    if norm_pathloss is None:
        norm_pathloss = normalization_constant(config.geometry)
    seed, trial = config.seed, trial_index
    k_users = config.k_users
    m_ant = geom.m_antennas
    d_key = config.d_antennas if config.d_antennas is not None else 0

    drop = drop_users(geom, k_users, make_rng((seed, trial, _S_DROP, k_users)))
    ls = large_scale_from_drop(geom, drop).scaled(1.0 / norm_pathloss)
    if config.d_antennas is None:
        cov = build_covariance(ls, iota=config.iota)
    else:
        mask = build_visibility(
            m_ant, config.d_antennas, make_rng((seed, trial, _S_VIS, k_users, d_key)), k_users
        )
        cov = build_covariance(ls, visibility=mask)
    chan = sample_channel(cov, make_rng((seed, trial, _S_CHAN, k_users, d_key)))

    counts = _trial_counts_zero(config)
    bps = _QAM16.bits_per_symbol
    iter_grid = tuple(config.iterations)
    t_budget = iter_grid[-1]
    rho = 10.0 ** (np.asarray(config.snr_db, dtype=np.float64) / 10.0)

    for vec in range(config.vectors_per_drop):
        bits = make_rng((seed, trial, _S_BITS, vec, k_users)).integers(0, 2, bps * k_users)
        x = qam_modulate(bits)
        hx = chan.h @ x
        noise = sample_complex_gaussian(m_ant, make_rng((seed, trial, _S_NOISE, vec)))
        for i_snr in range(rho.size):
            sqrt_rho = np.sqrt(rho[i_snr])
            y = sqrt_rho * hx + noise
            sle = assemble_sle(chan.h, y, 1.0 / rho[i_snr], chan.supports)
            for scheme in config.schemes:
                cs = counts[scheme]
                if scheme == "MR":
                    soft = sle.b / (sle.energies - sle.xi)
                    rx = qam_demodulate(soft, sqrt_rho)
                    cs["errors"][i_snr, 0] += np.count_nonzero(rx != bits)
                    cs["eff"][i_snr, 0] += sle.b_mults
                    cs["model"][i_snr, 0] += flops.flops_count("MR", m_ant, k_users)
                elif scheme == "RZF":
                    xhat = solve_hpd(ensure_gram(sle), sle.b)
                    rx = qam_demodulate(xhat, sqrt_rho)
                    cs["errors"][i_snr, 0] += np.count_nonzero(rx != bits)
                    cs["eff"][i_snr, 0] += sle.b_mults + sle.gram_mults
                    cs["model"][i_snr, 0] += flops.flops_count("RZF", m_ant, k_users)
                else:
                    rng_s = make_rng((seed, trial, _S_SCHEME, vec, _SCHEME_IDS[scheme]))
                    cfg = SolverConfig(scheme, t_budget, omega=config.omega, seed=0)
                    for i_t, res in enumerate(run_snapshots(sle, cfg, iter_grid, rng=rng_s)):
                        rx = qam_demodulate(res.estimate.values, sqrt_rho)
                        cs["errors"][i_snr, i_t] += np.count_nonzero(rx != bits)
                        cs["eff"][i_snr, i_t] += res.flops_effective
                        cs["model"][i_snr, i_t] += res.flops_model
    return counts


def _trial_worker(args) -> dict:
    config, trial_index, norm = args
    return run_trial(config, trial_index, norm)


def run_experiment(config: TrialConfig, threads: int = 1) -> list[dict]:
    """Run all trials of one case and aggregate to result rows.

    Returns one row per (scheme, snr, iterations) cell with integer bit and
    error totals and per-solve mean costs.  Integer accumulation makes the
    output independent of `threads`.
    """
    if threads < 1:
        raise ValueError(f"threads must be positive, got {threads}")
    norm = normalization_constant(config.geometry)
    totals = _trial_counts_zero(config)
    if threads == 1:
        for trial in range(config.drops):
            _accumulate(totals, run_trial(config, trial, norm))
    else:
        jobs = [(config, trial, norm) for trial in range(config.drops)]
        chunk = max(1, config.drops // (threads * 4))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(_trial_worker, jobs, chunksize=chunk):
                _accumulate(totals, part)

    geom = get_geometry(config.geometry)
    n_solves = config.drops * config.vectors_per_drop
    bits_per_cell = n_solves * _QAM16.bits_per_symbol * config.k_users
    d_col = config.d_antennas if config.d_antennas is not None else geom.m_antennas
    rows = []
    for scheme in config.schemes:
        grid = config.scheme_iteration_grid(scheme)
        for i_snr, snr in enumerate(config.snr_db):
            for i_t, t in enumerate(grid):
                err = int(totals[scheme]["errors"][i_snr, i_t])
                rows.append(
                    {
                        "scheme": scheme,
                        "m": geom.m_antennas,
                        "k": config.k_users,
                        "d": d_col,
                        "iota": float(config.iota),
                        "snr_db": float(snr),
                        "iterations": int(t),
                        "bits": bits_per_cell,
                        "bit_errors": err,
                        "ber": err / bits_per_cell,
                        "flops_model": totals[scheme]["model"][i_snr, i_t] / n_solves,
                        "flops_effective": totals[scheme]["eff"][i_snr, i_t] / n_solves,
                        "seed": config.seed,
                    }
                )
    return rows


def _accumulate(totals: dict, part: dict) -> None:
    for scheme, arrays in part.items():
        for key, arr in arrays.items():
            totals[scheme][key] += arr
