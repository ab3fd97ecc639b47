"""Uplink channel generation for centered massive-MIMO cells and
edge-mounted extra-large aperture arrays.

Two geometries are supported:

* ``mmimo64``: a 0.4 km square cell with the base-station array at the
  center, users dropped uniformly at least 35 m away.  Spatial correlation
  follows the exponential model, and the large-scale coefficient of a user
  is identical at every antenna (stationary channel).
* ``xl256``: a 0.25 km square cell with a uniform linear array occupying one
  full side, users at least 25 m from the array segment.  Each user sees
  only a visibility region (VR) of ``D`` consecutive antennas, so channel
  columns are sparse and large-scale coefficients vary per antenna
  (non-stationary channel).

Channel columns are drawn as ``h_k = Theta_k^{1/2} g`` with
``g ~ CN(0, I)``, where ``Theta_k`` is the per-user covariance assembled by
:func:`build_covariance`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import sample_complex_gaussian

__all__ = [
    "CellGeometry",
    "UserDrop",
    "LargeScale",
    "VisibilityMask",
    "ChannelCovariance",
    "ChannelRealization",
    "get_geometry",
    "drop_users",
    "pathloss_db",
    "large_scale_from_drop",
    "median_constraint_pathloss",
    "exp_correlation",
    "vr_indices",
    "build_visibility",
    "build_covariance",
    "sample_channel",
]

# Pathloss model: PL(d) = -30.5 - 36.7 log10(d) dB at distance d meters.
_PL_REF_DB = -30.5
_PL_EXP_DB = 36.7


@dataclass(frozen=True)
class CellGeometry:
    """Square cell with either a centered array or an edge-mounted ULA.

    ``kind`` is ``"centered"`` (point array at the cell center, stationary
    statistics) or ``"edge-array"`` (ULA along the y = 0 side, per-antenna
    distances).  Distances are meters.
    """

    name: str
    kind: str
    side_m: float
    min_dist_m: float
    m_antennas: int

    def __post_init__(self):
        if self.kind not in ("centered", "edge-array"):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.side_m <= 0 or self.m_antennas <= 0:
            raise ValueError("side length and antenna count must be positive")
        if self.min_dist_m >= self._max_constraint_distance():
            raise ValueError(
                f"minimum distance {self.min_dist_m} m excludes the whole "
                f"{self.side_m} m cell"
            )

    def _max_constraint_distance(self) -> float:
        if self.kind == "centered":
            return self.side_m * np.sqrt(2.0) / 2.0  # corner of the square
        return self.side_m  # far side of the cell from the array

    def antenna_positions(self) -> np.ndarray:
        """(M, 2) antenna coordinates."""
        m = self.m_antennas
        if self.kind == "centered":
            return np.zeros((m, 2))
        # ULA occupying the full y = 0 side, uniform spacing, centered bins.
        x = (np.arange(m) + 0.5) * (self.side_m / m)
        return np.column_stack([x, np.zeros(m)])

    def cell_bounds(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) of the user area."""
        if self.kind == "centered":
            half = self.side_m / 2.0
            return (-half, half, -half, half)
        return (0.0, self.side_m, 0.0, self.side_m)

    def constraint_distance(self, positions: np.ndarray) -> np.ndarray:
        """Distance used by the minimum-distance constraint.

        For the centered geometry this is the distance to the array; for the
        edge array it is the distance to the array segment, which inside the
        cell is just the y coordinate.
        """
        positions = np.atleast_2d(positions)
        if self.kind == "centered":
            return np.hypot(positions[:, 0], positions[:, 1])
        return positions[:, 1]


_GEOMETRIES = {
    "mmimo64": CellGeometry("mmimo64", "centered", 400.0, 35.0, 64),
    "xl256": CellGeometry("xl256", "edge-array", 250.0, 25.0, 256),
}


def get_geometry(name: str) -> CellGeometry:
    try:
        return _GEOMETRIES[name]
    except KeyError:
        raise ValueError(f"unknown geometry {name!r}, expected one of {sorted(_GEOMETRIES)}") from None


@dataclass(frozen=True)
class UserDrop:
    """User positions for one drop, shape (K, 2) meters."""

    positions: np.ndarray

    @property
    def k_users(self) -> int:
        return self.positions.shape[0]


def drop_users(geometry: CellGeometry, k_users: int, rng: np.random.Generator) -> UserDrop:
    """Drop `k_users` uniformly over the cell honoring the minimum distance.

    Rejection sampling: offending positions are redrawn until all satisfy
    the constraint, so the accepted distribution is uniform over the
    feasible region.
    """
    if k_users <= 0:
        raise ValueError(f"user count must be positive, got {k_users}")
    xmin, xmax, ymin, ymax = geometry.cell_bounds()
    pos = np.empty((k_users, 2))
    pending = np.arange(k_users)
    while pending.size:
        cand = np.column_stack(
            [
                rng.uniform(xmin, xmax, pending.size),
                rng.uniform(ymin, ymax, pending.size),
            ]
        )
        pos[pending] = cand
        ok = geometry.constraint_distance(cand) >= geometry.min_dist_m
        pending = pending[~ok]
    return UserDrop(positions=pos)


def pathloss_db(distance_m) -> np.ndarray:
    """Large-scale pathloss in dB at `distance_m` meters."""
    d = np.asarray(distance_m, dtype=np.float64)
    if np.any(d <= 0.0):
        raise ValueError("pathloss is undefined at non-positive distance")
    return _PL_REF_DB - _PL_EXP_DB * np.log10(d)


@dataclass(frozen=True)
class LargeScale:
    """Linear large-scale coefficients, shape (K, M).

    For stationary channels every row is constant; for the edge array the
    coefficients vary along the aperture.
    """

    beta: np.ndarray

    @property
    def k_users(self) -> int:
        return self.beta.shape[0]

    @property
    def m_antennas(self) -> int:
        return self.beta.shape[1]

    def scaled(self, factor: float) -> "LargeScale":
        return LargeScale(beta=self.beta * factor)


def large_scale_from_drop(geometry: CellGeometry, drop: UserDrop) -> LargeScale:
    """Per-user, per-antenna linear large-scale coefficients for a drop."""
    ant = geometry.antenna_positions()  # (M, 2)
    diff = drop.positions[:, None, :] - ant[None, :, :]  # (K, M, 2)
    dist = np.hypot(diff[..., 0], diff[..., 1])
    beta = 10.0 ** (pathloss_db(dist) / 10.0)
    return LargeScale(beta=beta)


def median_constraint_pathloss(
    geometry: CellGeometry, rng: np.random.Generator, n_samples: int = 100_000
) -> float:
    """Median linear pathloss over the feasible user area.

    Evaluated at the constraint distance (to the array point or segment) by
    Monte Carlo over uniform drops.  Dividing large-scale coefficients by
    this value places the median cell user at 0 dB, which is how transmit
    SNR is normalized throughout the simulations.
    """
    drop = drop_users(geometry, n_samples, rng)
    d = geometry.constraint_distance(drop.positions)
    pl = 10.0 ** (pathloss_db(d) / 10.0)
    return float(np.median(pl))


def exp_correlation(m_antennas: int, iota: float) -> np.ndarray:
    """Exponential antenna correlation matrix, [R]_{ij} = iota^|i-j|."""
    if not 0.0 <= iota < 1.0:
        raise ValueError(f"correlation magnitude must lie in [0, 1), got {iota}")
    if m_antennas <= 0:
        raise ValueError("antenna count must be positive")
    idx = np.arange(m_antennas)
    return iota ** np.abs(idx[:, None] - idx[None, :])


def vr_indices(m_antennas: int, d_antennas: int, center: int) -> np.ndarray:
    """Antenna indices of a visibility region of nominal size `d_antennas`
    centered at 0-based antenna `center`, clipped at the array edges.

    Odd sizes extend d//2 to each side; even sizes take one extra antenna
    above the center.
    """
    if not 0 < d_antennas <= m_antennas:
        raise ValueError(f"VR size must lie in [1, {m_antennas}], got {d_antennas}")
    if not 0 <= center < m_antennas:
        raise ValueError(f"VR center must lie in [0, {m_antennas - 1}], got {center}")
    half = d_antennas // 2
    if d_antennas % 2:
        lo, hi = center - half, center + half
    else:
        lo, hi = center - half + 1, center + half
    return np.arange(max(lo, 0), min(hi, m_antennas - 1) + 1, dtype=np.int64)


@dataclass(frozen=True)
class VisibilityMask:
    """Per-user visibility regions over an M-antenna aperture."""

    m_antennas: int
    d_antennas: int
    centers: np.ndarray  # (K,) 0-based
    supports: list = field(repr=False, default_factory=list)  # K arrays of int64

    @property
    def scale(self) -> float:
        """Power boost M/D that keeps E||h_k||^2 comparable across D."""
        return self.m_antennas / self.d_antennas


def build_visibility(
    m_antennas: int, d_antennas: int, rng: np.random.Generator, k_users: int = 1
) -> VisibilityMask:
    """Draw one VR per user with uniformly random center."""
    if k_users <= 0:
        raise ValueError(f"user count must be positive, got {k_users}")
    centers = rng.integers(0, m_antennas, size=k_users)
    supports = [vr_indices(m_antennas, d_antennas, int(c)) for c in centers]
    return VisibilityMask(
        m_antennas=m_antennas,
        d_antennas=d_antennas,
        centers=centers.astype(np.int64),
        supports=supports,
    )


@dataclass(frozen=True)
class ChannelCovariance:
    """Factor cache for per-user covariances Theta_k.

    Stationary channels share one correlation factor: Theta_k = beta_k R,
    held as the Cholesky factor of R plus the per-user scalars.  Visibility
    channels are diagonal: Theta_k = (M/D) beta_k^m on the VR, zero off it,
    held as per-user standard deviations.
    """

    kind: str  # "stationary" | "visibility"
    m_antennas: int
    k_users: int
    beta: np.ndarray  # (K, M) linear, already including any M/D boost
    chol: np.ndarray | None = None  # (M, M) lower factor of R, stationary only
    supports: list | None = None  # visibility only

    def theta(self, k: int) -> np.ndarray:
        """Materialize Theta_k, mainly for tests and diagnostics."""
        if self.kind == "stationary":
            r = self.chol @ self.chol.conj().T
            return self.beta[k, 0] * r
        return np.diag(self.beta[k])

    def trace(self, k: int) -> float:
        return float(np.sum(self.beta[k]))


def build_covariance(
    large_scale: LargeScale,
    iota: float = 0.0,
    visibility: VisibilityMask | None = None,
) -> ChannelCovariance:
    """Assemble per-user covariance factors from large-scale coefficients.

    Stationary mode (no `visibility`) requires per-user scalar coefficients
    (constant rows) and applies exponential correlation `iota`.  Visibility
    mode requires `iota` = 0: correlated non-stationary channels are out of
    scope, and mixing the two is rejected.
    """
    beta = np.asarray(large_scale.beta, dtype=np.float64)
    k_users, m_antennas = beta.shape
    if np.any(beta < 0.0):
        raise ValueError("large-scale coefficients must be non-negative")

    if visibility is None:
        if not np.allclose(beta, beta[:, :1], rtol=1e-12, atol=0.0):
            raise ValueError(
                "stationary covariance needs per-user scalar coefficients; "
                "per-antenna variation requires a visibility mask"
            )
        r = exp_correlation(m_antennas, iota)
        chol = np.linalg.cholesky(r) if iota > 0.0 else np.eye(m_antennas)
        return ChannelCovariance(
            kind="stationary",
            m_antennas=m_antennas,
            k_users=k_users,
            beta=beta.copy(),
            chol=chol,
        )

    if iota != 0.0:
        raise ValueError("visibility-limited channels support iota = 0 only")
    if visibility.m_antennas != m_antennas or len(visibility.supports) != k_users:
        raise ValueError("visibility mask does not match the large-scale shape")
    scaled = np.zeros_like(beta)
    for k, sup in enumerate(visibility.supports):
        scaled[k, sup] = visibility.scale * beta[k, sup]
    return ChannelCovariance(
        kind="visibility",
        m_antennas=m_antennas,
        k_users=k_users,
        beta=scaled,
        supports=[np.asarray(s, dtype=np.int64) for s in visibility.supports],
    )


@dataclass(frozen=True)
class ChannelRealization:
    """One channel draw: columns h_k stacked into H of shape (M, K).

    `supports` lists the nonzero rows of each column for visibility-limited
    channels and is None when columns are dense.
    """

    h: np.ndarray
    supports: list | None = None

    @property
    def m_antennas(self) -> int:
        return self.h.shape[0]

    @property
    def k_users(self) -> int:
        return self.h.shape[1]


def sample_channel(cov: ChannelCovariance, rng: np.random.Generator) -> ChannelRealization:
    """Draw H with independent columns h_k = Theta_k^{1/2} g, g ~ CN(0, I).

    Columns are drawn in user order; visibility-limited users consume only
    |V_k| Gaussian pairs so off-VR entries are exactly zero.
    """
    m, k_users = cov.m_antennas, cov.k_users
    h = np.zeros((m, k_users), dtype=np.complex128, order="F")
    if cov.kind == "stationary":
        for k in range(k_users):
            g = sample_complex_gaussian(m, rng)
            col = cov.chol @ g
            h[:, k] = np.sqrt(cov.beta[k, 0]) * col
        return ChannelRealization(h=h, supports=None)
    supports = []
    for k in range(k_users):
        sup = cov.supports[k]
        g = sample_complex_gaussian(sup.size, rng)
        h[sup, k] = np.sqrt(cov.beta[k, sup]) * g
        supports.append(sup)
    return ChannelRealization(h=h, supports=supports)
