"""Randomized Kaczmarz soft-output detection for massive and XL-MIMO uplinks.

The package approximates the regularized zero-forcing receiver by running
randomized row-action iterations on an equivalent consistent system, at
O(M) per iteration instead of the cubic exact solve.  It bundles the
solver family (independent, without-replacement, greedy and sampled-argmax
selection), stationary and visibility-limited channel generators, exact
FLOP accounting, and a seeded Monte-Carlo BER harness with a CLI.
"""

from .backend import active_backend, available_backends, set_backend
from .channel import (
    ChannelCovariance,
    ChannelRealization,
    CellGeometry,
    LargeScale,
    UserDrop,
    VisibilityMask,
    build_covariance,
    build_visibility,
    drop_users,
    exp_correlation,
    get_geometry,
    large_scale_from_drop,
    median_constraint_pathloss,
    pathloss_db,
    sample_channel,
    vr_indices,
)
from .core import (
    hermitian_dot,
    make_rng,
    sample_categorical,
    sample_complex_gaussian,
    solve_hpd,
)
from .flops import (
    ITERATIVE_SCHEMES,
    SCHEMES,
    default_omega,
    flops_count,
    flops_table,
    relaxation_ratio_pct,
)
from .sim import (
    Constellation,
    TrialConfig,
    make_qam16,
    qam_demodulate,
    qam_modulate,
    run_experiment,
    run_trial,
)
from .sle import (
    KaczmarzState,
    SleSystem,
    SoftEstimate,
    assemble_sle,
    ensure_gram,
    kaczmarz_step,
    mr_estimate,
    residual_direct,
    residual_expansion_oracle,
    residual_recursive_update,
    rzf_exact,
)
from .solvers import (
    SolverConfig,
    SolverResult,
    energy_probabilities,
    grk_epsilon,
    grk_probabilities,
    grk_working_set,
    run_grk,
    run_nrk,
    run_rk_swor,
    run_rsk,
    run_scheme,
    run_snapshots,
)

__version__ = "0.1.0"
