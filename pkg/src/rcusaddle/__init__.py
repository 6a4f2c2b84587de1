"""Saddlepoint approximation of the random-coding union bound for DMCs."""

from .asymptotics import (
    Regime,
    classify_regime,
    error_exponent_approx,
    exact_asymptotics_approx,
    exact_asymptotics_prefactor,
    normal_approx_logM,
    q_inverse,
    rate_for_epsilon,
)
from .channel import (
    ChannelModel,
    SingularityReport,
    builtin_bsc,
    format_channel_spec,
    load_channel,
    parse_channel_spec,
    singularity_report,
)
from .exponent import (
    TiltingSolution,
    c1_c2,
    critical_rate,
    random_coding_exponent,
    rho_hat,
    select_s,
    tilting_solution,
)
from .information import (
    conditional_variance_c3,
    density_moments,
    e0,
    e0_derivatives,
    information_density,
    psi_s,
    reverse_conditional,
    tilted_joint,
    to_bits,
    to_nats,
)
from .lattice import LatticeInfo, detect_lattice
from .oracles import (
    OracleResult,
    bsc_exact_rcu,
    bsc_exact_rcuss,
    exact_rcu_small,
    exact_rcus_small,
    exact_rcuss_small,
    monte_carlo_rcu,
)
from .saddlepoint import (
    ApproxResult,
    LatticeGrid,
    beta_n_lattice,
    beta_n_nonlattice,
    exp_gauss_integral,
    gaussian_q,
    lattice_grid,
    log_gaussian_q,
    saddlepoint_approx,
)

__version__ = "0.1.0"
