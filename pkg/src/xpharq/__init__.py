"""Outage probability and throughput of cross-packet HARQ over Rayleigh fading.

Exact closed forms (K <= 2), high-SNR asymptotics for general K, lower and
upper bounds, nested-quadrature oracles, and a deterministic parallel Monte
Carlo engine, plus a CLI for single-point queries and CSV sweeps.
"""

from .core import (
    ConsistencyError,
    ConvergenceError,
    OutageEstimate,
    PowerProfile,
    RateSchedule,
    SnrRealization,
    XpharqError,
    clamp_probability,
    ir_outage_event,
    mutual_information,
    xp_success_round,
)
from .quadrature import (
    IntegrationResult,
    hbar_quadrature,
    integrate_adaptive,
    joint_density_x,
    xp_outage_quadrature,
)
from .exact import (
    FoxHParams11,
    foxh_h11_incomplete,
    outage_k1,
    outage_k2_exact,
    outage_k2_via_foxh,
    phi_foxh,
    phi_quadrature,
    upper_incomplete_gamma_complex,
)
from .asymptotic import (
    HbarTable,
    SlopeFit,
    build_hbar_table,
    diversity_order_fit,
    hbar_eval,
    outage_asymptotic_general,
    outage_k2_asymptotic,
    phi_asymptotic,
)
from .bounds import ir_outage_chain, outage_lower, outage_upper_ir, sum_info_cdf
from .simulate import (
    SimConfig,
    SimSummary,
    ThroughputEstimate,
    estimate_outage,
    estimate_throughput,
    sample_snr,
    throughput_analytical,
    xp_outage_chain,
)
from .sweep import (
    ConfigError,
    SweepConfig,
    SweepRow,
    db_to_linear,
    emit_config,
    emit_gnuplot,
    parse_config,
    run_sweep,
    write_csv,
)

__version__ = "0.1.0"
