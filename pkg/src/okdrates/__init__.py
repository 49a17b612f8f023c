"""Key rates for binary intensity-modulated optical key distribution.

Exact and asymptotic secure-rate curves for a passive eavesdropper under
four measurement models (intensity detection, coherent detection,
minimum-error discrimination, collective Holevo bound), with depth
optimization, advantage sweeps, and Monte Carlo cross-validation.
"""

from .model import (
    ChannelParams,
    Depths,
    DomainError,
    ModulationScheme,
    Scenario,
    binary_entropy,
    coherent_mixture_entropy,
    eavesdropper_advantage,
    excess_noise_advantage,
    helstrom_error_probability,
    modulation_depths,
)
from .montecarlo import (
    RoundBatch,
    SimConfig,
    collect,
    dump_rounds,
    estimate_key_rate_mc,
    estimate_mi,
    mi_tolerance,
    simulate,
)
from .optimize import (
    ScalarMax,
    SweepRow,
    SweepTable,
    default_advantage_grid,
    maximize_scalar,
    optimal_rate,
    rate_at,
    sweep,
)
from .quadrature import (
    ConvergenceError,
    NonFiniteIntegrandError,
    QuadratureConfig,
    integrate_1d,
    integrate_2d,
    log_cosh,
    logistic,
)
from .rates import (
    HALF_LOG2_2PIE,
    HELSTROM_ASYMPTOTIC_CONSTANT,
    HELSTROM_ASYMPTOTIC_DEPTH,
    LOG2E,
    RateResult,
    chi_constant,
    chi_optimum,
    dd_asymptotic_bracket,
    gamma_constant,
    gamma_optimum,
    h_b,
    h_b_given_a,
    h_b_given_e_dd,
    h_b_given_e_helstrom,
    helstrom_asymptotic_bracket,
    holevo_asymptotic_bracket,
    holevo_chi,
    key_rate_coherent,
    key_rate_dd,
    key_rate_dd_asymptotic,
    key_rate_helstrom,
    key_rate_helstrom_asymptotic,
    key_rate_holevo,
    key_rate_holevo_asymptotic,
    mutual_info_ab,
)

__version__ = "0.1.0"
