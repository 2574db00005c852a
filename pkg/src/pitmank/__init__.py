"""Exact and asymptotic statistics for the number of blocks K of a random
partition drawn from the two-parameter (alpha, theta) Pitman family.

The package computes the exact component-count and block-count
distributions and moments in rational arithmetic, their limiting and
finite-size approximations in both asymptotic regimes (n large with theta
fixed, and n and theta large together with theta/n small), a seedable
Chinese-restaurant-process sampler, and an experiment harness that measures
empirical convergence orders.
"""

from .asymptotics import (
    RegimePath,
    SCALES,
    corrected_mean_limit,
    corrected_scale,
    cr_feasible,
    diversity_density,
    diversity_moment,
    ewens_reference_scale,
    mittag_leffler_density,
    power_scale,
    power_scale_moment_approx,
    refined_moment_approx,
    regime_path,
    shifted_power_scale,
    shifted_power_scale_moment_approx,
    tilted_density_moment,
    z_moments_exact,
    z_statistic,
)
from .combinatorics import (
    CNumberTable,
    PartitionCounts,
    enumerate_partitions,
    gen_stirling_c,
    stirling2,
    weighted_stirling_R,
)
from .distribution import (
    MomentReport,
    exact_moment,
    length_pmf,
    length_pmf_oracle,
    oracle_moment,
    psf_pmf,
)
from .harness import (
    StudyConfig,
    StudyResult,
    build_moment_report,
    config_from_dict,
    fit_slope,
    run_study,
)
from .numerics import (
    ApproxScalar,
    DEFAULT_PRECISION_BITS,
    DomainError,
    ExactScalar,
    PitmanParams,
    PrecisionError,
    gamma_decay_expansion,
    gamma_growth_expansion,
    gamma_ratio_product,
    gamma_ratio_product_expansion,
    log_gamma,
    rising_factorial,
    rising_factorial_expansion,
    stirling_gamma,
)
from .sampler import (
    SampleStats,
    SeedSpec,
    chi_square_gof,
    crp_sample,
    mc_moments,
    sample_k,
    sample_k_batch,
)

__version__ = "0.1.0"
