"""Growth-rate-optimal e-values for maximum entropy model tests on 2xk binary tables."""

from .diagnostics import (
    GapReport,
    RegretCurve,
    SweepConfig,
    fit_log_slope,
    gap_r,
    gap_r_prime,
    redundancy,
    regret,
    regret_curve,
    sweep,
    theorem1_diagnostic,
    worst_case_r_prime,
)
from .evariables import (
    EValueReport,
    RiprSolution,
    combine_evalues,
    decide,
    e_power,
    log_e_gro_can,
    log_e_gro_mic,
    log_e_gro_point,
    log_e_pseudo,
    log_marginal_alt,
    log_w_pseudo0,
    ripr_solve,
)
from .models import Table, canonical_loglik, log_multiplicity, p_to_theta, suff_stats, theta_to_p
from .numerics import GridDensity, Pmf, binomial_pmf, convolve, convolve_all, kl_divergence
from .priors import (
    PriorSpec,
    PseudoDensity,
    direct_convolution_density,
    discrete_gaussian_approx,
    induced_group_pmf,
    null_optimal_prior,
    pseudo_null_density,
    uniform_convolution_closed_form,
)
from .table_io import NetworkInput, network_to_table, parse_table, serialize_table

__all__ = [
    "EValueReport",
    "GapReport",
    "GridDensity",
    "NetworkInput",
    "Pmf",
    "PriorSpec",
    "PseudoDensity",
    "RegretCurve",
    "RiprSolution",
    "SweepConfig",
    "Table",
    "binomial_pmf",
    "canonical_loglik",
    "combine_evalues",
    "convolve",
    "convolve_all",
    "decide",
    "direct_convolution_density",
    "discrete_gaussian_approx",
    "e_power",
    "fit_log_slope",
    "gap_r",
    "gap_r_prime",
    "induced_group_pmf",
    "kl_divergence",
    "log_e_gro_can",
    "log_e_gro_mic",
    "log_e_gro_point",
    "log_e_pseudo",
    "log_marginal_alt",
    "log_multiplicity",
    "log_w_pseudo0",
    "network_to_table",
    "null_optimal_prior",
    "p_to_theta",
    "parse_table",
    "pseudo_null_density",
    "redundancy",
    "regret",
    "regret_curve",
    "ripr_solve",
    "serialize_table",
    "suff_stats",
    "sweep",
    "theorem1_diagnostic",
    "theta_to_p",
    "uniform_convolution_closed_form",
    "worst_case_r_prime",
]
