"""Polar geometry of the l1-penalized Gaussian posterior.

Closed-form radial masses per direction, partition-function estimation with
certified bounds, exact polar sampling, the two-route mode solver, and a
radial-mode convergence diagnosis for Metropolis-Hastings chains.
"""

__version__ = "0.1.0"

from .lasso import LassoSolution, objective, solve_fista, solve_polar
from .mcmc import (
    ChainConfig,
    ChainDiagnosis,
    ChainTrace,
    criterion_coverage,
    run_chain,
    tv_bound,
)
from .partition import (
    PartitionEstimate,
    concentration_prob,
    estimate_z_naive,
    estimate_z_polar,
    lasso_ball_volume,
    sphere_surface,
)
from .problem import (
    DirectionStats,
    ProblemInstance,
    beta_lower_bound,
    direction_stats,
    gen_bernoulli_matrix,
    load_problem,
    make_problem,
    radial_potential,
    ray_energy,
    sample_sphere,
    save_problem,
    zero_lasso_sufficient,
)
from .radial import (
    RadialSummary,
    mass_closed_form,
    mass_expansion,
    mode_radius,
    mode_radius_times_l1,
    radial_summary,
    sample_radius,
)
from .shifted import (
    ShiftContext,
    build_shift_context,
    sample_posterior,
    shifted_mass_bounds,
    shifted_mode_radius,
    shifted_radial_mass,
)
from .special import (
    ExpansionResult,
    expansion_coeff,
    falling_product,
    lower_inc_gamma,
    upper_gamma_asymptotic,
    upper_inc_gamma,
)

__all__ = [
    "ChainConfig",
    "ChainDiagnosis",
    "ChainTrace",
    "DirectionStats",
    "ExpansionResult",
    "LassoSolution",
    "PartitionEstimate",
    "ProblemInstance",
    "RadialSummary",
    "ShiftContext",
    "beta_lower_bound",
    "build_shift_context",
    "concentration_prob",
    "criterion_coverage",
    "direction_stats",
    "estimate_z_naive",
    "estimate_z_polar",
    "expansion_coeff",
    "falling_product",
    "gen_bernoulli_matrix",
    "lasso_ball_volume",
    "load_problem",
    "lower_inc_gamma",
    "make_problem",
    "mass_closed_form",
    "mass_expansion",
    "mode_radius",
    "mode_radius_times_l1",
    "objective",
    "radial_potential",
    "radial_summary",
    "ray_energy",
    "run_chain",
    "sample_posterior",
    "sample_radius",
    "sample_sphere",
    "save_problem",
    "shifted_mass_bounds",
    "shifted_mode_radius",
    "shifted_radial_mass",
    "solve_fista",
    "solve_polar",
    "sphere_surface",
    "tv_bound",
    "upper_gamma_asymptotic",
    "upper_inc_gamma",
    "zero_lasso_sufficient",
]
