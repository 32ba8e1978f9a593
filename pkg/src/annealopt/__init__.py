"""Monte Carlo optimization by annealed Boltzmann sampling.

Linear and stochastic programs are solved by sampling from a family of
exponentially tilted distributions on the feasible set, sharpening the tilt
until the draws concentrate on the optimizer.  The subpackages provide the
constrained samplers (truncated 1-D laws, polytope Gibbs, slice updates) and
the solver drivers built on them.
"""

from .anneal import (
    AnnealResult,
    LevelStats,
    Schedule,
    batch_se,
    default_schedule,
    solve_lp_dual,
    top_draws,
)
from .errors import (
    BudgetExceededError,
    InfeasibleError,
    NonNormalizableError,
    SamplingError,
    UnboundedError,
)
from .polytope import boundedness_certificate, check_feasible, coordinate_interval, feasible_point
from .rng import RngStream
from .samplers1d import (
    ExpMixture,
    Interval,
    expmix_below_one,
    expmix_from_rates,
    expmix_sample,
    trunc_exp_inverse_cdf,
    trunc_exp_mean,
    trunc_exp_sample,
    trunc_exp_sample_arr,
    trunc_gamma_ratio_uniforms,
    trunc_normal_sample,
    trunc_normal_sample_arr,
    vaduva_sample,
)
from .slice_sampling import (
    discrete_slice_update,
    exp_slice_level,
    intersect_intervals,
    linear_halfline,
    multi_slice_levels,
    slice_update_1d,
)
from .truncexp_mv import (
    closed_simplex_uniform,
    exp_simplex_prob,
    exp_simplex_sample,
    simplex_uniform,
    texp_gibbs_chain,
    texp_gibbs_sweep,
)
from .truncnorm_mv import TruncatedMVN
from .waterfill import multinomial_mse, thinning_mse, waterfill_level, waterfill_resample

__version__ = "0.1.0"

__all__ = [
    "AnnealResult",
    "BudgetExceededError",
    "ExpMixture",
    "InfeasibleError",
    "Interval",
    "LevelStats",
    "NonNormalizableError",
    "RngStream",
    "SamplingError",
    "Schedule",
    "TruncatedMVN",
    "UnboundedError",
    "batch_se",
    "boundedness_certificate",
    "check_feasible",
    "closed_simplex_uniform",
    "coordinate_interval",
    "default_schedule",
    "discrete_slice_update",
    "exp_simplex_prob",
    "exp_simplex_sample",
    "exp_slice_level",
    "expmix_below_one",
    "expmix_from_rates",
    "expmix_sample",
    "feasible_point",
    "intersect_intervals",
    "linear_halfline",
    "multi_slice_levels",
    "multinomial_mse",
    "simplex_uniform",
    "slice_update_1d",
    "solve_lp_dual",
    "texp_gibbs_chain",
    "texp_gibbs_sweep",
    "thinning_mse",
    "top_draws",
    "trunc_exp_inverse_cdf",
    "trunc_exp_mean",
    "trunc_exp_sample",
    "trunc_exp_sample_arr",
    "trunc_gamma_ratio_uniforms",
    "trunc_normal_sample",
    "trunc_normal_sample_arr",
    "vaduva_sample",
    "waterfill_level",
    "waterfill_resample",
]
