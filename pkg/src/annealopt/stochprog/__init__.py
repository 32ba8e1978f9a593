"""Stochastic-program drivers built on the annealed constrained samplers."""

from .farmer import (
    FarmerProblem,
    OuterResult,
    histogram_mode,
    inner_gibbs,
    inner_slice_chain,
    inner_slice_gibbs,
    outer_chain,
    recourse_optimum,
    recourse_polytope,
)
from .onestage import OneStageProblem, OneStageResult, one_stage_mcmc, scenario_ladder
from .portfolio import PortfolioProblem, PortfolioResult, portfolio_chain, portfolio_estimate
from .saa import SaaResult, freeze_scenarios, frozen_objective, saa_maximize, saa_minimize
from .twostage import (
    TwoStageProblem,
    TwoStageResult,
    ch_log_ratio,
    farmer_reduction,
    recourse_dual_optimum,
    two_stage_chain,
)

__all__ = [
    "FarmerProblem",
    "OneStageProblem",
    "OneStageResult",
    "OuterResult",
    "PortfolioProblem",
    "PortfolioResult",
    "SaaResult",
    "TwoStageProblem",
    "TwoStageResult",
    "ch_log_ratio",
    "farmer_reduction",
    "freeze_scenarios",
    "frozen_objective",
    "histogram_mode",
    "inner_gibbs",
    "inner_slice_chain",
    "inner_slice_gibbs",
    "one_stage_mcmc",
    "outer_chain",
    "portfolio_chain",
    "portfolio_estimate",
    "recourse_dual_optimum",
    "recourse_optimum",
    "recourse_polytope",
    "saa_maximize",
    "saa_minimize",
    "scenario_ladder",
    "two_stage_chain",
]
