"""Scenario-augmented sampling for one-stage stochastic programs.

The decision x maximizes E[G(omega, x)] for a nonnegative integrand G.  The
chain targets the augmented density proportional to prod_j G(omega_j, x) over
(x, omega_1..J): each scenario is refreshed by independence Metropolis from
the scenario prior (acceptance is the G ratio), and x moves by slice sampling
on sum_j log G.  Raising J sharpens the x-marginal around the maximizer of
E[G], so J plays the annealing role; the ladder grows J in stages and reports
estimates from the top rung.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import SamplingError
from ..rng import RngStream
from ..samplers1d import Interval
from ..slice_sampling import slice_update_1d

SCENARIO_INIT_BUDGET = 1000


@dataclass
class OneStageProblem:
    """A maximize-E[G] problem over a box.

    ``log_weight(omega, x)`` returns log G(omega, x); -inf encodes G = 0 and
    is allowed for proposals but not for the current state.  ``draw_scenario``
    samples the scenario prior.
    """

    log_weight: Callable
    draw_scenario: Callable
    x_bounds: tuple
    x0: np.ndarray

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, float)
        self.x_bounds = tuple(
            b if isinstance(b, Interval) else Interval(*b) for b in self.x_bounds
        )
        if len(self.x_bounds) != len(self.x0):
            raise ValueError("x_bounds and x0 lengths differ")
        for k, b in enumerate(self.x_bounds):
            if not b.contains(self.x0[k]):
                raise ValueError(f"x0[{k}]={self.x0[k]} outside bounds {b}")


def scenario_ladder(J: int) -> tuple:
    """The default J ladder: a coarse rung, a middle rung, and J itself."""
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    rungs = sorted({max(1, J // 16), max(1, J // 4), J})
    return tuple(rungs)


@dataclass
class OneStageResult:
    x_mean: np.ndarray
    x_draws: np.ndarray
    value_mean: float
    accept_rate: float
    ladder: tuple
    level_means: list = field(default_factory=list)


def one_stage_mcmc(
    problem: OneStageProblem,
    J: int,
    n_sweeps: int,
    rng: RngStream,
    burnin: int | None = None,
    ladder: tuple | None = None,
) -> OneStageResult:
    """Run the augmented chain up the scenario ladder.

    ``n_sweeps`` applies to the top rung (earlier rungs use half); ``burnin``
    defaults to half the top-rung sweeps.  The value estimate is the running
    scenario average of G at the kept draws.
    """
    ladder = scenario_ladder(J) if ladder is None else tuple(ladder)
    if burnin is None:
        burnin = n_sweeps // 2

    x = problem.x0.copy()
    dim = len(x)
    omegas = []
    logg = np.empty(0)

    def refresh_to(count):
        nonlocal logg
        while len(omegas) < count:
            w = problem.draw_scenario(rng)
            omegas.append(w)
        logg = np.array([problem.log_weight(w, x) for w in omegas])
        # Scenarios added for a new rung may land where the integrand
        # vanishes at the current x; redraw those slots before running.
        for j in range(count):
            tries = 0
            while not math.isfinite(logg[j]):
                tries += 1
                if tries > SCENARIO_INIT_BUDGET:
                    raise SamplingError(
                        "could not find a positive-weight scenario at the "
                        f"current decision after {SCENARIO_INIT_BUDGET} draws"
                    )
                omegas[j] = problem.draw_scenario(rng)
                logg[j] = problem.log_weight(omegas[j], x)

    n_acc = 0
    n_prop = 0
    level_means = []
    x_draws = None
    values = None

    for li, rung in enumerate(ladder):
        refresh_to(rung)
        sweeps = n_sweeps if li == len(ladder) - 1 else max(n_sweeps // 2, 1)
        burn = burnin if li == len(ladder) - 1 else sweeps // 2
        keep = sweeps - burn
        draws = np.empty((keep, dim))
        vals = np.empty(keep)
        row = 0
        for t in range(sweeps):
            # Scenario refresh: independence Metropolis from the prior.
            for j in range(rung):
                cand = problem.draw_scenario(rng)
                lg = problem.log_weight(cand, x)
                n_prop += 1
                if lg - logg[j] >= math.log(max(rng.random(), 1e-300)):
                    omegas[j] = cand
                    logg[j] = lg
                    n_acc += 1
            # Decision update: slice sampling coordinate by coordinate.
            for k in range(dim):
                total = float(logg.sum())
                level = total + math.log(max(rng.random(), 1e-300))

                def coord_logf(t_val, _k=k):
                    x[_k] = t_val
                    s = 0.0
                    for j in range(rung):
                        s += problem.log_weight(omegas[j], x)
                    return s

                x_old = x[k]
                x[k] = slice_update_1d(coord_logf, x_old, level, problem.x_bounds[k], rng)
                # coord_logf mutated x[k] during probing; recompute cache.
                logg = np.array([problem.log_weight(w, x) for w in omegas])
            if t >= burn:
                draws[row] = x
                vals[row] = float(np.mean(np.exp(logg)))
                row += 1
        level_means.append(draws.mean(axis=0))
        x_draws, values = draws, vals

    return OneStageResult(
        x_mean=x_draws.mean(axis=0),
        x_draws=x_draws,
        value_mean=float(values.mean()),
        accept_rate=n_acc / max(n_prop, 1),
        ladder=ladder,
        level_means=level_means,
    )
