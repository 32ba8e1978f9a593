"""Sample-average approximation baseline: freeze scenarios, climb the mean.

A deliberately plain projected-ascent optimizer for comparing the samplers
against the standard approach: fix N scenario draws, treat the empirical mean
objective as deterministic, and run finite-difference gradient ascent with
backtracking line search and box projection.  Written out by hand so the
baseline has no dependence on the sampling machinery it benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import RngStream


@dataclass
class SaaResult:
    x: np.ndarray
    value: float
    iterations: int
    evaluations: int
    converged: bool


def frozen_objective(weight_fn, scenarios):
    """Empirical-mean objective over a fixed scenario list."""

    def f(x):
        return float(np.mean([weight_fn(w, x) for w in scenarios]))

    return f


def freeze_scenarios(draw_scenario, N: int, rng: RngStream):
    return [draw_scenario(rng) for _ in range(N)]


def saa_maximize(
    objective,
    x0,
    lower,
    upper,
    max_iters: int = 300,
    fd_step: float = 1e-5,
    step0: float = 1.0,
    armijo: float = 1e-4,
    shrink: float = 0.5,
    tol: float = 1e-9,
) -> SaaResult:
    """Maximize ``objective`` over the box [lower, upper] from x0.

    Central finite differences (one-sided at the box boundary), backtracking
    until the Armijo condition holds for the projected step, stop when the
    step or the improvement vanishes.
    """
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)
    x = np.clip(np.asarray(x0, float), lower, upper)
    n = len(x)
    evals = 0

    def f(p):
        nonlocal evals
        evals += 1
        return objective(p)

    fx = f(x)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        g = np.zeros(n)
        for k in range(n):
            hp = min(fd_step, upper[k] - x[k])
            hm = min(fd_step, x[k] - lower[k])
            if hp + hm <= 0:
                continue
            xp = x.copy()
            xp[k] += hp
            xm = x.copy()
            xm[k] -= hm
            g[k] = (f(xp) - f(xm)) / (hp + hm)
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol * (1.0 + abs(fx)):
            converged = True
            break
        step = step0
        accepted = False
        while step > 1e-14:
            x_new = np.clip(x + step * g, lower, upper)
            f_new = f(x_new)
            if f_new >= fx + armijo * float(g @ (x_new - x)):
                accepted = True
                break
            step *= shrink
        if not accepted:
            converged = True
            break
        gain = f_new - fx
        x, fx = x_new, f_new
        if abs(gain) < tol * (1.0 + abs(fx)):
            converged = True
            break
    return SaaResult(x=x, value=fx, iterations=it, evaluations=evals, converged=converged)


def saa_minimize(objective, x0, lower, upper, **kw) -> SaaResult:
    res = saa_maximize(lambda p: -objective(p), x0, lower, upper, **kw)
    res.value = -res.value
    return res
