"""A two-crop planting model with random capacities, solved by sampling.

First stage: choose acreage x at cost ``plant_cost`` per unit, up to ``land``.
Second stage, after the capacity vector omega is revealed: allocate x between
two activities with per-unit revenues ``prices`` subject to two resource rows
and the land cap.  Eliminating the first activity analytically leaves a
piecewise-linear concave revenue profile in the second activity alone, which
the samplers exploit:

* the inner solver estimates the fixed-(x, omega) recourse optimum, either by
  annealed Gibbs on the full two-activity polytope or by a slice chain on the
  one-dimensional profile;
* the outer chain anneals over x jointly with per-scenario slice levels,
  giving a histogram whose mode estimates the optimal acreage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..anneal import AnnealResult, Schedule, solve_lp_dual
from ..rng import RngStream
from ..samplers1d import Interval, trunc_exp_sample, trunc_exp_sample_arr
from ..slice_sampling import intersect_intervals, linear_halfline

DEFAULT_OUTER_KAPPA = 0.1

# The recourse polytope has a long thin edge along the binding resource row;
# the tilted conditionals step along it in increments that shrink like
# 1/kappa, so the inner ladder holds kappa moderate and buys accuracy with
# sweeps instead.  The slice variant moves in larger hops but costs less per
# sweep, hence the higher count.
INNER_KAPPAS = (1.0, 5.0, 25.0, 125.0)
INNER_GIBBS_SWEEPS = 8000
INNER_SLICE_SWEEPS = 20000


def inner_schedule(sweeps: int = INNER_GIBBS_SWEEPS) -> Schedule:
    """The default ladder for the inner samplers."""
    return Schedule.from_kappas(INNER_KAPPAS, sweeps=sweeps, final_sweeps=sweeps)


@dataclass(frozen=True)
class FarmerProblem:
    prices: tuple = (143.0, 60.0)
    rows: tuple = ((110.0, 30.0), (120.0, 210.0))
    land: float = 100.0
    plant_cost: float = 10.0
    omega0: tuple = (4000.0, 15000.0)
    multipliers: tuple = (0.8, 1.0, 1.2)
    probs: tuple = (1 / 3, 1 / 3, 1 / 3)

    def __post_init__(self):
        if len(self.multipliers) != len(self.probs):
            raise ValueError("multipliers and probs lengths differ")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("scenario probabilities must sum to 1")

    @property
    def degenerate(self) -> bool:
        return len(self.multipliers) == 1 or all(m == self.multipliers[0] for m in self.multipliers)

    def draw_scenario(self, rng: RngStream) -> np.ndarray:
        i = int(rng.choice(len(self.probs), p=np.asarray(self.probs)))
        return np.asarray(self.omega0, float) * self.multipliers[i]


def recourse_polytope(problem: FarmerProblem, x: float, omega):
    """Constraint system A y <= b for the two activity levels."""
    (a11, a12), (a21, a22) = problem.rows
    A = np.array(
        [
            [a11, a12],
            [a21, a22],
            [1.0, 1.0],
            [-1.0, 0.0],
            [0.0, -1.0],
        ]
    )
    b = np.array([omega[0], omega[1], x, 0.0, 0.0])
    return A, b


def y2_domain(problem: FarmerProblem, x: float, omega) -> float:
    """Largest second-activity level keeping the first activity feasible."""
    (a11, a12), (a21, a22) = problem.rows
    return min(x, omega[0] / a12, omega[1] / a22)


def profile_lines(problem: FarmerProblem, x: float, omega):
    """Revenue as min of three affine functions of the second activity.

    For each binding resource, the first activity is pushed to its cap and the
    revenue is affine in y2; the attainable revenue is the pointwise minimum.
    Returns [(intercept, slope)] for the land row and the two resource rows.
    """
    p1, p2 = problem.prices
    (a11, a12), (a21, a22) = problem.rows
    return [
        (p1 * x, p2 - p1),
        (p1 * omega[0] / a11, p2 - p1 * a12 / a11),
        (p1 * omega[1] / a21, p2 - p1 * a22 / a21),
    ]


def profile_value(problem: FarmerProblem, x: float, omega, y2):
    """Revenue profile J(y2) = min over the three affine pieces."""
    lines = profile_lines(problem, x, omega)
    y2 = np.asarray(y2, float)
    vals = np.min([b + m * y2 for b, m in lines], axis=0)
    return float(vals) if np.ndim(y2) == 0 else vals


def recourse_optimum(problem: FarmerProblem, x: float, omega):
    """Exact recourse maximum via the profile breakpoints.

    Returns (value, y) with y the maximizing activity pair.  The maximum of a
    min of affine functions on an interval sits at an endpoint or a pairwise
    crossing, so a constant-size candidate list suffices.
    """
    hi = y2_domain(problem, x, omega)
    lines = profile_lines(problem, x, omega)
    cand = [0.0, hi]
    for i in range(3):
        for j in range(i + 1, 3):
            b1, m1 = lines[i]
            b2, m2 = lines[j]
            if m1 != m2:
                t = (b2 - b1) / (m1 - m2)
                if 0.0 < t < hi:
                    cand.append(t)
    vals = [profile_value(problem, x, omega, t) for t in cand]
    k = int(np.argmax(vals))
    y2 = cand[k]
    (a11, a12), (a21, a22) = problem.rows
    y1 = min(x - y2, (omega[0] - a12 * y2) / a11, (omega[1] - a22 * y2) / a21)
    return float(vals[k]), np.array([max(y1, 0.0), y2])


def inner_gibbs(
    problem: FarmerProblem,
    x: float,
    omega,
    schedule: Schedule | None = None,
    rng: RngStream | None = None,
    record_trace: bool = False,
) -> AnnealResult:
    """Annealed Gibbs estimate of the recourse maximum on the full polytope.

    Runs the linear-objective sampler on the two activity levels (the revenue
    is maximized, so the sign is flipped into the minimizing driver and
    flipped back in the returned values).
    """
    A, b = recourse_polytope(problem, x, omega)
    p = np.asarray(problem.prices, float)
    res = solve_lp_dual(
        -p,
        A.T,
        b,
        schedule=schedule or inner_schedule(),
        rng=rng or RngStream(0),
        pi0=np.zeros(2),
        record_trace=record_trace,
    )
    res.value_rb = -res.value_rb
    res.value_mean = -res.value_mean
    res.best_value = -res.best_value
    res.values = -res.values
    for st in res.level_stats:
        st.value_mean = -st.value_mean
        st.value_rb = -st.value_rb
    if res.trace is not None:
        res.trace[:, 3] = -res.trace[:, 3]
    return res


def inner_slice_gibbs(
    problem: FarmerProblem,
    x: float,
    omega,
    schedule: Schedule | None = None,
    rng: RngStream | None = None,
):
    """Slice variant of the inner sampler on the full two-activity polytope.

    Per sweep: draw a level u below the current revenue from the exponential
    tail density kappa * exp(kappa * (u - f)), then each activity uniformly on
    the segment where revenue >= u and the resources allow it.  Same invariant
    law as ``inner_gibbs`` at each kappa; the uniform moves can hop along thin
    edges that the tilted-exponential conditionals crawl.  Returns the kept
    draws and revenue values of the final level.
    """
    schedule = schedule or inner_schedule(INNER_SLICE_SWEEPS)
    rng = rng or RngStream(0)
    p1, p2 = problem.prices
    (a11, a12), (a21, a22) = problem.rows
    w1, w2 = float(omega[0]), float(omega[1])
    y1 = y2 = 0.0
    draws = vals = None
    for lvl in range(schedule.levels):
        kappa = schedule.kappas[lvl]
        n_sweeps = schedule.sweeps[lvl]
        burn = schedule.burnin(lvl)
        draws = np.empty((n_sweeps - burn, 2))
        vals = np.empty(n_sweeps - burn)
        row = 0
        for t in range(n_sweeps):
            f = p1 * y1 + p2 * y2
            u = f + math.log(1.0 - rng.random()) / kappa if kappa > 0 else -math.inf
            hi1 = min((w1 - a12 * y2) / a11, (w2 - a22 * y2) / a21, x - y2)
            lo1 = max(0.0, (u - p2 * y2) / p1)
            y1 = lo1 + max(hi1 - lo1, 0.0) * rng.random()
            hi2 = min((w1 - a11 * y1) / a12, (w2 - a21 * y1) / a22, x - y1)
            lo2 = max(0.0, (u - p1 * y1) / p2)
            y2 = lo2 + max(hi2 - lo2, 0.0) * rng.random()
            if t >= burn:
                draws[row, 0] = y1
                draws[row, 1] = y2
                vals[row] = p1 * y1 + p2 * y2
                row += 1
    return draws, vals


def log_partition_y2(problem: FarmerProblem, x: float, omega, kappa: float) -> float:
    """log of the integral of exp(kappa * J(y2)) over the feasible range.

    J is piecewise affine, so the integrand is piecewise exponential and each
    segment integrates in closed form; segments combine by log-sum-exp.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    hi = y2_domain(problem, x, omega)
    lines = profile_lines(problem, x, omega)
    pts = {0.0, hi}
    for i in range(3):
        for j in range(i + 1, 3):
            b1, m1 = lines[i]
            b2, m2 = lines[j]
            if m1 != m2:
                t = (b2 - b1) / (m1 - m2)
                if 0.0 < t < hi:
                    pts.add(t)
    knots = sorted(pts)
    seg_logs = []
    for t0, t1 in zip(knots, knots[1:]):
        mid = 0.5 * (t0 + t1)
        b, m = min(lines, key=lambda ln: ln[0] + ln[1] * mid)
        a0 = kappa * (b + m * t0)
        a1 = kappa * (b + m * t1)
        if abs(a1 - a0) < 1e-12:
            seg_logs.append(a0 + math.log(t1 - t0))
        else:
            seg_logs.append(
                max(a0, a1) + math.log(-math.expm1(-abs(a1 - a0))) - math.log(kappa * abs(m))
            )
    m_log = max(seg_logs)
    return m_log + math.log(sum(math.exp(s - m_log) for s in seg_logs))


def slice_region(problem: FarmerProblem, x: float, omega, level: float):
    """{y2 in the domain : J(y2) >= level} as an interval (None if empty)."""
    hi = y2_domain(problem, x, omega)
    parts = [Interval(0.0, hi)]
    for b, m in profile_lines(problem, x, omega):
        parts.append(linear_halfline(b, m, level, "ge"))
    return intersect_intervals(parts)


def inner_slice_chain(
    problem: FarmerProblem,
    x: float,
    omega,
    kappa: float,
    n_sweeps: int,
    rng: RngStream,
    burnin: int | None = None,
):
    """Level/uniform slice chain on the one-dimensional revenue profile.

    Alternates an exponentially tilted level below the current revenue with a
    uniform draw of y2 on the super-level interval; the y2-marginal is the
    kappa-tilted profile density (up to the capped-level correction, which is
    negligible at kappa * J above a few units).  Returns (y2 draws, values).
    """
    if burnin is None:
        burnin = n_sweeps // 2
    y2 = 0.5 * y2_domain(problem, x, omega)
    keep = n_sweeps - burnin
    draws = np.empty(keep)
    vals = np.empty(keep)
    row = 0
    for t in range(n_sweeps):
        j_val = profile_value(problem, x, omega, y2)
        gap = trunc_exp_sample(-kappa, Interval(0.0, j_val), rng)
        level = j_val - gap
        region = slice_region(problem, x, omega, level)
        if region is None:
            raise RuntimeError("slice region emptied; level bookkeeping is broken")
        y2 = region.lo + region.width * rng.random()
        if t >= burnin:
            draws[row] = y2
            vals[row] = profile_value(problem, x, omega, y2)
            row += 1
    return draws, vals


@dataclass
class OuterResult:
    x_draws: np.ndarray
    value_draws: np.ndarray
    x_mode: float
    bin_width: float
    x_mean_tail: float
    value_tail: float
    accept_rate: float


def histogram_mode(x, tail_frac: float = 0.5):
    """Mode of the tail of a trace via Freedman-Diaconis binning."""
    x = np.asarray(x, float)
    tail = x[int(len(x) * (1.0 - tail_frac)) :]
    edges = np.histogram_bin_edges(tail, bins="fd")
    if len(edges) < 2:
        return float(tail.mean()), 0.0
    counts, edges = np.histogram(tail, bins=edges)
    k = int(np.argmax(counts))
    return float(0.5 * (edges[k] + edges[k + 1])), float(edges[1] - edges[0])


def outer_chain(
    problem: FarmerProblem,
    J: int = 20,
    kappa: float = DEFAULT_OUTER_KAPPA,
    n_sweeps: int = 6000,
    rng: RngStream | None = None,
    x0: float = 30.0,
    burnin: int | None = None,
) -> OuterResult:
    """Anneal the acreage jointly with per-scenario revenue levels.

    State per scenario: capacity draw omega_j, activity level y2_j, and a
    slice level u_j under the revenue profile.  One sweep refreshes levels
    (exponentially tilted toward the profile), redraws each y2 uniformly on
    its slice, refreshes scenarios by prior proposals accepted on the slice
    indicator alone, and finally draws x from a truncated exponential whose
    rate balances the planting cost against the scenario count.
    """
    rng = rng or RngStream(0)
    if burnin is None:
        burnin = n_sweeps // 2
    p1, p2 = problem.prices
    k_cost = problem.plant_cost
    x = float(x0)
    omegas = [problem.draw_scenario(rng) for _ in range(J)]
    y2 = np.array([0.25 * y2_domain(problem, x, w) for w in omegas])
    n_acc = 0
    n_prop = 0

    draws = np.empty(n_sweeps)
    vals = np.empty(n_sweeps)

    for t in range(n_sweeps):
        # Slice levels under each scenario's current revenue.
        j_vals = np.array(
            [profile_value(problem, x, omegas[j], y2[j]) for j in range(J)]
        )
        gaps = trunc_exp_sample_arr(-kappa, 0.0, j_vals, rng)
        u = j_vals - gaps

        # Activity levels, uniform on their slice intervals.
        for j in range(J):
            region = slice_region(problem, x, omegas[j], u[j])
            if region is None:
                raise RuntimeError("slice region emptied; level bookkeeping is broken")
            y2[j] = region.lo + region.width * rng.random()

        # Scenario refresh: prior proposal, slice-indicator acceptance.
        for j in range(J):
            cand = problem.draw_scenario(rng)
            n_prop += 1
            if y2[j] <= y2_domain(problem, x, cand) and profile_value(
                problem, x, cand, y2[j]
            ) >= u[j]:
                omegas[j] = cand
                n_acc += 1

        # Acreage: constraints x >= y2_j and the land line through each level.
        lower = float(np.max(np.maximum(y2, y2 + (u - p2 * y2) / p1)))
        lower = max(lower, 0.0)
        m_x = -kappa * J * k_cost
        if lower >= problem.land:
            x = problem.land
        else:
            x = trunc_exp_sample(m_x, Interval(lower, problem.land), rng)

        draws[t] = x
        vals[t] = float(j_vals.mean()) - k_cost * x

    mode, width = histogram_mode(draws[burnin:], tail_frac=1.0)
    tail = draws[burnin:]
    return OuterResult(
        x_draws=draws,
        value_draws=vals,
        x_mode=mode,
        bin_width=width,
        x_mean_tail=float(tail.mean()),
        value_tail=float(vals[burnin:].mean()),
        accept_rate=n_acc / max(n_prop, 1),
    )
