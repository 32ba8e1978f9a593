"""Two-stage stochastic linear programs via recourse-dual augmentation.

The problem is min over x of c . x + E[Q(x, omega)], where the recourse value
is expressed through its dual: Q(x, omega) = max {xi . (h - T x) : W^T xi <= q}
with all scenario data (q, h, T) indexed by a finite scenario set.

The chain carries J scenario slots, each holding a scenario index, a dual
vector xi_j tilted toward its optimum by exp(kappa * xi . (h - T x)), and
optionally a level u_j uniform under the current dual value.  The levels do
double duty: they weight states by recourse value and, crucially, their
indicator u_j <= xi_j . (h_j - T_j x) is what couples x to the duals as an
interval constraint.  Scenario slots refresh by prior proposals accepted on
the ratio of conditional dual densities (normalizers included), which is
exact for one-dimensional duals and a product-form surrogate beyond.

x moves either on a continuous box, by a truncated exponential whose rate
sets the planting-cost-versus-subgradient balance kappa*(beta*c - sum T^T xi),
or on a finite grid, by Metropolis with the same conditional-density ratio;
the grid kernel leaves the (x, scenario) product marginal exactly invariant
when c = 0 and levels are off, which is the basis of the distribution-level
tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InfeasibleError
from ..polytope import check_feasible, coordinate_interval, feasible_point
from ..rng import RngStream
from ..samplers1d import FLAT_TILT_TOL, Interval, trunc_exp_sample
from .farmer import FarmerProblem

BETA_DEFAULT_IS_J = None


@dataclass(frozen=True)
class TwoStageProblem:
    """Scenario data for the dual-augmented two-stage sampler.

    ``A_xi`` holds the dual constraint rows (A_xi xi <= q); q, h, T are
    stacked per scenario.  Exactly one of ``x_box`` (continuous) or
    ``x_grid`` (finite, one-dimensional x) must be given.
    """

    c: np.ndarray
    A_xi: np.ndarray
    q_scen: np.ndarray
    h_scen: np.ndarray
    T_scen: np.ndarray
    probs: np.ndarray
    x_box: tuple | None = None
    x_grid: np.ndarray | None = None
    # Offset added to the dual value before drawing a level, so problems whose
    # recourse values are negative can still use the level coupling; the level
    # weight becomes (value + value_shift).
    value_shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", np.atleast_1d(np.asarray(self.c, float)))
        object.__setattr__(self, "A_xi", np.atleast_2d(np.asarray(self.A_xi, float)))
        object.__setattr__(self, "q_scen", np.atleast_2d(np.asarray(self.q_scen, float)))
        object.__setattr__(self, "h_scen", np.atleast_2d(np.asarray(self.h_scen, float)))
        object.__setattr__(self, "T_scen", np.asarray(self.T_scen, float))
        object.__setattr__(self, "probs", np.asarray(self.probs, float))
        S, m = self.q_scen.shape
        k = self.A_xi.shape[1]
        n = len(self.c)
        if self.A_xi.shape[0] != m:
            raise ValueError("A_xi row count does not match q_scen columns")
        if self.h_scen.shape != (S, k):
            raise ValueError(f"h_scen shape {self.h_scen.shape}, expected {(S, k)}")
        if self.T_scen.shape != (S, k, n):
            raise ValueError(f"T_scen shape {self.T_scen.shape}, expected {(S, k, n)}")
        if len(self.probs) != S or abs(self.probs.sum() - 1.0) > 1e-9:
            raise ValueError("probs must match the scenario count and sum to 1")
        if (self.x_box is None) == (self.x_grid is None):
            raise ValueError("give exactly one of x_box, x_grid")
        if self.x_box is not None:
            box = tuple(b if isinstance(b, Interval) else Interval(*b) for b in self.x_box)
            if len(box) != n:
                raise ValueError("x_box length does not match c")
            for b in box:
                if not b.bounded:
                    raise ValueError("x_box intervals must be bounded")
            object.__setattr__(self, "x_box", box)
        else:
            if n != 1:
                raise ValueError("x_grid requires one-dimensional x")
            object.__setattr__(self, "x_grid", np.asarray(self.x_grid, float))

    @property
    def n_scen(self) -> int:
        return len(self.probs)

    @property
    def xi_dim(self) -> int:
        return self.A_xi.shape[1]

    def dual_gain(self, s: int, x) -> np.ndarray:
        """h - T x for scenario s; the dual objective vector at x."""
        return self.h_scen[s] - self.T_scen[s] @ np.asarray(x, float)


def _log_texp_norm(m: float, iv: Interval) -> float:
    """log of the integral of exp(m*t) over iv, for the density ratios."""
    lo, hi, w = iv.lo, iv.hi, iv.width
    if w <= 0:
        return -math.inf
    if abs(m) * (w if math.isfinite(w) else math.inf) < FLAT_TILT_TOL:
        if not math.isfinite(w):
            raise InfeasibleError("flat tilt on an unbounded interval has no normalizer")
        return math.log(w)
    if m > 0:
        if not math.isfinite(hi):
            raise InfeasibleError("positive tilt on an interval unbounded above")
        if not math.isfinite(lo):
            return m * hi - math.log(m)
        return m * hi + math.log(-math.expm1(-m * w)) - math.log(m)
    if not math.isfinite(lo):
        raise InfeasibleError("negative tilt on an interval unbounded below")
    if not math.isfinite(hi):
        return m * lo - math.log(-m)
    return m * lo + math.log(-math.expm1(m * w)) - math.log(-m)


def ch_log_ratio(xi, m_new, A_new, q_new, m_old, A_old, q_old) -> float:
    """Log ratio of product-form conditional dual densities at a fixed xi.

    Each coordinate contributes its truncated-exponential conditional density
    (tilt m_d on the interval the constraints leave open), normalizer
    included.  Returns -inf when xi is infeasible under the new system.  For
    one-dimensional duals this is the exact marginal density ratio.
    """
    xi = np.asarray(xi, float)
    slack = q_new - A_new @ xi
    if np.any(slack < -1e-9 * (1.0 + np.abs(q_new))):
        return -math.inf
    total = 0.0
    for d in range(len(xi)):
        try:
            iv_new = coordinate_interval(A_new, q_new, xi, d)
            iv_old = coordinate_interval(A_old, q_old, xi, d)
        except InfeasibleError:
            return -math.inf
        if not iv_new.contains(xi[d], tol=1e-9 * (1.0 + abs(xi[d]))):
            return -math.inf
        total += m_new[d] * xi[d] - _log_texp_norm(m_new[d], iv_new)
        total -= m_old[d] * xi[d] - _log_texp_norm(m_old[d], iv_old)
    return total


@dataclass
class TwoStageResult:
    x_draws: np.ndarray
    scen_draws: np.ndarray
    x_mean_tail: float | np.ndarray
    value_tail: float
    omega_accept: float
    x_accept: float
    xi_last: np.ndarray


def _sliced_system(problem: TwoStageProblem, s: int, x, u: float):
    """Dual constraint system for scenario s, with the level row if active."""
    g = problem.dual_gain(s, x)
    if math.isfinite(u):
        A = np.vstack([problem.A_xi, -g])
        q = np.append(problem.q_scen[s], -u)
        return A, q, g
    return problem.A_xi, problem.q_scen[s], g


def two_stage_chain(
    problem: TwoStageProblem,
    J: int,
    kappa: float,
    n_sweeps: int,
    rng: RngStream,
    beta: float | None = BETA_DEFAULT_IS_J,
    use_value_slice: bool = False,
    x0=None,
    xi0=None,
    burnin: int | None = None,
) -> TwoStageResult:
    """Run the augmented chain; returns x draws and tail summaries.

    ``beta`` scales the first-stage cost tilt and defaults to J, matching the
    J-fold scenario product.  ``use_value_slice`` turns on the per-scenario
    recourse-value levels; a scenario whose dual value is not positive simply
    carries no level that sweep.
    """
    if beta is BETA_DEFAULT_IS_J or beta is None:
        beta = float(J)
    if burnin is None:
        burnin = n_sweeps // 2
    S = problem.n_scen
    k = problem.xi_dim
    n = len(problem.c)
    grid = problem.x_grid is not None

    if x0 is None:
        if grid:
            x = np.array([float(problem.x_grid[len(problem.x_grid) // 2])])
        else:
            x = np.array([0.5 * (b.lo + b.hi) for b in problem.x_box])
    else:
        x = np.atleast_1d(np.asarray(x0, float)).copy()

    scen = rng.choice(S, size=J, p=problem.probs).astype(int)
    # One feasible dual point per scenario, reused as the common start.
    starts = {}
    for s in range(S):
        starts[s] = feasible_point(problem.A_xi, problem.q_scen[s])
        check_feasible(problem.A_xi, problem.q_scen[s], starts[s])
    if xi0 is None:
        xi = np.array([starts[s] for s in scen])
    else:
        xi = np.tile(np.asarray(xi0, float), (J, 1))
    u = np.full(J, -math.inf)

    x_draws = np.empty((n_sweeps, n))
    scen_draws = np.empty((n_sweeps, J), dtype=int)
    vals = np.empty(n_sweeps)
    acc_w = prop_w = acc_x = prop_x = 0

    for t in range(n_sweeps):
        # Dual sweeps, one truncated-exponential coordinate at a time.
        for j in range(J):
            A, q, g = _sliced_system(problem, scen[j], x, u[j])
            m_vec = kappa * g
            for d in range(k):
                iv = coordinate_interval(A, q, xi[j], d)
                if iv.width <= 0:
                    continue
                xi[j, d] = trunc_exp_sample(m_vec[d], iv, rng)

        # Levels under the current (shifted) dual values; u is the raw
        # threshold the dual value must stay above.
        if use_value_slice:
            shift = problem.value_shift
            for j in range(J):
                val = float(xi[j] @ problem.dual_gain(scen[j], x))
                if val + shift > 0:
                    u[j] = (val + shift) * rng.random() - shift
                else:
                    u[j] = -math.inf

        # Scenario refresh by prior proposals.
        for j in range(J):
            cand = int(rng.choice(S, p=problem.probs))
            prop_w += 1
            if cand == scen[j]:
                acc_w += 1
                continue
            A_old, q_old, g_old = _sliced_system(problem, scen[j], x, u[j])
            A_new, q_new, g_new = _sliced_system(problem, cand, x, u[j])
            if math.isfinite(u[j]) and float(xi[j] @ g_new) < u[j]:
                continue
            logr = ch_log_ratio(
                xi[j], kappa * g_new, A_new, q_new, kappa * g_old, A_old, q_old
            )
            if logr >= math.log(max(rng.random(), 1e-300)):
                scen[j] = cand
                acc_w += 1

        # First-stage move.
        if grid:
            cand_x = np.array([float(problem.x_grid[rng.integers(len(problem.x_grid))])])
            prop_x += 1
            logr = -kappa * beta * float(problem.c @ (cand_x - x))
            ok = True
            for j in range(J):
                g_new = problem.dual_gain(scen[j], cand_x)
                if math.isfinite(u[j]) and float(xi[j] @ g_new) < u[j]:
                    ok = False
                    break
                A_old, q_old, g_old = _sliced_system(problem, scen[j], x, u[j])
                A_new = np.vstack([problem.A_xi, -g_new]) if math.isfinite(u[j]) else problem.A_xi
                q_new = (
                    np.append(problem.q_scen[scen[j]], -u[j])
                    if math.isfinite(u[j])
                    else problem.q_scen[scen[j]]
                )
                term = ch_log_ratio(
                    xi[j], kappa * g_new, A_new, q_new, kappa * g_old, A_old, q_old
                )
                if term == -math.inf:
                    ok = False
                    break
                logr += term
            if ok and logr >= math.log(max(rng.random(), 1e-300)):
                x = cand_x
                acc_x += 1
        else:
            subgrad = np.zeros(n)
            for j in range(J):
                subgrad += problem.T_scen[scen[j]].T @ xi[j]
            m_x = kappa * (subgrad - beta * problem.c)
            for kk in range(n):
                lo = problem.x_box[kk].lo
                hi = problem.x_box[kk].hi
                # Active levels bound x through u_j <= xi_j . (h_j - T_j x).
                for j in range(J):
                    if not math.isfinite(u[j]):
                        continue
                    tcoef = problem.T_scen[scen[j]].T @ xi[j]
                    rest = float(xi[j] @ problem.h_scen[scen[j]]) - u[j]
                    rest -= float(tcoef @ x) - tcoef[kk] * x[kk]
                    if tcoef[kk] > 1e-12:
                        hi = min(hi, rest / tcoef[kk])
                    elif tcoef[kk] < -1e-12:
                        lo = max(lo, rest / tcoef[kk])
                if hi <= lo:
                    continue  # keep the coordinate; rounding pinched the interval
                x[kk] = trunc_exp_sample(m_x[kk], Interval(lo, hi), rng)

        x_draws[t] = x
        scen_draws[t] = scen
        recourse = np.mean([float(xi[j] @ problem.dual_gain(scen[j], x)) for j in range(J)])
        vals[t] = float(problem.c @ x) + recourse

    tail = slice(burnin, None)
    return TwoStageResult(
        x_draws=x_draws if n > 1 else x_draws[:, 0],
        scen_draws=scen_draws,
        x_mean_tail=x_draws[tail].mean(axis=0) if n > 1 else float(x_draws[tail, 0].mean()),
        value_tail=float(vals[tail].mean()),
        omega_accept=acc_w / max(prop_w, 1),
        x_accept=acc_x / max(prop_x, 1) if prop_x else float("nan"),
        xi_last=xi.copy(),
    )


def recourse_dual_optimum(problem: TwoStageProblem, s: int, x):
    """Exact recourse dual optimum for one scenario via vertex-free descent.

    Small helper for tests and reports: solves max xi . (h - T x) over the
    dual polyhedron with scipy's LP (the feasible sets here are small).
    """
    from scipy.optimize import linprog

    g = problem.dual_gain(s, x)
    res = linprog(
        -g,
        A_ub=problem.A_xi,
        b_ub=problem.q_scen[s],
        bounds=[(None, None)] * problem.xi_dim,
        method="highs",
    )
    if not res.success:
        raise InfeasibleError(f"recourse dual LP failed: {res.message}")
    return float(-res.fun), res.x


def farmer_reduction(problem: FarmerProblem | None = None, value_shift: float = 8000.0) -> TwoStageProblem:
    """The planting model recast in the two-stage dual form.

    Dual variables attach to the two resource rows and the land row of the
    minimization form of the recourse (so they are nonpositive and the dual
    value is the negated revenue); the land component carries the x coupling.
    """
    fp = problem or FarmerProblem()
    (a11, a12), (a21, a22) = fp.rows
    p1, p2 = fp.prices
    A_xi = np.array(
        [
            [a11, a21, 1.0],
            [a12, a22, 1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    q = np.array([-p1, -p2, 0.0, 0.0, 0.0])
    S = len(fp.multipliers)
    omega0 = np.asarray(fp.omega0, float)
    q_scen = np.tile(q, (S, 1))
    h_scen = np.array([[m * omega0[0], m * omega0[1], 0.0] for m in fp.multipliers])
    T_scen = np.tile(np.array([[0.0], [0.0], [-1.0]]), (S, 1, 1))
    return TwoStageProblem(
        c=np.array([fp.plant_cost]),
        A_xi=A_xi,
        q_scen=q_scen,
        h_scen=h_scen,
        T_scen=T_scen,
        probs=np.asarray(fp.probs, float),
        x_box=(Interval(0.0, fp.land),),
        value_shift=value_shift,
    )
