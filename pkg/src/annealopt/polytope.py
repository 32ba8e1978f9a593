"""Coordinate geometry for Gibbs sweeps on polyhedra {x : A x <= b}.

All samplers in this package reduce multivariate draws to one-dimensional
conditionals; the functions here compute the conditional interval of a single
coordinate with the others held fixed, check feasibility, and certify
boundedness of linear objectives over the feasible set.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog

from .errors import InfeasibleError, UnboundedError
from .samplers1d import Interval

# Coefficients smaller than this do not constrain the coordinate.
COEF_TOL = 1e-12
# Per-row slack tolerance is ROW_TOL * (1 + |b_i|).
ROW_TOL = 1e-10


def check_feasible(A, b, x, scale: float = 1.0):
    """Raise InfeasibleError if A x <= b fails beyond the per-row tolerance."""
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    x = np.asarray(x, float)
    slack = b - A @ x
    tol = scale * ROW_TOL * (1.0 + np.abs(b))
    bad = np.flatnonzero(slack < -tol)
    if len(bad):
        worst = ", ".join(
            f"row {i}: violation {-slack[i]:.3e}" for i in bad[:5]
        )
        raise InfeasibleError(
            f"point violates {len(bad)} constraint(s): {worst}"
        )
    return float(np.min(slack)) if len(slack) else math.inf


def coordinate_interval(A, b, x, k: int) -> Interval:
    """Conditional interval of x_k on {A x <= b} with the other coordinates fixed.

    Rows whose coefficient on x_k is below COEF_TOL in magnitude impose no
    bound.  If the bounds cross by more than the per-row slack tolerance the
    point is infeasible in the remaining coordinates and InfeasibleError names
    the crossing rows; a crossing within tolerance collapses to a degenerate
    (zero-width) interval at the midpoint.
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    x = np.asarray(x, float)
    col = A[:, k]
    # Slack available to x_k alone: b_i - sum_{j != k} A_ij x_j.
    resid = b - A @ x + col * x[k]

    lo, hi = -math.inf, math.inf
    lo_row = hi_row = -1
    for i in range(len(b)):
        c = col[i]
        if c > COEF_TOL:
            cand = resid[i] / c
            if cand < hi:
                hi, hi_row = cand, i
        elif c < -COEF_TOL:
            cand = resid[i] / c
            if cand > lo:
                lo, lo_row = cand, i
    if lo > hi:
        tol = ROW_TOL * (
            (1.0 + abs(b[lo_row]) if lo_row >= 0 else 1.0)
            + (1.0 + abs(b[hi_row]) if hi_row >= 0 else 1.0)
        )
        if lo - hi > tol:
            raise InfeasibleError(
                f"coordinate {k}: lower bound {lo:.6g} (row {lo_row}) exceeds "
                f"upper bound {hi:.6g} (row {hi_row}) by {lo - hi:.3e}"
            )
        mid = 0.5 * (lo + hi)
        return Interval(mid, mid)
    return Interval(lo, hi)


def feasible_point(A, b, bounds=None):
    """A feasible point of {A x <= b} via a phase-one linear program.

    Minimizes the common slack s subject to A x <= b + s; a nonpositive
    optimum certifies feasibility.  s may go negative (floored at -1 so the
    program stays bounded), which pulls the point into the interior whenever
    one exists; a vertex would freeze coordinate sweeps whose conditional
    intervals all collapse there.  ``bounds`` follows the scipy convention
    and defaults to free variables.
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    m, n = A.shape
    A_ub = np.hstack([A, -np.ones((m, 1))])
    c = np.zeros(n + 1)
    c[-1] = 1.0
    if bounds is None:
        var_bounds = [(None, None)] * n + [(-1.0, None)]
    else:
        var_bounds = list(bounds) + [(-1.0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=var_bounds, method="highs")
    if not res.success:
        raise InfeasibleError(f"phase-one LP failed: {res.message}")
    s = float(res.x[-1])
    if s > 1e-7 * (1.0 + float(np.abs(b).max(initial=0.0))):
        raise InfeasibleError(f"constraint set is empty (minimum slack {s:.3e})")
    x = res.x[:n].copy()
    return x


def boundedness_certificate(z, A, tol: float = 1e-9):
    """Check that z^T x is bounded below over {x : A x <= 0} directions.

    Solves min z^T d over the recession cone {A d <= 0} intersected with the
    unit box.  A strictly negative optimum exhibits an unbounded descent
    direction and raises UnboundedError; otherwise returns the optimal value
    (0 up to solver tolerance).
    """
    z = np.asarray(z, float)
    A = np.asarray(A, float)
    n = len(z)
    res = linprog(
        z,
        A_ub=A,
        b_ub=np.zeros(A.shape[0]),
        bounds=[(-1.0, 1.0)] * n,
        method="highs",
    )
    if not res.success:
        raise UnboundedError(f"recession-cone LP failed: {res.message}")
    val = float(res.fun)
    if val < -tol * (1.0 + float(np.abs(z).max(initial=0.0))):
        d = np.array2string(res.x, precision=4)
        raise UnboundedError(
            f"objective decreases along recession direction {d} "
            f"(rate {val:.6g}); the tilted density is not normalizable"
        )
    return val
