"""Independent reference implementations the tests compare against.

Everything here is deliberately built on numpy/scipy primitives rather than
the package's own kernels, so a bug in a sampler cannot hide in its oracle.
"""

import math

import numpy as np
from scipy.integrate import quad


def box_rejection_uniform(A, b, box_lo, box_hi, n, gen, tilt=None, max_batches=200):
    """Rejection draws from {A x <= b} inside a covering box.

    Uniform when ``tilt`` is None, otherwise density prop. to exp(tilt . x).
    ``gen`` is a plain numpy Generator (not the package's stream type).
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    lo = np.asarray(box_lo, float)
    hi = np.asarray(box_hi, float)
    d = len(lo)
    out = []
    got = 0
    for _ in range(max_batches):
        cand = lo + (hi - lo) * gen.random((max(4 * n, 10000), d))
        ok = np.all(A @ cand.T <= b[:, None], axis=0)
        cand = cand[ok]
        if tilt is not None and len(cand):
            logw = cand @ np.asarray(tilt, float)
            logw -= logw.max()
            cand = cand[gen.random(len(cand)) < np.exp(logw)]
        out.append(cand)
        got += len(cand)
        if got >= n:
            break
    pts = np.vstack(out)
    if len(pts) < n:
        raise RuntimeError(f"rejection oracle starved: {len(pts)}/{n}")
    return pts[:n]


def mvn_box_rejection(mean, cov, A, b, n, gen):
    """Rejection draws from N(mean, cov) restricted to {A x <= b}."""
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    out = []
    got = 0
    for _ in range(200):
        cand = gen.multivariate_normal(mean, cov, size=max(4 * n, 10000))
        ok = np.all(A @ cand.T <= b[:, None], axis=0)
        cand = cand[ok]
        out.append(cand)
        got += len(cand)
        if got >= n:
            break
    pts = np.vstack(out)
    if len(pts) < n:
        raise RuntimeError(f"MVN rejection oracle starved: {len(pts)}/{n}")
    return pts[:n]


def lp_primal_optimum(c, b_coef, t):
    """Closed-form optimum of max c1 x1 + c2 x2 on {x1 + b x2 = t, x >= 0}."""
    return max(c[0] * t, c[1] * t / b_coef)


def segment_log_partition(profile_value, knots, kappa):
    """log integral of exp(kappa * profile) via per-segment scaled quadrature.

    ``knots`` must include every kink of the piecewise-affine profile, so each
    quad call sees a single smooth exponential.
    """
    seg = []
    for t0, t1 in zip(knots, knots[1:]):
        m = max(kappa * profile_value(t0), kappa * profile_value(t1))
        val, _ = quad(
            lambda y: math.exp(kappa * profile_value(y) - m),
            t0,
            t1,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=400,
        )
        seg.append(m + math.log(max(val, 1e-300)))
    top = max(seg)
    return top + math.log(sum(math.exp(s - top) for s in seg))


def farmer_outer_objective(problem, recourse_optimum, x, omega):
    """Deterministic outer objective: exact recourse minus planting cost."""
    val, _ = recourse_optimum(problem, x, omega)
    return val - problem.plant_cost * x


def grid_vertex_argmax(problem, recourse_optimum, omega, n_grid=200):
    """Argmax of the outer objective over a grid joined with the kink set.

    The kinks of the piecewise-linear recourse in x are where each resource
    row stops binding; adding them (and the land cap) makes the finite search
    exact for this problem class.
    """
    lo, hi = 0.0, problem.land
    cands = set(np.linspace(lo, hi, n_grid + 1)[1:])
    (a11, a12), (a21, a22) = problem.rows
    for m in problem.multipliers:
        w1 = m * problem.omega0[0]
        w2 = m * problem.omega0[1]
        # Activity sums at the single-row caps and at the two-row corner.
        cands.add(min(w1 / a11, hi))
        det = a11 * a22 - a12 * a21
        if abs(det) > 1e-12:
            y1 = (a22 * w1 - a12 * w2) / det
            y2 = (a11 * w2 - a21 * w1) / det
            if y1 >= 0 and y2 >= 0:
                cands.add(min(y1 + y2, hi))
    cands = sorted(c for c in cands if lo < c <= hi)
    vals = [
        farmer_outer_objective(problem, recourse_optimum, x, np.asarray(omega, float))
        for x in cands
    ]
    k = int(np.argmax(vals))
    grid_step = (hi - lo) / n_grid
    return cands[k], vals[k], grid_step
