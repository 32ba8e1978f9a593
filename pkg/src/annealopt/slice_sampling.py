"""Slice-sampling primitives for exponentially tilted targets.

Auxiliary levels turn a Boltzmann factor exp(kappa * f(x)) into uniform
sampling over super-level sets, which composes cleanly with the polyhedral
Gibbs kernels: every conditional stays a (possibly truncated) uniform or
exponential.  This module provides the level draws, closed-form slice regions
for linear objectives, a stepping-out/shrinkage update for one-dimensional
coordinates with non-linear objectives, and a discrete analogue for finite
toy state spaces.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SamplingError
from .rng import RngStream
from .samplers1d import Interval, trunc_exp_sample

SLICE_COLLAPSE_TOL = 1e-14
DEFAULT_MAX_EXPAND = 20
SHRINK_BUDGET = 1000
# kappa * f above this, the capped level distribution is Boltzmann to within
# floating-point resolution (relative error under exp(-8) per factor).
LEVEL_SATURATION = 8.0


def exp_slice_level(f: float, kappa: float, rng: RngStream, sense: str = "max") -> float:
    """Draw the auxiliary level for a weight exp(kappa * f) at objective value f.

    For ``sense="max"`` the slice is {x : f(x) >= u} with u = f + log(U)/kappa;
    for ``sense="min"`` it is {x : f(x) <= u} with u = f + E/kappa.  In both
    cases |u - f| is Exp(kappa).  kappa = 0 returns an infinite level, making
    the slice unrestricted (the uniform limit).
    """
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    if sense == "max":
        if kappa == 0.0:
            return -math.inf
        return f + math.log(max(rng.random(), 1e-300)) / kappa
    if sense == "min":
        if kappa == 0.0:
            return math.inf
        return f + rng.standard_exponential() / kappa
    raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")


def multi_slice_levels(f_vec, kappa: float, rng: RngStream):
    """Per-term levels y_i in [0, f_i] with density prop. to exp(kappa * y).

    Marginalizing the levels out multiplies in a factor (exp(kappa*f_i) - 1)
    per term, which matches the Boltzmann factor exp(kappa*f_i) to relative
    error exp(-kappa*f_i); terms should be shifted so kappa*f_i is at least
    LEVEL_SATURATION wherever the approximation matters.  Requires f_i >= 0.
    """
    f = np.asarray(f_vec, float)
    if np.any(f < 0):
        raise ValueError("term values must be nonnegative; shift the objective")
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    out = np.empty_like(f)
    for i, fi in enumerate(f):
        if fi == 0.0:
            out[i] = 0.0
        elif kappa == 0.0:
            out[i] = fi * rng.random()
        else:
            # f_i - y is a rate-kappa exponential truncated to [0, f_i].
            gap = trunc_exp_sample(-kappa, Interval(0.0, fi), rng)
            out[i] = fi - gap
    return out


def linear_halfline(c: float, s: float, u: float, sense: str = "ge"):
    """Solve {t : c + s*t >= u} (or <= for ``sense="le"``) as an interval.

    Returns an Interval, possibly all of R; returns None when the set is
    empty (degenerate slope with the constant on the wrong side).
    """
    if sense == "le":
        return linear_halfline(-c, -s, -u, "ge")
    if sense != "ge":
        raise ValueError(f"sense must be 'ge' or 'le', got {sense!r}")
    if s > 0:
        return Interval((u - c) / s, math.inf)
    if s < 0:
        return Interval(-math.inf, (u - c) / s)
    return Interval() if c >= u else None


def intersect_intervals(intervals):
    """Intersect intervals; None entries mean empty.  Returns None when empty."""
    lo, hi = -math.inf, math.inf
    for iv in intervals:
        if iv is None:
            return None
        lo = max(lo, iv.lo)
        hi = min(hi, iv.hi)
    if lo > hi:
        return None
    return Interval(lo, hi)


def slice_update_1d(
    logf,
    x0: float,
    level: float,
    support: Interval,
    rng: RngStream,
    w: float | None = None,
    max_expand: int = DEFAULT_MAX_EXPAND,
) -> float:
    """Uniform draw from {x in support : logf(x) >= level} near x0.

    Linear stepping-out with a randomly placed initial window and a capped,
    randomly split expansion budget, then shrinkage toward x0.  ``w`` defaults
    to 10% of the support width (which must then be finite).  The current
    point must itself lie on the slice; a window that shrinks below
    SLICE_COLLAPSE_TOL raises SamplingError.
    """
    if not support.contains(x0):
        raise ValueError(f"x0={x0} outside support [{support.lo}, {support.hi}]")
    if w is None:
        if not support.bounded:
            raise ValueError("w is required on an unbounded support")
        w = 0.1 * support.width
    if w <= 0:
        raise ValueError(f"window width must be positive, got {w}")

    L = x0 - w * rng.random()
    R = L + w
    j = int(math.floor(max_expand * rng.random()))
    k = max_expand - 1 - j
    while j > 0 and L > support.lo and logf(L) >= level:
        L -= w
        j -= 1
    while k > 0 and R < support.hi and logf(R) >= level:
        R += w
        k -= 1
    L = max(L, support.lo)
    R = min(R, support.hi)

    for _ in range(SHRINK_BUDGET):
        if R - L < SLICE_COLLAPSE_TOL * (1.0 + abs(x0)):
            raise SamplingError(
                f"slice window collapsed to [{L}, {R}] around x0={x0}; "
                "level may exceed the local maximum"
            )
        x = L + (R - L) * rng.random()
        if logf(x) >= level:
            return x
        if x < x0:
            L = x
        else:
            R = x
    raise SamplingError("slice shrinkage exhausted its iteration budget")


def discrete_slice_update(logw, i: int, rng: RngStream) -> int:
    """One slice transition on a finite state space with log-weights ``logw``.

    Draws the level under the current weight, then resamples uniformly among
    the states whose weight clears it.  The current state is always in the
    candidate set, so the move is well defined.
    """
    logw = np.asarray(logw, float)
    level = logw[i] + math.log(max(rng.random(), 1e-300))
    cand = np.flatnonzero(logw >= level)
    return int(cand[rng.integers(len(cand))])
