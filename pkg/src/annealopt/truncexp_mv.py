"""Exponentially tilted densities on polyhedra and simplices.

Two families live here:

* coordinate Gibbs for densities proportional to exp(m . x) on a polyhedron
  {A x <= b}, built from the exact one-dimensional truncated exponential;
* direct (non-chain) samplers for independent exponentials conditioned on
  their sum staying below one, with a gamma-composition route for equal rates
  and cube rejection for unequal rates, plus the closed-form probability of
  the simplex event used to pick between them.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .errors import BudgetExceededError
from .polytope import coordinate_interval
from .rng import RngStream
from .samplers1d import (
    RATE_SEPARATION_TOL,
    TRIAL_BUDGET,
    expmix_from_rates,
    trunc_exp_sample,
    trunc_gamma_ratio_uniforms,
)

# Mean-rate thresholds for the automatic simplex-sampler choice.
SIMPLEX_RATE_LOW = 0.5
SIMPLEX_RATE_HIGH = 5.0


def texp_gibbs_sweep(m, A, b, x, rng: RngStream):
    """One in-place Gibbs sweep for the density prop. to exp(m . x) on {A x <= b}.

    Degenerate conditional intervals leave the coordinate unchanged.  A flat
    coordinate (m_k = 0) on an unbounded conditional interval raises
    NonNormalizableError from the one-dimensional kernel, which is the runtime
    backstop against tilts with infinite mass.
    """
    m = np.asarray(m, float)
    for k in range(len(x)):
        iv = coordinate_interval(A, b, x, k)
        if iv.width <= 0:
            continue
        x[k] = trunc_exp_sample(m[k], iv, rng)
    return x


def texp_gibbs_chain(m, A, b, x0, n_sweeps: int, rng: RngStream, burnin: int = 0):
    """Run the exponential-tilt Gibbs chain; returns kept sweeps as rows."""
    x = np.asarray(x0, float).copy()
    keep = max(n_sweeps - burnin, 0)
    out = np.empty((keep, len(x)))
    row = 0
    for t in range(n_sweeps):
        texp_gibbs_sweep(m, A, b, x, rng)
        if t >= burnin:
            out[row] = x
            row += 1
    return out


def simplex_uniform(n: int, rng: RngStream, size=None):
    """Uniform draws from the solid simplex {x >= 0, sum x <= 1} in R^n.

    Uses the order-statistic gap construction: the first n spacings of n
    sorted uniforms.  Returns shape (n,) or (size, n).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    k = 1 if size is None else int(size)
    u = np.sort(rng.random((k, n)), axis=1)
    out = np.diff(u, axis=1, prepend=0.0)
    return out[0] if size is None else out


def closed_simplex_uniform(d: int, rng: RngStream):
    """Uniform point on the closed simplex {r >= 0, sum r = 1} in R^d."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if d == 1:
        return np.array([1.0])
    gaps = simplex_uniform(d - 1, rng)
    return np.append(gaps, 1.0 - gaps.sum())


def _rates_equal(rates) -> bool:
    lam = np.asarray(rates, float)
    return float(np.ptp(lam)) <= RATE_SEPARATION_TOL * float(lam.max())


def exp_simplex_prob(rates) -> float:
    """P(sum of independent Exp(rate_j) variables < 1).

    Equal rates use the Poisson tail identity for the gamma CDF; distinct
    rates use the partial-fraction mixture CDF.  Rates that are neither all
    tied nor pairwise separated raise from the mixture constructor.
    """
    lam = np.asarray(rates, float)
    if lam.ndim != 1 or len(lam) == 0:
        raise ValueError("rates must be a non-empty 1-D sequence")
    if np.any(lam <= 0):
        raise ValueError("rates must be positive")
    n = len(lam)
    if _rates_equal(lam):
        return float(stats.poisson.sf(n - 1, float(lam.mean())))
    return expmix_from_rates(lam).cdf(1.0)


def exp_simplex_sample(
    rates,
    rng: RngStream,
    method: str = "auto",
    size=None,
    budget: int = TRIAL_BUDGET,
    rate_low: float = SIMPLEX_RATE_LOW,
    rate_high: float = SIMPLEX_RATE_HIGH,
):
    """Independent Exp(rate_j) draws conditioned on summing to less than one.

    ``method`` is one of:

    * ``"cube"``: propose each coordinate as a truncated exponential on
      [0, 1] and accept when the sum clears the simplex; exact for any rates,
      efficient when they are small.
    * ``"gamma"``: equal rates only; draw the sum from a truncated gamma and
      place it uniformly on the closed simplex.  No rejection on the simplex
      event, so it stays cheap when rates are large.
    * ``"auto"``: gamma when the rates are tied and their mean exceeds
      ``rate_high``; cube when the mean is below ``rate_low``; otherwise gamma
      for tied rates and cube for distinct ones.
    """
    lam = np.asarray(rates, float)
    if np.any(lam <= 0):
        raise ValueError("rates must be positive")
    n = len(lam)
    equal = _rates_equal(lam)

    if method == "auto":
        mean_rate = float(lam.mean())
        if equal and mean_rate > rate_high:
            method = "gamma"
        elif mean_rate < rate_low:
            method = "cube"
        else:
            method = "gamma" if equal else "cube"

    if method == "gamma":
        if not equal:
            raise ValueError("gamma-composition route requires equal rates")
        lam0 = float(lam.mean())
        k = 1 if size is None else int(size)
        out = np.empty((k, n))
        for i in range(k):
            y = trunc_gamma_ratio_uniforms(float(n), lam0, 1.0, rng)
            r = closed_simplex_uniform(n, rng)
            out[i] = y * r
        return out[0] if size is None else out

    if method != "cube":
        raise ValueError(f"unknown method {method!r}")

    k = 1 if size is None else int(size)
    out = np.empty((k, n))
    filled = 0
    trials = 0
    while filled < k:
        batch = max(64, 2 * (k - filled))
        if trials + batch > budget:
            batch = budget - trials
            if batch <= 0:
                raise BudgetExceededError(
                    f"cube rejection for rates {lam} exhausted {budget} trials "
                    f"({filled} accepted)",
                    trials=trials,
                    accepted=filled,
                )
        u = np.maximum(rng.random((batch, n)), 1e-300)
        # Inverse CDF of Exp(lam_j) truncated to [0, 1], anchored at 0.
        q = -np.expm1(-lam)  # P(Exp(lam_j) < 1)
        x = -np.log1p(-u * q) / lam
        acc = x.sum(axis=1) <= 1.0
        x = x[acc]
        trials += batch
        take = min(len(x), k - filled)
        out[filled : filled + take] = x[:take]
        filled += take
    return out[0] if size is None else out
