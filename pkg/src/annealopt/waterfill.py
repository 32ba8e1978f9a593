"""Weight-preserving particle thinning by water filling.

Given M weighted particles and a target count N, a level is chosen so that
particles above it are kept deterministically with their weights untouched
while those below are thinned with inclusion probability proportional to
weight; survivors share a common weight.  The kept weights always sum to the
input total exactly, inclusion probabilities are respected exactly (the
below-bar probabilities sum to an integer, so systematic selection draws the
right count), and the per-particle weight variance is the smallest achievable
among unbiased schemes with N survivors.
"""

from __future__ import annotations

import numpy as np

from .rng import RngStream


def waterfill_level(q, N: int):
    """The water-filling multiplier alpha and the above-bar particle mask.

    ``q`` may be unnormalized; alpha is reported on the normalized scale.
    Particles with alpha * q_norm >= 1 are above the bar.  N = M keeps every
    particle and, by convention, alpha = 1 / min(q_norm).
    """
    q = np.asarray(q, float)
    if q.ndim != 1 or len(q) == 0:
        raise ValueError("q must be a non-empty 1-D array")
    if np.any(q < 0) or not np.all(np.isfinite(q)):
        raise ValueError("weights must be finite and nonnegative")
    M = len(q)
    if not 1 <= N <= M:
        raise ValueError(f"need 1 <= N <= {M}, got N={N}")
    total = float(q.sum())
    if total <= 0:
        raise ValueError("weights must not all be zero")
    p = q / total
    if N > int(np.count_nonzero(p)):
        raise ValueError(
            f"N={N} exceeds the {int(np.count_nonzero(p))} particles with positive weight"
        )

    if N == M:
        alpha = 1.0 / float(p.min())
        return alpha, np.ones(M, bool)

    order = np.argsort(p)[::-1]
    ps = p[order]
    cum = np.concatenate([[0.0], np.cumsum(ps)])
    for m in range(N):
        rest = 1.0 - cum[m]
        if rest <= 0:
            continue
        alpha = (N - m) / rest
        if (m == 0 or alpha * ps[m - 1] >= 1.0) and alpha * ps[m] < 1.0:
            above = np.zeros(M, bool)
            above[order[:m]] = True
            return alpha, above
    raise RuntimeError("water-filling scan found no admissible level")


def waterfill_resample(q, N: int, rng: RngStream):
    """Thin M weighted particles to N, preserving total weight exactly.

    Returns ``(keep_idx, new_weights, alpha, inclusion)``: the kept original
    indices in ascending order, their new weights (summing to sum(q)), the
    normalized-scale multiplier, and each particle's inclusion probability.
    Below-bar survivors are chosen by systematic sampling, so exactly N
    particles come back every call.
    """
    q = np.asarray(q, float)
    total = float(q.sum())
    alpha, above = waterfill_level(q, N)
    p = q / total
    M = len(q)

    inclusion = np.minimum(alpha * p, 1.0)
    inclusion[above] = 1.0

    below = np.flatnonzero(~above)
    n_below = N - int(above.sum())
    if n_below == 0:
        keep = np.flatnonzero(above)
    elif len(below) == n_below:
        keep = np.arange(M)
    else:
        probs = inclusion[below]
        # Systematic pass: probabilities sum to n_below by construction.
        cum = np.cumsum(probs)
        cum[-1] = n_below  # guard rounding in the last slot
        marks = rng.random() + np.arange(n_below)
        chosen = below[np.searchsorted(cum, marks, side="right")]
        keep = np.sort(np.concatenate([np.flatnonzero(above), chosen]))

    new_w = np.where(above[keep], q[keep], total / alpha)
    return keep, new_w, alpha, inclusion


def thinning_mse(q, inclusion) -> float:
    """Sum of per-particle weight variances for an unbiased thinning scheme.

    Each particle's resampled weight is q_j / p_j with probability p_j and 0
    otherwise, giving variance q_j^2 (1/p_j - 1); deterministic keeps
    contribute nothing.
    """
    q = np.asarray(q, float)
    p = np.asarray(inclusion, float)
    live = (q > 0) & (p < 1.0)
    return float(np.sum(q[live] ** 2 * (1.0 / p[live] - 1.0)))


def multinomial_mse(q, N: int) -> float:
    """Same variance total for multinomial resampling with N draws."""
    p = np.asarray(q, float)
    p = p / p.sum()
    return float(np.sum(p * (1.0 - p)) / N)
