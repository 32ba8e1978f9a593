"""Exact one-dimensional samplers used as Gibbs building blocks.

The workhorses are the truncated exponential (inverse CDF, exact), the
truncated normal (inverse CDF with a tail-stable log parameterization, plus a
one-sided exponential-envelope rejection fallback for far tails), a truncated
gamma via ratio-of-uniforms, an accept/reject scheme for densities of the form
f(x)F(x) with F a distribution function, and finite mixtures of exponentials
(sums of independent exponentials) inverted by bisection.

Sign convention: ``m`` is always the coefficient of x in the log-density, i.e.
the target is proportional to exp(m*x) on the interval.  A rate-lambda
exponential therefore has m = -lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import BudgetExceededError, NonNormalizableError, SamplingError
from .rng import RngStream

TRIAL_BUDGET = 1_000_000
# |m| * width below this: treat the tilt as flat and sample uniformly.
FLAT_TILT_TOL = 1e-12
# Truncated-normal intervals with at least this much mass use the inverse CDF;
# smaller (far-tail) intervals fall back to envelope rejection.
NORMAL_MASS_FLOOR = 1e-12
# Conditional tail mass below this is treated as numerically zero.
NORMAL_MASS_HARD_FLOOR = 1e-10
# Relative separation below which exponential rates are considered tied.
RATE_SEPARATION_TOL = 1e-6


@dataclass(frozen=True)
class Interval:
    """A sampling interval [lo, hi]; either end may be infinite.

    lo == hi is representable (it arises from pinned Gibbs slices) but the
    continuous samplers reject it as a zero-mass interval.
    """

    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"interval has lo={self.lo} > hi={self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))


def _check_trunc_exp_normalizable(m: float, lo: float, hi: float):
    if m > 0 and not math.isfinite(hi):
        raise NonNormalizableError(
            f"density exp({m}*x) on ({lo}, {hi}) has infinite mass (unbounded above)"
        )
    if m < 0 and not math.isfinite(lo):
        raise NonNormalizableError(
            f"density exp({m}*x) on ({lo}, {hi}) has infinite mass (unbounded below)"
        )
    if m == 0 and not (math.isfinite(lo) and math.isfinite(hi)):
        raise NonNormalizableError(
            f"flat density on ({lo}, {hi}) has infinite mass"
        )


def _trunc_exp_core(m, lo, hi, u):
    """Vectorized inverse CDF for density prop. to exp(m*x) on (lo, hi).

    Anchors at the endpoint where the mass concentrates, with log1p guards so
    extreme tilts (|m|*(hi-lo) in the hundreds) stay accurate.
    """
    m = np.asarray(m, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    u = np.asarray(u, dtype=float)
    m, lo, hi, u = np.broadcast_arrays(m, lo, hi, u)
    out = np.empty(u.shape, dtype=float)

    width = hi - lo
    flat = np.abs(m) * np.where(np.isfinite(width), width, np.inf) < FLAT_TILT_TOL
    pos = (m > 0) & ~flat
    neg = (m < 0) & ~flat

    if np.any(flat):
        out[flat] = lo[flat] + u[flat] * width[flat]

    if np.any(pos):
        mp, lp, hp, up = m[pos], lo[pos], hi[pos], u[pos]
        q = np.exp(mp * (lp - hp))  # in [0, 1); 0 when lo = -inf
        val = q + up * (1.0 - q)
        # log(val) via log1p when val is near 1 (u near 1, the mass end).
        res = np.where(
            val > 0.5,
            np.log1p(-(1.0 - up) * (1.0 - q)),
            np.log(np.maximum(val, np.finfo(float).tiny)),
        )
        out[pos] = hp + res / mp

    if np.any(neg):
        mn, ln, hn, un = m[neg], lo[neg], hi[neg], u[neg]
        r = np.exp(mn * (hn - ln))  # in [0, 1); 0 when hi = +inf
        out[neg] = ln + np.log1p(-un * (1.0 - r)) / mn

    return np.clip(out, lo, hi)


def trunc_exp_inverse_cdf(m: float, interval: Interval, u):
    """Inverse CDF of the density prop. to exp(m*x) restricted to ``interval``.

    ``u`` may be a scalar or an array of values in [0, 1]; the map is monotone
    increasing in u with u=0 -> lo and u=1 -> hi.  m = 0 falls back to the
    uniform interpolant.  Raises for intervals over which the density is not
    normalizable or has zero width.
    """
    if interval.width <= 0:
        raise ValueError(f"interval {interval} has zero width")
    _check_trunc_exp_normalizable(m, interval.lo, interval.hi)
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0.0) or np.any(u_arr > 1.0):
        raise ValueError("u must lie in [0, 1]")
    out = _trunc_exp_core(m, interval.lo, interval.hi, u_arr)
    return float(out) if np.isscalar(u) or u_arr.ndim == 0 else out


def trunc_exp_mean(m: float, interval: Interval) -> float:
    """Mean of the density prop. to exp(m*x) on ``interval``.

    Written as (mass-end) - width * g(|m| * width) with
    g(e) = 1/e - 1/(exp(e) - 1), which is stable from the flat limit
    (g -> 1/2) through hard tilts (g -> 1/e).
    """
    lo, hi = interval.lo, interval.hi
    if interval.width <= 0:
        return lo
    _check_trunc_exp_normalizable(m, lo, hi)
    if m == 0.0:
        return 0.5 * (lo + hi)
    if m > 0 and not math.isfinite(lo):
        return hi - 1.0 / m
    if m < 0 and not math.isfinite(hi):
        return lo - 1.0 / m
    eps = abs(m) * (hi - lo)
    if eps < 1e-6:
        g = 0.5 - eps / 12.0
    elif eps > 700.0:
        # expm1 overflows; its reciprocal is already below double precision.
        g = 1.0 / eps
    else:
        g = 1.0 / eps - 1.0 / math.expm1(eps)
    if m > 0:
        return hi - (hi - lo) * g
    return lo + (hi - lo) * g


def trunc_exp_sample(m: float, interval: Interval, rng: RngStream, size=None):
    """Draw from the density prop. to exp(m*x) on ``interval``."""
    u = rng.random(size)
    # random() can return exactly 0; nudge so unbounded ends never yield inf.
    u = np.maximum(u, 1e-300) if size is not None else max(u, 1e-300)
    return trunc_exp_inverse_cdf(m, interval, u)


def trunc_exp_sample_arr(m, lo, hi, rng: RngStream):
    """Vectorized truncated-exponential draws with per-element bounds.

    ``m``, ``lo`` and ``hi`` broadcast against each other; one draw per
    broadcast element.  Normalizability is checked elementwise.
    """
    m_b, lo_b, hi_b = np.broadcast_arrays(
        np.asarray(m, float), np.asarray(lo, float), np.asarray(hi, float)
    )
    if np.any(hi_b - lo_b <= 0):
        bad = int(np.argmax(hi_b - lo_b <= 0))
        raise ValueError(f"zero-width interval at index {bad}: [{lo_b.flat[bad]}, {hi_b.flat[bad]}]")
    if np.any((m_b > 0) & ~np.isfinite(hi_b)) or np.any((m_b < 0) & ~np.isfinite(lo_b)):
        raise NonNormalizableError("unbounded interval on the heavy side of the tilt")
    if np.any((m_b == 0) & (~np.isfinite(lo_b) | ~np.isfinite(hi_b))):
        raise NonNormalizableError("flat tilt on an unbounded interval")
    u = np.maximum(rng.random(m_b.shape), 1e-300)
    return _trunc_exp_core(m_b, lo_b, hi_b, u)


def _log_ndtr(x):
    return special.log_ndtr(x)


def _std_trunc_normal(a: float, b: float, rng: RngStream, size=None):
    """Standard normal conditioned to [a, b] (a < b, possibly infinite)."""
    if b <= 0.0:
        # Mirror into the right tail / upper half.
        draw = _std_trunc_normal(-b, -a, rng, size)
        return -draw

    if a >= 0.0:
        # Work in upper-tail probabilities, all in log space: stable for a >> 0.
        la = _log_ndtr(-a)  # log P(Z > a)
        lb = _log_ndtr(-b) if math.isfinite(b) else -math.inf
        # Conditional mass of [a, b] within the tail beyond a.
        with np.errstate(over="ignore"):
            cond = -math.expm1(lb - la)  # 1 - exp(lb - la)
        if cond < NORMAL_MASS_HARD_FLOOR:
            raise SamplingError(
                f"normal interval [{a}, {b}] has conditional tail mass "
                f"{cond:.3e} below {NORMAL_MASS_HARD_FLOOR:.0e}"
            )
        mass = math.exp(la) * cond
        if mass >= NORMAL_MASS_FLOOR:
            u = rng.random(size)
            # P(Z > z) = qa - u*(qa - qb); invert through the log tail.
            logq = la + np.log1p(-u * cond)
            return -special.ndtri_exp(logq)
        return _tail_rejection(a, b, rng, size)

    # a < 0 < b: central interval, plain probabilities are fine.
    pa = special.ndtr(a)
    pb = special.ndtr(b)
    mass = pb - pa
    if mass >= NORMAL_MASS_FLOOR:
        u = rng.random(size)
        return special.ndtri(pa + u * mass)
    # Mass this small with 0 inside the interval means the interval is tiny;
    # the density is constant over it to first order.
    u = rng.random(size)
    return a + u * (b - a)


def _tail_rejection(a: float, b: float, rng: RngStream, size=None):
    """One-sided exponential-envelope rejection for Z | Z in [a, b], a > 0."""
    lam = 0.5 * (a + math.sqrt(a * a + 4.0))
    n = 1 if size is None else int(np.prod(size))
    out = np.empty(n)
    filled = 0
    trials = 0
    while filled < n:
        batch = max(64, 2 * (n - filled))
        if trials + batch > TRIAL_BUDGET:
            batch = TRIAL_BUDGET - trials
            if batch <= 0:
                raise BudgetExceededError(
                    f"tail rejection on [{a}, {b}] exhausted {TRIAL_BUDGET} trials "
                    f"({filled} accepted)",
                    trials=trials,
                    accepted=filled,
                )
        x = a - np.log(np.maximum(rng.random(batch), 1e-300)) / lam
        acc = rng.random(batch) < np.exp(-0.5 * (x - lam) ** 2)
        x = x[acc & (x <= b)]
        trials += batch
        take = min(len(x), n - filled)
        out[filled : filled + take] = x[:take]
        filled += take
    if size is None:
        return float(out[0])
    return out.reshape(size)


def trunc_normal_sample(mean: float, sd: float, interval: Interval, rng: RngStream, size=None):
    """Draw from N(mean, sd^2) conditioned to ``interval``.

    Uses the inverse CDF (tail-stable, via log tail probabilities) whenever the
    interval mass is at least 1e-12, and one-sided exponential-envelope
    rejection for far-tail intervals beyond that.  Zero-width intervals and
    intervals of numerically zero mass raise.
    """
    if sd <= 0:
        raise ValueError(f"sd must be positive, got {sd}")
    if interval.width <= 0:
        raise SamplingError(
            f"zero-mass interval [{interval.lo}, {interval.hi}] for truncated normal"
        )
    a = (interval.lo - mean) / sd
    b = (interval.hi - mean) / sd
    z = _std_trunc_normal(a, b, rng, size)
    out = mean + sd * np.asarray(z)
    out = np.clip(out, interval.lo, interval.hi)
    return float(out) if size is None else out


def trunc_normal_sample_arr(mean, lo, hi, rng: RngStream):
    """Unit-variance truncated-normal draws with per-element bounds.

    Vectorized over broadcast (mean, lo, hi); intended for sweeps that update
    many independent coordinates with the same structure.  Falls back to the
    scalar path for elements whose interval mass is below the inverse-CDF
    floor.
    """
    mean_b, lo_b, hi_b = np.broadcast_arrays(
        np.asarray(mean, float), np.asarray(lo, float), np.asarray(hi, float)
    )
    a = lo_b - mean_b
    b = hi_b - mean_b
    pa = special.ndtr(a)
    pb = special.ndtr(b)
    mass = pb - pa
    easy = mass >= NORMAL_MASS_FLOOR
    out = np.empty(mean_b.shape, dtype=float)
    if np.any(easy):
        u = rng.random(mean_b.shape)
        with np.errstate(invalid="ignore"):
            out[easy] = special.ndtri(pa[easy] + u[easy] * mass[easy])
    hard = np.flatnonzero(~easy.ravel())
    for idx in hard:
        out.flat[idx] = _std_trunc_normal(a.flat[idx], b.flat[idx], rng)
    return mean_b + np.clip(out, a, b)


def trunc_gamma_ratio_uniforms(shape: float, rate: float, upper: float, rng: RngStream, size=None):
    """Gamma(shape, rate) conditioned to [0, upper] via ratio of uniforms.

    Works on the unit-rate scale X = rate * Y with support [0, T], T = rate *
    upper, and applies the location shift W = X - min(shape, T) before
    enveloping so the acceptance rectangle stays tight.  shape >= 1 and a
    finite upper bound are required.
    """
    if shape < 1.0:
        raise ValueError(f"shape must be >= 1, got {shape}")
    if rate <= 0.0:
        raise ValueError(f"rate must be positive, got {rate}")
    if not math.isfinite(upper) or upper <= 0.0:
        raise ValueError(f"upper must be finite and positive, got {upper}")

    T = rate * upper
    s = shape
    c = min(s, T)

    xmode = min(max(s - 1.0, 0.0), T)

    def logf(x):
        # Unnormalized log density of Gamma(shape, 1) on [0, T].
        with np.errstate(divide="ignore"):
            return np.where(x > 0, (s - 1.0) * np.log(np.maximum(x, 1e-320)), 0.0 if s == 1.0 else -np.inf) - x

    lf_max = float(logf(np.asarray(xmode))) if xmode > 0 or s == 1.0 else 0.0
    if not math.isfinite(lf_max):
        lf_max = float(logf(np.asarray(max(xmode, 1e-12))))

    def g(x):
        # (x - c) * sqrt of the normalized density; extrema give the V bounds.
        lf = logf(np.asarray(x, float)) - lf_max
        return (np.asarray(x, float) - c) * np.exp(0.5 * lf)

    # Critical points of g solve x^2 - (s + 1 + c) x + c (s - 1) = 0.
    B = s + 1.0 + c
    disc = B * B - 4.0 * c * (s - 1.0)
    cand = [T]
    if s == 1.0:
        cand.append(0.0)
    else:
        cand.append(1e-300)
    if disc >= 0.0:
        r = math.sqrt(disc)
        for root in ((B - r) / 2.0, (B + r) / 2.0):
            if 0.0 < root < T:
                cand.append(root)
    gv = g(np.array(cand))
    v_hi = max(float(np.max(gv)), 0.0) * (1.0 + 1e-9)
    v_lo = min(float(np.min(gv)), 0.0) * (1.0 + 1e-9)

    n = 1 if size is None else int(np.prod(size))
    out = np.empty(n)
    filled = 0
    trials = 0
    while filled < n:
        batch = max(128, 2 * (n - filled))
        if trials >= TRIAL_BUDGET:
            raise BudgetExceededError(
                f"ratio-of-uniforms for Gamma({shape}, {rate}) on [0, {upper}] "
                f"exhausted {TRIAL_BUDGET} trials ({filled} accepted)",
                trials=trials,
                accepted=filled,
            )
        u = rng.random(batch)
        v = v_lo + (v_hi - v_lo) * rng.random(batch)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = v / np.maximum(u, 1e-300) + c
        ok = (w >= 0.0) & (w <= T) & (u > 0.0)
        if np.any(ok):
            lw = logf(w[ok]) - lf_max
            ok2 = 2.0 * np.log(u[ok]) <= lw
            w = w[ok][ok2]
        else:
            w = w[:0]
        trials += batch
        take = min(len(w), n - filled)
        out[filled : filled + take] = w[:take]
        filled += take
    out = out / rate
    if size is None:
        return float(out[0])
    return out.reshape(size)


def vaduva_sample(f_sampler, cdf_sampler, rng: RngStream, budget: int = TRIAL_BUDGET):
    """Accept/reject draw from the density prop. to f(x) * F(x).

    ``f_sampler(rng)`` draws from density f; ``cdf_sampler(rng)`` draws a
    variable whose distribution function is F.  A pair (X, Y) is accepted when
    X >= Y, which leaves X with density proportional to f * F.  Returns
    ``(x, trials)``.
    """
    for trials in range(1, budget + 1):
        x = f_sampler(rng)
        y = cdf_sampler(rng)
        if x >= y:
            return x, trials
    raise BudgetExceededError(
        f"accept/reject (X >= Y) exhausted {budget} trials", trials=budget, accepted=0
    )


@dataclass(frozen=True)
class ExpMixture:
    """Distribution of a sum of independent exponentials with distinct rates.

    The CDF is sum_j a_j (1 - exp(-rate_j * y)) with the partial-fraction
    weights a_j = prod_{i != j} rate_i / (rate_i - rate_j); weights may be
    negative but always sum to one.
    """

    rates: np.ndarray
    weights: np.ndarray

    def cdf(self, y):
        arr = np.atleast_1d(np.asarray(y, dtype=float))
        terms = self.weights * -np.expm1(-np.outer(arr, self.rates))
        out = terms.sum(axis=-1)
        return float(out[0]) if np.ndim(y) == 0 else out

    def pdf(self, y):
        arr = np.atleast_1d(np.asarray(y, dtype=float))
        terms = self.weights * self.rates * np.exp(-np.outer(arr, self.rates))
        out = terms.sum(axis=-1)
        return float(out[0]) if np.ndim(y) == 0 else out


def expmix_from_rates(rates) -> ExpMixture:
    """Build the sum-of-exponentials distribution for the given distinct rates."""
    lam = np.asarray(rates, dtype=float)
    if lam.ndim != 1 or len(lam) == 0:
        raise ValueError("rates must be a non-empty 1-D sequence")
    if np.any(lam <= 0):
        raise ValueError("rates must be positive")
    scale = float(np.max(lam))
    for i in range(len(lam)):
        for j in range(i + 1, len(lam)):
            if abs(lam[i] - lam[j]) < RATE_SEPARATION_TOL * scale:
                raise ValueError(
                    f"rates {lam[i]} and {lam[j]} are closer than the "
                    f"{RATE_SEPARATION_TOL:.0e} relative separation tolerance; "
                    "use the equal-rate route instead"
                )
    a = np.ones(len(lam))
    for j in range(len(lam)):
        for i in range(len(lam)):
            if i != j:
                a[j] *= lam[i] / (lam[i] - lam[j])
    if abs(a.sum() - 1.0) > 1e-10 * max(1.0, float(np.abs(a).max())):
        raise ValueError(f"partial-fraction weights sum to {a.sum()}, expected 1")
    return ExpMixture(rates=lam, weights=a)


def expmix_below_one(mix: ExpMixture) -> float:
    """P(sum of the exponentials < 1), i.e. the CDF at 1."""
    return float(mix.cdf(1.0))


def expmix_sample(mix: ExpMixture, rng: RngStream, size=None, tol: float = 1e-12):
    """Sample the sum by bracketed bisection on the CDF (weights may be negative)."""
    n = 1 if size is None else int(np.prod(size))
    u = rng.random(n)
    lo = np.zeros(n)
    hi = np.full(n, 1.0)
    # Grow brackets until the CDF clears each u.
    for _ in range(200):
        short = mix.cdf(hi) < u
        if not np.any(short):
            break
        hi[short] *= 2.0
    else:
        raise SamplingError("failed to bracket the mixture CDF")
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        below = mix.cdf(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    if size is None:
        return float(out[0])
    return out.reshape(size)
