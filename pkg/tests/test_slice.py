import math

import numpy as np
import pytest
from scipy import stats

from annealopt.errors import SamplingError
from annealopt.rng import RngStream
from annealopt.samplers1d import Interval
from annealopt.slice_sampling import (
    discrete_slice_update,
    exp_slice_level,
    intersect_intervals,
    linear_halfline,
    multi_slice_levels,
    slice_update_1d,
)

KS_ALPHA = 0.01


def test_exp_slice_level_gap_distribution():
    rng = RngStream(11)
    kappa = 3.0
    gaps_max = np.array([2.0 - exp_slice_level(2.0, kappa, rng, "max") for _ in range(20000)])
    gaps_min = np.array([exp_slice_level(2.0, kappa, rng, "min") - 2.0 for _ in range(20000)])
    assert np.all(gaps_max > 0) and np.all(gaps_min > 0)
    assert stats.kstest(gaps_max, stats.expon(scale=1 / kappa).cdf).pvalue > KS_ALPHA
    assert stats.kstest(gaps_min, stats.expon(scale=1 / kappa).cdf).pvalue > KS_ALPHA


def test_exp_slice_level_zero_kappa_unrestricted():
    rng = RngStream(0)
    assert exp_slice_level(5.0, 0.0, rng, "max") == -math.inf
    assert exp_slice_level(5.0, 0.0, rng, "min") == math.inf
    with pytest.raises(ValueError):
        exp_slice_level(5.0, -1.0, rng)
    with pytest.raises(ValueError):
        exp_slice_level(5.0, 1.0, rng, sense="between")


def test_multi_slice_levels_marginal():
    # Each y_i on [0, f_i] with density prop. to exp(kappa*y): the gap f - y
    # is a truncated exponential.
    rng = RngStream(12)
    f = np.array([1.5, 0.0, 3.0])
    draws = np.array([multi_slice_levels(f, 2.0, rng) for _ in range(20000)])
    assert np.all(draws[:, 1] == 0.0)
    assert np.all((draws[:, 0] >= 0) & (draws[:, 0] <= 1.5))
    gap = 3.0 - draws[:, 2]
    cdf = lambda t: np.expm1(-2.0 * t) / np.expm1(-2.0 * 3.0)
    assert stats.kstest(gap, cdf).pvalue > KS_ALPHA


def test_multi_slice_levels_flat_and_invalid():
    rng = RngStream(13)
    y = np.array([multi_slice_levels([2.0], 0.0, rng)[0] for _ in range(20000)])
    assert stats.kstest(y / 2.0, "uniform").pvalue > KS_ALPHA
    with pytest.raises(ValueError):
        multi_slice_levels([-0.5, 1.0], 1.0, rng)


def test_linear_halfline_cases():
    iv = linear_halfline(1.0, 2.0, 2.0)  # 1 + 2t >= 2
    assert iv.lo == pytest.approx(0.5) and iv.hi == math.inf
    iv = linear_halfline(1.0, -2.0, 2.0)  # 1 - 2t >= 2
    assert iv.hi == pytest.approx(-0.5) and iv.lo == -math.inf
    iv = linear_halfline(1.0, 2.0, 2.0, sense="le")
    assert iv.hi == pytest.approx(0.5)
    assert linear_halfline(3.0, 0.0, 2.0) is not None
    assert linear_halfline(1.0, 0.0, 2.0) is None


def test_intersect_intervals():
    got = intersect_intervals([Interval(0.0, 5.0), Interval(1.0, 2.0)])
    assert (got.lo, got.hi) == (1.0, 2.0)
    assert intersect_intervals([Interval(0.0, 1.0), None]) is None
    assert intersect_intervals([Interval(0.0, 1.0), Interval(2.0, 3.0)]) is None


def test_slice_update_1d_preserves_uniform_on_slice():
    # One update started from a uniform point on the slice {-x^2 >= -1} must
    # leave it uniform (kernel invariance); points never leave the slice.
    rng = RngStream(14)
    level = -1.0
    support = Interval(-3.0, 3.0)
    out = np.empty(20000)
    for i in range(len(out)):
        x0 = -1.0 + 2.0 * rng.random()
        out[i] = slice_update_1d(lambda x: -x * x, x0, level, support, rng)
    assert np.all(np.abs(out) <= 1.0 + 1e-12)
    assert stats.kstest((out + 1.0) / 2.0, "uniform").pvalue > KS_ALPHA


def test_slice_chain_targets_boltzmann():
    # Alternating level and coordinate updates target exp(kappa * f) on the
    # support; here that is a truncated Gaussian.
    rng = RngStream(15)
    kappa = 2.0
    support = Interval(-3.0, 3.0)
    f = lambda x: -x * x
    x = 0.5
    draws = np.empty(20000)
    for i in range(len(draws)):
        u = exp_slice_level(f(x), kappa, rng, "max")
        x = slice_update_1d(f, x, u, support, rng)
        draws[i] = x
    sd = 1.0 / math.sqrt(2.0 * kappa)
    ref = stats.truncnorm(-3.0 / sd, 3.0 / sd, scale=sd)
    assert stats.kstest(draws[::10], ref.cdf).pvalue > KS_ALPHA


def test_slice_update_1d_validation():
    rng = RngStream(0)
    with pytest.raises(ValueError):
        slice_update_1d(lambda x: 0.0, 2.0, -1.0, Interval(0.0, 1.0), rng)
    with pytest.raises(ValueError):
        slice_update_1d(lambda x: 0.0, 0.0, -1.0, Interval(-math.inf, math.inf), rng)
    with pytest.raises(SamplingError):
        # Level above the maximum: every proposal fails and the window collapses.
        slice_update_1d(lambda x: -x * x, 0.0, 1.0, Interval(-1.0, 1.0), rng)


def test_discrete_slice_update_stationarity():
    # Chain on 4 states; empirical visit frequencies must match the weights.
    logw = np.log(np.array([0.1, 0.4, 0.2, 0.3]))
    rng = RngStream(16)
    i = 0
    counts = np.zeros(4)
    n = 200000
    for _ in range(n):
        i = discrete_slice_update(logw, i, rng)
        counts[i] += 1
    freq = counts / n
    assert np.max(np.abs(freq - np.exp(logw))) < 0.01
