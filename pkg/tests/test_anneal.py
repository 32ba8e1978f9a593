import numpy as np
import pytest
from scipy import stats

from annealopt.anneal import (
    AnnealResult,
    Schedule,
    batch_se,
    default_schedule,
    solve_lp_dual,
    top_draws,
)
from annealopt.errors import InfeasibleError, UnboundedError
from annealopt.problems import build, load_problem
from annealopt.rng import RngStream
from oracles import box_rejection_uniform, lp_primal_optimum

KS_ALPHA = 0.01


def test_schedule_validation_and_defaults():
    s = default_schedule()
    assert s.kappas == (1.0, 5.0, 25.0, 125.0, 625.0)
    assert s.sweeps == (2000, 2000, 2000, 2000, 10000)
    assert s.burnin(0) == 1000
    with pytest.raises(ValueError):
        Schedule((1.0, 0.5), (10, 10))  # decreasing
    with pytest.raises(ValueError):
        Schedule((-1.0,), (10,))
    with pytest.raises(ValueError):
        Schedule((1.0,), (0,))
    with pytest.raises(ValueError):
        Schedule((1.0, 2.0), (10,))
    s2 = Schedule.from_kappas((1.0, 8.0), sweeps=500)
    assert s2.sweeps == (500, 10000)
    s3 = Schedule.from_kappas((1.0, 8.0), sweeps=500, final_sweeps=700)
    assert s3.sweeps == (500, 700)


def test_batch_se_iid_scaling(gen):
    x = gen.standard_normal(20000)
    se = batch_se(x)
    # For iid draws the batch-means SE estimates sigma/sqrt(n).
    assert se == pytest.approx(1.0 / np.sqrt(len(x)), rel=0.5)
    assert np.isnan(batch_se([1.0]))


def test_top_draws_dedupes():
    draws = np.array([[0.0], [1.0], [0.0], [2.0], [3.0]])
    vals = np.array([5.0, 1.0, 5.0, 2.0, 0.5])
    x, v = top_draws(draws, vals, k=3)
    assert list(v) == [0.5, 1.0, 2.0]
    assert [row[0] for row in x] == [3.0, 1.0, 2.0]
    x2, v2 = top_draws(draws, vals, k=2, sense="max")
    assert list(v2) == [5.0, 2.0]
    with pytest.raises(ValueError):
        top_draws(draws, vals, sense="sideways")


def _pincus_instance(name):
    z, W, q, meta = build(load_problem(name))
    return np.asarray(z), np.asarray(W), np.asarray(q), meta


def test_lp_dual_level_means_monotone():
    # Higher kappa concentrates toward the optimum, so per-level objective
    # means must be nonincreasing up to Monte Carlo error.
    z, W, q, meta = _pincus_instance("pincus")
    res = solve_lp_dual(z, W, q, Schedule.geometric(levels=4), RngStream(51))
    stats_ = res.level_stats
    for a, b in zip(stats_, stats_[1:]):
        se = np.hypot(a.value_se, b.value_se)
        assert b.value_mean <= a.value_mean + se
    assert res.value_rb == pytest.approx(meta["primal_optimum"], rel=0.05)


def test_lp_dual_kappa_zero_is_uniform(gen):
    # A single kappa=0 level on a bounded polyhedron is plain uniform
    # sampling; compare marginals with a rejection oracle.
    A = np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0], [1.0, 0.3]])
    b = np.array([0.0, 0.0, 1.0, 0.8])
    z = np.array([1.0, 1.0])
    res = solve_lp_dual(z, A.T, b, Schedule((0.0,), (24000,)), RngStream(52))
    kept = res.draws[::4]
    ref = box_rejection_uniform(A, b, [0.0, 0.0], [1.0, 1.0], len(kept), gen)
    for k in range(2):
        assert stats.ks_2samp(kept[:, k], ref[:, k]).pvalue > KS_ALPHA


def test_lp_dual_recorded_draws_feasible():
    z, W, q, _ = _pincus_instance("pincus")
    res = solve_lp_dual(z, W, q, Schedule.from_kappas((1.0, 10.0), 400, 400), RngStream(53), record_trace=True)
    A = W.T
    slack = q[None, :] - res.draws @ A.T
    assert np.all(slack >= -1e-9 * (1.0 + np.abs(q)[None, :]))
    # Trace rows mirror the kept draws of each level.
    assert res.trace is not None
    assert res.trace_columns[:4] == ("level", "sweep", "kappa", "value")
    pi_cols = res.trace[:, 4:]
    tr_slack = q[None, :] - pi_cols @ A.T
    assert np.all(tr_slack >= -1e-9 * (1.0 + np.abs(q)[None, :]))


def test_lp_dual_zero_objective_short_circuits():
    z, W, q, _ = _pincus_instance("pincus")
    res = solve_lp_dual(np.zeros_like(z), W, q, rng=RngStream(54))
    assert res.value_rb == 0.0 and res.best_value == 0.0
    assert len(res.values) == 1


def test_lp_dual_unbounded_detected():
    z, W, q, _ = _pincus_instance("pincus_flipped")
    # Reversing the objective makes it decrease along a recession direction.
    with pytest.raises(UnboundedError):
        solve_lp_dual(-z, W, q, Schedule((1.0,), (10,)), RngStream(55))


def test_lp_dual_infeasible_detected():
    A = np.array([[1.0], [-1.0]])
    b = np.array([-1.0, -1.0])
    with pytest.raises(InfeasibleError):
        solve_lp_dual(np.ones(1), A.T, b, Schedule((1.0,), (10,)), RngStream(56))


def test_lp_dual_matches_primal_oracle_both_orderings():
    for name in ("pincus", "pincus_flipped"):
        z, W, q, meta = _pincus_instance(name)
        cfg = load_problem(name)
        assert meta["primal_optimum"] == pytest.approx(
            lp_primal_optimum(cfg["c"], cfg["b_coef"], cfg["t"])
        )
        res = solve_lp_dual(z, W, q, Schedule.from_kappas((1.0, 8.0, 40.0, 200.0), 1000, 4000), RngStream(57))
        assert res.value_rb == pytest.approx(meta["primal_optimum"], rel=0.05)
