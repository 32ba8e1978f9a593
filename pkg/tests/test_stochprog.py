import math

import numpy as np
import pytest
from scipy import integrate, stats
from scipy.optimize import linprog

from annealopt.anneal import Schedule
from annealopt.rng import RngStream
from annealopt.samplers1d import Interval
from annealopt.stochprog.farmer import (
    FarmerProblem,
    histogram_mode,
    inner_gibbs,
    inner_slice_chain,
    inner_slice_gibbs,
    log_partition_y2,
    outer_chain,
    profile_value,
    recourse_optimum,
    recourse_polytope,
    y2_domain,
)
from annealopt.stochprog.onestage import (
    OneStageProblem,
    one_stage_mcmc,
    scenario_ladder,
)
from annealopt.stochprog.portfolio import PortfolioProblem, portfolio_chain, portfolio_estimate
from annealopt.stochprog.saa import freeze_scenarios, frozen_objective, saa_maximize, saa_minimize
from annealopt.stochprog.twostage import (
    TwoStageProblem,
    ch_log_ratio,
    farmer_reduction,
    recourse_dual_optimum,
    two_stage_chain,
)
from oracles import grid_vertex_argmax, segment_log_partition

FARMER = FarmerProblem()
X0, OMEGA0 = 75.0, (4000.0, 15000.0)


def _random_case(gen):
    x = gen.uniform(20.0, 100.0)
    omega = (gen.uniform(3000.0, 5000.0), gen.uniform(10000.0, 20000.0))
    return x, omega


# ---------------------------------------------------------------- farmer


def test_recourse_optimum_reference_case():
    val, y = recourse_optimum(FARMER, X0, OMEGA0)
    assert val == pytest.approx(6315.625)
    assert y[0] == pytest.approx(21.875) and y[1] == pytest.approx(53.125)
    A, b = recourse_polytope(FARMER, X0, OMEGA0)
    assert np.all(A @ y <= b + 1e-9)


def test_recourse_optimum_matches_lp(gen):
    p = np.asarray(FARMER.prices)
    for _ in range(10):
        x, omega = _random_case(gen)
        val, _ = recourse_optimum(FARMER, x, omega)
        A, b = recourse_polytope(FARMER, x, omega)
        res = linprog(-p, A_ub=A, b_ub=b, method="highs")
        assert res.success
        assert val == pytest.approx(-res.fun, rel=1e-10)


def test_profile_value_matches_polytope(gen):
    # The 1-D profile at y2 equals the best revenue with y2 pinned.
    for _ in range(5):
        x, omega = _random_case(gen)
        hi = y2_domain(FARMER, x, omega)
        p = np.asarray(FARMER.prices)
        for frac in (0.1, 0.5, 0.9):
            y2 = frac * hi
            A, b = recourse_polytope(FARMER, x, omega)
            A2 = np.vstack([A, [0.0, 1.0], [0.0, -1.0]])
            b2 = np.concatenate([b, [y2, -y2]])
            res = linprog(-p, A_ub=A2, b_ub=b2, method="highs")
            assert res.success
            assert profile_value(FARMER, x, omega, y2) == pytest.approx(-res.fun, rel=1e-9)


def test_log_partition_matches_quadrature(gen):
    for _ in range(25):
        x, omega = _random_case(gen)
        kappa = gen.uniform(0.005, 2.0)
        got = log_partition_y2(FARMER, x, omega, kappa)
        ref = segment_log_partition(
            lambda t: profile_value(FARMER, x, omega, t),
            _profile_knots(x, omega),
            kappa,
        )
        assert got == pytest.approx(ref, abs=1e-8)
    with pytest.raises(ValueError):
        log_partition_y2(FARMER, X0, OMEGA0, 0.0)


def _profile_knots(x, omega):
    from annealopt.stochprog.farmer import profile_lines

    hi = y2_domain(FARMER, x, omega)
    pts = {0.0, hi}
    lines = profile_lines(FARMER, x, omega)
    for i in range(3):
        for j in range(i + 1, 3):
            b1, m1 = lines[i]
            b2, m2 = lines[j]
            if m1 != m2:
                t = (b2 - b1) / (m1 - m2)
                if 0.0 < t < hi:
                    pts.add(t)
    return sorted(pts)


def test_inner_gibbs_recovers_recourse_value():
    res = inner_gibbs(FARMER, X0, OMEGA0, rng=RngStream(71))
    exact, _ = recourse_optimum(FARMER, X0, OMEGA0)
    assert res.value_rb == pytest.approx(exact, rel=0.01)
    assert res.best_value <= exact + 1e-6
    # Level means sweep upward with kappa for this maximization.
    means = [st.value_mean for st in res.level_stats]
    assert all(b >= a - 3.0 * st.value_se for a, b, st in zip(means, means[1:], res.level_stats[1:]))


def test_inner_slice_recovers_across_instances(gen):
    for _ in range(12):
        x, omega = _random_case(gen)
        exact, _ = recourse_optimum(FARMER, x, omega)
        _, vals = inner_slice_gibbs(FARMER, x, omega, rng=RngStream(int(gen.integers(1 << 31))))
        assert vals.mean() == pytest.approx(exact, rel=0.01)


def test_inner_slice_chain_marginal():
    # The y2 marginal of the 1-D level chain is the tilted profile density.
    kappa = 0.05
    draws, _ = inner_slice_chain(FARMER, X0, OMEGA0, kappa, 40000, RngStream(72))
    hi = y2_domain(FARMER, X0, OMEGA0)
    grid = np.linspace(0.0, hi, 4001)
    logw = kappa * profile_value(FARMER, X0, OMEGA0, grid)
    w = np.exp(logw - logw.max())
    cdf_grid = np.concatenate([[0.0], np.cumsum((w[1:] + w[:-1]) * 0.5 * np.diff(grid))])
    cdf_grid /= cdf_grid[-1]
    assert stats.kstest(draws[::8], lambda t: np.interp(t, grid, cdf_grid)).pvalue > 0.01


def test_histogram_mode_finds_tail_peak(gen):
    head = gen.uniform(0.0, 10.0, 4000)
    tail = gen.normal(3.0, 0.05, 4000)
    mode, width = histogram_mode(np.concatenate([head, tail]), tail_frac=0.5)
    assert abs(mode - 3.0) <= max(width, 0.05)


def test_farmer_problem_validation():
    with pytest.raises(ValueError):
        FarmerProblem(multipliers=(1.0, 1.2), probs=(1.0,))
    with pytest.raises(ValueError):
        FarmerProblem(probs=(0.5, 0.2, 0.2))
    assert FarmerProblem(multipliers=(1.0,), probs=(1.0,)).degenerate
    assert not FARMER.degenerate
    w = FarmerProblem().draw_scenario(RngStream(0))
    assert w.shape == (2,)
    assert w[0] in {3200.0, 4000.0, 4800.0}


def test_outer_chain_degenerate_concentrates():
    deg = FarmerProblem(multipliers=(1.0,), probs=(1.0,))
    res = outer_chain(deg, J=10, n_sweeps=3000, rng=RngStream(73))
    xstar, _, step = grid_vertex_argmax(deg, recourse_optimum, np.asarray(deg.omega0))
    assert abs(res.x_mode - xstar) <= step
    assert 0.0 < res.accept_rate <= 1.0


# ---------------------------------------------------------------- two-stage


def test_ch_log_ratio_matches_quadrature(gen):
    # 1-D dual sets: the ratio of tilted-interval normalizers in closed form.
    A = np.array([[1.0], [-1.0]])
    for _ in range(10):
        lo1, lo2 = gen.uniform(-2.0, 0.0, 2)
        hi1, hi2 = gen.uniform(0.5, 2.5, 2)
        m1, m2 = gen.uniform(-3.0, 3.0, 2)
        xi = np.array([gen.uniform(max(lo1, lo2) + 0.01, min(hi1, hi2) - 0.01)])
        got = ch_log_ratio(
            xi, np.array([m2]), A, np.array([hi2, -lo2]), np.array([m1]), A, np.array([hi1, -lo1])
        )
        z2, _ = integrate.quad(lambda t: math.exp(m2 * (t - xi[0])), lo2, hi2)
        z1, _ = integrate.quad(lambda t: math.exp(m1 * (t - xi[0])), lo1, hi1)
        assert got == pytest.approx(math.log(z1) - math.log(z2), abs=1e-10)


def _toy_two_stage():
    return TwoStageProblem(
        c=np.zeros(1),
        A_xi=np.array([[1.0], [-1.0]]),
        q_scen=np.array([[2.0, 0.0], [1.5, 0.5]]),
        h_scen=np.array([[1.0], [0.6]]),
        T_scen=np.array([[[0.8]], [[-0.4]]]),
        probs=np.array([0.35, 0.65]),
        x_grid=np.array([-1.0, 0.0, 0.5, 1.0]),
    )


def test_two_stage_toy_matches_product_law():
    # With c = 0 and J = 1 the (x, scenario) marginal is prior times uniform.
    prob = _toy_two_stage()
    res = two_stage_chain(prob, J=1, kappa=0.7, n_sweeps=20000, rng=RngStream(74))
    counts = np.zeros((4, 2))
    half = len(res.x_draws) // 2
    for xv, sv in zip(res.x_draws[half:], res.scen_draws[half:]):
        k = int(np.argmin(np.abs(prob.x_grid - xv)))
        counts[k, sv] += 1
    emp = counts / counts.sum()
    ref = np.outer(np.full(4, 0.25), prob.probs)
    assert 0.5 * np.abs(emp - ref).sum() < 0.03


def test_two_stage_problem_validation():
    with pytest.raises(ValueError):
        TwoStageProblem(
            c=np.zeros(1),
            A_xi=np.array([[1.0], [-1.0]]),
            q_scen=np.array([[2.0, 0.0]]),
            h_scen=np.array([[1.0]]),
            T_scen=np.array([[[0.8]]]),
            probs=np.array([1.0]),
        )  # neither x_box nor x_grid
    with pytest.raises(ValueError):
        TwoStageProblem(
            c=np.zeros(1),
            A_xi=np.array([[1.0], [-1.0]]),
            q_scen=np.array([[2.0, 0.0]]),
            h_scen=np.array([[1.0]]),
            T_scen=np.array([[[0.8]]]),
            probs=np.array([1.0]),
            x_box=(Interval(0.0, 1.0),),
            x_grid=np.array([0.0, 1.0]),
        )  # both


def test_farmer_reduction_strong_duality():
    fr = farmer_reduction()
    assert fr.n_scen == 3 and fr.xi_dim == 3
    assert fr.value_shift == 8000.0
    for s in range(3):
        omega = np.asarray(FARMER.omega0) * FARMER.multipliers[s]
        for x in (40.0, 75.0, 90.0):
            dv, xi = recourse_dual_optimum(fr, s, np.array([x]))
            rv, _ = recourse_optimum(FARMER, x, omega)
            assert dv == pytest.approx(-rv, rel=1e-9)
            assert np.all(fr.A_xi @ xi <= fr.q_scen[s] + 1e-7)


# ---------------------------------------------------------------- portfolio


def test_portfolio_problem_validation():
    with pytest.raises(ValueError):
        PortfolioProblem(mu=[0.25], cov=[[0.2, 0.0], [0.0, 0.2]])
    with pytest.raises(ValueError):
        PortfolioProblem(mu=[0.25], cov=[[0.2]], gamma=0.0)
    with pytest.raises(ValueError):
        PortfolioProblem(mu=[0.25], cov=[[0.2]], cap=0.5)
    with pytest.raises(ValueError):
        PortfolioProblem(mu=[0.25], cov=[[0.2]], bounds=((1.0, -1.0),))
    with pytest.raises(ValueError):
        PortfolioProblem(mu=[0.25, 0.1], cov=np.eye(2) * 0.2, bounds=((-1.0, 1.0),))


def test_portfolio_optimal_x_closed_form():
    prob = PortfolioProblem(mu=[0.25], cov=[[0.2]])
    assert prob.optimal_x()[0] == pytest.approx(0.625)
    mu2 = np.array([0.25, 0.1])
    cov2 = np.array([[0.2, 0.06], [0.06, 0.3]])
    prob2 = PortfolioProblem(mu=mu2, cov=cov2)
    assert np.allclose(prob2.optimal_x(), np.linalg.solve(cov2, mu2) / 2.0)
    u = prob.utility(np.array([[0.1], [-0.3]]), np.array([0.5]))
    assert np.all(u < prob.cap)


def test_portfolio_chain_respects_bounds():
    prob = PortfolioProblem(mu=[0.25], cov=[[0.2]], bounds=((-1.4, 1.45),))
    draws, vals = portfolio_chain(prob, J=5, n_sweeps=400, rng=RngStream(75))
    assert draws.shape[1] == 1 and len(vals) == len(draws)
    assert np.all(draws >= -1.4 - 1e-9) and np.all(draws <= 1.45 + 1e-9)
    assert np.all(np.isfinite(vals))


def test_portfolio_estimate_shapes():
    prob = PortfolioProblem(mu=[0.25], cov=[[0.2]])
    res = portfolio_estimate(prob, J=10, n_sweeps=600, n_chains=2, seed=1)
    assert res.x_mean.shape == (1,)
    assert res.x_se.shape == (1,)
    assert np.all(res.x_se >= 0.0)
    assert -1.5 <= res.x_mean[0] <= 1.5


# ---------------------------------------------------------------- one-stage


def test_scenario_ladder():
    assert scenario_ladder(64) == (4, 16, 64)
    assert scenario_ladder(20) == (1, 5, 20)
    assert scenario_ladder(1) == (1,)
    with pytest.raises(ValueError):
        scenario_ladder(0)


def test_one_stage_problem_validation():
    lw = lambda w, x: 0.0
    ds = lambda rng: np.array([0.0])
    with pytest.raises(ValueError):
        OneStageProblem(lw, ds, (Interval(0.0, 1.0),), np.array([2.0]))
    with pytest.raises(ValueError):
        OneStageProblem(lw, ds, (Interval(0.0, 1.0),) * 2, np.array([0.5]))


def _gauss_utility_problem():
    mu, var, gamma, rf, cap = 0.25, 0.2, 2.0, 0.01, 2.0
    sd = math.sqrt(var)

    def log_weight(omega, x):
        g = cap - math.exp(-gamma * (omega[0] * x[0] + rf))
        return math.log(g) if g > 0 else -math.inf

    def draw(rng):
        return np.array([mu + sd * rng.standard_normal()])

    return OneStageProblem(log_weight, draw, (Interval(-1.4, 1.45),), np.array([0.0]))


def test_one_stage_sharpens_with_scenario_count():
    # Raising J tightens the draw distribution around the optimizer.
    prob = _gauss_utility_problem()
    sds = []
    for J in (4, 16, 64):
        res = one_stage_mcmc(prob, J, 3000, RngStream(76), ladder=(J,))
        sds.append(res.x_draws[:, 0].std())
    assert sds[0] > sds[1] > sds[2]
    assert 0.0 <= res.accept_rate <= 1.0


# ---------------------------------------------------------------- saa


def test_saa_recovers_quadratic_optimum():
    res = saa_maximize(lambda x: -((x[0] - 0.3) ** 2), np.array([0.0]), [-1.0], [1.0])
    assert res.converged
    assert res.x[0] == pytest.approx(0.3, abs=1e-4)
    res2 = saa_minimize(lambda x: (x[0] - 0.3) ** 2, np.array([0.0]), [-1.0], [1.0])
    assert res2.x[0] == pytest.approx(0.3, abs=1e-4)


def test_saa_respects_box():
    res = saa_maximize(lambda x: x[0], np.array([0.0]), [-1.0], [0.7])
    assert res.x[0] == pytest.approx(0.7)


def test_frozen_objective_averages_scenarios():
    scen = freeze_scenarios(lambda rng: np.array([rng.standard_normal()]), 50, RngStream(77))
    scen_again = freeze_scenarios(lambda rng: np.array([rng.standard_normal()]), 50, RngStream(77))
    assert np.allclose(np.asarray(scen), np.asarray(scen_again))
    f = frozen_objective(lambda w, x: w[0] * x[0], scen)
    mean_w = np.mean([w[0] for w in scen])
    assert f(np.array([2.0])) == pytest.approx(2.0 * mean_w)
