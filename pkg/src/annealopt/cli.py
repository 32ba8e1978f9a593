"""Command-line front end: load a problem, run a solver, print a report.

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 infeasible
constraint set.  ``MC2_LOG_LEVEL`` selects the logging threshold (DEBUG,
INFO, WARNING, ERROR).  With ``--out`` the per-sweep draw trace is written as
columnar text with a header row and %.17g floats, so reruns with the same
seed produce byte-identical files.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from importlib.metadata import PackageNotFoundError, version as pkg_version

import numpy as np

from .anneal import Schedule, default_schedule, solve_lp_dual, top_draws
from .errors import (
    BudgetExceededError,
    InfeasibleError,
    NonNormalizableError,
    SamplingError,
    UnboundedError,
)
from .problems import PSEUDO_PRIOR_KEY, build, load_problem
from .rng import RngStream
from .samplers1d import Interval
from .stochprog.farmer import (
    FarmerProblem,
    inner_gibbs,
    inner_schedule,
    outer_chain,
    recourse_optimum,
)
from .stochprog.onestage import OneStageProblem, one_stage_mcmc
from .stochprog.portfolio import PortfolioProblem, portfolio_estimate
from .stochprog.twostage import farmer_reduction, two_stage_chain

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INFEASIBLE = 4

SOLVERS = ("lp-dual", "one-stage", "portfolio", "farmer-inner", "farmer-outer", "two-stage")

log = logging.getLogger("annealopt.cli")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="annealopt",
        description="Monte Carlo optimization of linear and stochastic programs "
        "by annealed Boltzmann sampling.",
    )
    p.add_argument("--problem", required=True, help="bundled problem name or path to a .json config")
    p.add_argument("--solver", required=True, choices=SOLVERS)
    p.add_argument(
        "--kappa-schedule",
        default=None,
        metavar="K1,K2,...",
        help="comma-separated inverse-temperature ladder (ladder solvers only)",
    )
    p.add_argument("--kappa", type=float, default=None, help="single inverse temperature (outer/two-stage)")
    p.add_argument("--J", type=int, default=None, help="scenario count for augmented chains")
    p.add_argument("--sweeps", type=int, default=None, help="sweeps per level (or total, for single-level chains)")
    p.add_argument("--burnin", type=int, default=None, help="sweeps discarded before estimates")
    p.add_argument("--chains", type=int, default=None, help="independent chains to pool")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x", type=float, default=75.0, help="first-stage value for farmer-inner")
    p.add_argument("--out", default=None, help="write the draw trace to this path")
    p.add_argument("--format", choices=["text"], default="text")
    return p


def parse_schedule(args) -> Schedule:
    if args.kappa_schedule is None:
        if args.sweeps is None:
            return default_schedule()
        return Schedule.geometric(sweeps=args.sweeps, final_sweeps=max(args.sweeps, 2 * args.sweeps))
    try:
        kappas = tuple(float(tok) for tok in args.kappa_schedule.split(",") if tok.strip())
    except ValueError as e:
        raise ValueError(f"bad --kappa-schedule {args.kappa_schedule!r}: {e}") from e
    if not kappas:
        raise ValueError("--kappa-schedule must list at least one value")
    sweeps = args.sweeps or 2000
    return Schedule.from_kappas(kappas, sweeps=sweeps, final_sweeps=max(sweeps, 2 * sweeps))


def write_trace(path: str, columns, rows):
    with open(path, "w") as f:
        f.write(" ".join(columns) + "\n")
        for r in np.asarray(rows, float):
            f.write(" ".join("%.17g" % v for v in np.atleast_1d(r)) + "\n")


def fmt_vec(v) -> str:
    return "[" + ", ".join("%.6g" % x for x in np.atleast_1d(v)) + "]"


def provenance_lines(args, extra=None):
    try:
        ver = pkg_version("annealopt")
    except PackageNotFoundError:
        ver = "unreleased"
    lines = [
        "provenance:",
        f"  annealopt {ver}, numpy {np.__version__}",
        f"  problem={args.problem} solver={args.solver} seed={args.seed}",
    ]
    if extra:
        lines.extend(f"  {k}={v}" for k, v in extra.items())
    return lines


def top_draw_lines(draws, values, sense) -> list:
    xs, vs = top_draws(draws, values, k=5, sense=sense)
    lines = ["top draws by objective:"]
    for i in range(len(vs)):
        lines.append(f"  {i + 1}. value={vs[i]:.6g} x={fmt_vec(xs[i])}")
    return lines


def histogram_lines(x) -> list:
    x = np.asarray(x, float)
    edges = np.histogram_bin_edges(x, bins="fd")
    counts, edges = np.histogram(x, bins=edges)
    lines = ["histogram (lo hi count):"]
    for i, c in enumerate(counts):
        if c:
            lines.append(f"  {edges[i]:.6g} {edges[i + 1]:.6g} {c}")
    return lines


def run_lp_dual(cfg, args):
    z, W, q, meta = build(cfg)
    schedule = parse_schedule(args)
    rng = RngStream(args.seed, 0)
    res = solve_lp_dual(z, W, q, schedule=schedule, rng=rng, record_trace=args.out is not None)
    lines = [
        f"problem: {cfg.get('name', args.problem)} (lp-dual)",
        f"schedule: kappas={list(schedule.kappas)} sweeps={list(schedule.sweeps)}",
        f"value (conditional-mean estimate): {res.value_rb:.8g} +/- {res.value_se:.3g}",
        f"value (ergodic mean): {res.value_mean:.8g}",
        f"best draw: value={res.best_value:.8g} pi={fmt_vec(res.best_x)}",
        f"pi ergodic mean: {fmt_vec(res.x_mean)}",
        f"reference primal optimum: {meta['primal_optimum']:.8g}",
    ]
    lines += top_draw_lines(res.draws, res.values, "min")
    lines += provenance_lines(args, {"kappas": list(schedule.kappas)})
    trace = (res.trace, res.trace_columns) if res.trace is not None else None
    return "\n".join(lines), trace


def run_portfolio(cfg, args):
    problem = build(cfg)
    if not isinstance(problem, PortfolioProblem):
        raise ValueError(f"solver portfolio needs a portfolio config, got kind {cfg['kind']!r}")
    J = args.J or 20
    sweeps = args.sweeps or 5000
    res = portfolio_estimate(
        problem, J=J, n_sweeps=sweeps, n_chains=args.chains, seed=args.seed, burnin=args.burnin
    )
    lines = [f"problem: {cfg.get('name', args.problem)} (portfolio)"]
    for k in range(problem.n_assets):
        lines.append(
            f"x[{k}] estimate: {res.x_mean[k]:.6g} +/- {res.x_se[k]:.3g}"
            f"  (closed form {res.optimal_x[k]:.6g})"
        )
    lines.append(f"mean utility along chain: {res.value_mean:.6g}")
    lines += top_draw_lines(res.draws, res.value_draws, "max")
    lines += provenance_lines(args, {"J": J, "sweeps": sweeps, "chains": len(res.chain_means)})
    idx = np.arange(len(res.draws))[:, None]
    trace = (
        np.hstack([idx, res.draws]),
        ("draw",) + tuple(f"x{k}" for k in range(problem.n_assets)),
    )
    return "\n".join(lines), trace


def run_one_stage(cfg, args):
    market = build(cfg)
    if not isinstance(market, PortfolioProblem):
        raise ValueError("solver one-stage runs on a portfolio config")

    def log_weight(r, x):
        g = market.utility(r, x)
        return float(np.log(g)) if g > 0 else -np.inf

    problem = OneStageProblem(
        log_weight=log_weight,
        draw_scenario=lambda rng: rng.multivariate_normal(market.mu, market.cov),
        x_bounds=tuple(Interval(lo, hi) for lo, hi in market.bounds),
        x0=np.zeros(market.n_assets),
    )
    J = args.J or 64
    sweeps = args.sweeps or 3000
    rng = RngStream(args.seed, 0)
    res = one_stage_mcmc(problem, J, sweeps, rng, burnin=args.burnin)
    lines = [
        f"problem: {cfg.get('name', args.problem)} (one-stage)",
        f"scenario ladder: {list(res.ladder)}",
        f"x estimate: {fmt_vec(res.x_mean)}  (closed form {fmt_vec(market.optimal_x())})",
        f"mean utility along chain: {res.value_mean:.6g}",
        f"scenario refresh acceptance: {res.accept_rate:.3f}",
    ]
    lines += provenance_lines(args, {"J": J, "sweeps": sweeps})
    idx = np.arange(len(res.x_draws))[:, None]
    trace = (np.hstack([idx, res.x_draws]), ("draw",) + tuple(f"x{k}" for k in range(market.n_assets)))
    return "\n".join(lines), trace


def run_farmer_inner(cfg, args):
    fp = build(cfg)
    if not isinstance(fp, FarmerProblem):
        raise ValueError("solver farmer-inner runs on a farmer config")
    omega = np.asarray(fp.omega0, float)
    if args.kappa_schedule is None:
        schedule = inner_schedule(args.sweeps) if args.sweeps else inner_schedule()
    else:
        schedule = parse_schedule(args)
    rng = RngStream(args.seed, 0)
    res = inner_gibbs(fp, args.x, omega, schedule=schedule, rng=rng, record_trace=args.out is not None)
    exact, y_star = recourse_optimum(fp, args.x, omega)
    lines = [
        f"problem: {cfg.get('name', args.problem)} (farmer-inner, x={args.x:g})",
        f"schedule: kappas={list(schedule.kappas)} sweeps={list(schedule.sweeps)}",
        f"recourse value (conditional-mean estimate): {res.value_rb:.8g} +/- {res.value_se:.3g}",
        f"best draw: value={res.best_value:.8g} y={fmt_vec(res.best_x)}",
        f"reference exact recourse: {exact:.8g} at y={fmt_vec(y_star)}",
    ]
    lines += top_draw_lines(res.draws, res.values, "max")
    lines += provenance_lines(args, {"x": args.x})
    trace = (res.trace, res.trace_columns) if res.trace is not None else None
    return "\n".join(lines), trace


def run_farmer_outer(cfg, args):
    fp = build(cfg)
    if not isinstance(fp, FarmerProblem):
        raise ValueError("solver farmer-outer runs on a farmer config")
    J = args.J or 20
    kappa = args.kappa if args.kappa is not None else 0.1
    sweeps = args.sweeps or 6000
    rng = RngStream(args.seed, 0)
    res = outer_chain(fp, J=J, kappa=kappa, n_sweeps=sweeps, rng=rng, burnin=args.burnin)
    burn = args.burnin if args.burnin is not None else sweeps // 2
    tail = res.x_draws[burn:]
    lines = [
        f"problem: {cfg.get('name', args.problem)} (farmer-outer)",
        f"acreage mode: {res.x_mode:.6g} (bin width {res.bin_width:.3g})",
        f"acreage tail mean: {res.x_mean_tail:.6g}",
        f"net objective tail mean: {res.value_tail:.6g}",
        f"scenario refresh acceptance: {res.accept_rate:.3f}",
    ]
    lines += histogram_lines(tail)
    lines += top_draw_lines(res.x_draws[burn:, None], res.value_draws[burn:], "max")
    lines += provenance_lines(args, {"J": J, "kappa": kappa, "sweeps": sweeps})
    idx = np.arange(len(res.x_draws))[:, None]
    trace = (np.hstack([idx, res.x_draws[:, None]]), ("sweep", "x"))
    return "\n".join(lines), trace


def run_two_stage(cfg, args):
    fp = build(cfg)
    if not isinstance(fp, FarmerProblem):
        raise ValueError("solver two-stage runs on a farmer config (recast in dual form)")
    problem = farmer_reduction(fp)
    J = args.J or 20
    kappa = args.kappa if args.kappa is not None else 0.1
    sweeps = args.sweeps or 4000
    rng = RngStream(args.seed, 0)
    res = two_stage_chain(
        problem, J=J, kappa=kappa, n_sweeps=sweeps, rng=rng,
        use_value_slice=True, burnin=args.burnin,
    )
    lines = [
        f"problem: {cfg.get('name', args.problem)} (two-stage dual form)",
        f"x tail mean: {np.atleast_1d(res.x_mean_tail)[0]:.6g}",
        f"first-stage-plus-recourse tail mean: {res.value_tail:.6g}",
        f"scenario refresh acceptance: {res.omega_accept:.3f}",
    ]
    lines += provenance_lines(args, {"J": J, "kappa": kappa, "sweeps": sweeps})
    draws = np.atleast_2d(np.asarray(res.x_draws, float).reshape(len(res.x_draws), -1))
    idx = np.arange(len(draws))[:, None]
    trace = (np.hstack([idx, draws]), ("sweep",) + tuple(f"x{k}" for k in range(draws.shape[1])))
    return "\n".join(lines), trace


RUNNERS = {
    "lp-dual": run_lp_dual,
    "one-stage": run_one_stage,
    "portfolio": run_portfolio,
    "farmer-inner": run_farmer_inner,
    "farmer-outer": run_farmer_outer,
    "two-stage": run_two_stage,
}


def main(argv=None) -> int:
    level = os.environ.get("MC2_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        cfg = load_problem(args.problem)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if PSEUDO_PRIOR_KEY in cfg:
            raise NotImplementedError(
                f"{PSEUDO_PRIOR_KEY} is recognized but level pseudo-priors are not implemented"
            )
        report, trace = RUNNERS[args.solver](cfg, args)
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (
        UnboundedError,
        NonNormalizableError,
        SamplingError,
        BudgetExceededError,
        NotImplementedError,
    ) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    print(report)
    if args.out and trace is not None:
        rows, columns = trace
        write_trace(args.out, columns, rows)
        log.info("trace written to %s", args.out)
    elif args.out:
        print("note: solver produced no trace for --out", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
