"""Annealing schedules and the linear-program solver built on them.

The optimizer samples the Gibbs density proportional to exp(-kappa * z . pi)
over the feasible polyhedron at a ladder of increasing kappa values; as kappa
grows the density concentrates on the optimal face.  Estimates reported per
level: the coordinate-wise ergodic mean, the plain mean objective, and a
Rao-Blackwellised objective mean that replaces each sampled coordinate by its
conditional expectation at the moment of its update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .polytope import boundedness_certificate, check_feasible, coordinate_interval, feasible_point
from .rng import RngStream
from .samplers1d import trunc_exp_mean, trunc_exp_sample

DEFAULT_KAPPA0 = 1.0
DEFAULT_FACTOR = 5.0
DEFAULT_LEVELS = 5
DEFAULT_SWEEPS = 2000
DEFAULT_FINAL_SWEEPS = 10000


@dataclass(frozen=True)
class Schedule:
    """A ladder of inverse temperatures with per-level sweep counts.

    Burn-in is the first half of each level's sweeps.  kappa = 0 is allowed
    (the uniform limit) but only on feasible sets where a flat density is
    normalizable; elsewhere the sweep kernels raise at run time.
    """

    kappas: tuple
    sweeps: tuple

    def __post_init__(self):
        if len(self.kappas) != len(self.sweeps):
            raise ValueError("kappas and sweeps must have equal length")
        if len(self.kappas) == 0:
            raise ValueError("schedule must have at least one level")
        if any(k < 0 for k in self.kappas):
            raise ValueError("kappa values must be nonnegative")
        if any(k2 < k1 for k1, k2 in zip(self.kappas, self.kappas[1:])):
            raise ValueError("kappa values must be nondecreasing")
        if any(int(s) <= 0 for s in self.sweeps):
            raise ValueError("sweep counts must be positive")
        object.__setattr__(self, "kappas", tuple(float(k) for k in self.kappas))
        object.__setattr__(self, "sweeps", tuple(int(s) for s in self.sweeps))

    @property
    def levels(self) -> int:
        return len(self.kappas)

    def burnin(self, level: int) -> int:
        return self.sweeps[level] // 2

    @classmethod
    def geometric(
        cls,
        kappa0: float = DEFAULT_KAPPA0,
        factor: float = DEFAULT_FACTOR,
        levels: int = DEFAULT_LEVELS,
        sweeps: int = DEFAULT_SWEEPS,
        final_sweeps: int = DEFAULT_FINAL_SWEEPS,
    ) -> "Schedule":
        kappas = tuple(kappa0 * factor**i for i in range(levels))
        counts = tuple([sweeps] * (levels - 1) + [final_sweeps])
        return cls(kappas, counts)

    @classmethod
    def from_kappas(cls, kappas, sweeps: int = DEFAULT_SWEEPS, final_sweeps: int | None = None) -> "Schedule":
        kappas = tuple(kappas)
        if final_sweeps is None:
            final_sweeps = max(sweeps, DEFAULT_FINAL_SWEEPS)
        counts = tuple([sweeps] * (len(kappas) - 1) + [final_sweeps])
        return cls(kappas, counts)


def default_schedule() -> Schedule:
    return Schedule.geometric()


@dataclass
class LevelStats:
    kappa: float
    sweeps: int
    burnin: int
    mean: np.ndarray
    value_mean: float
    value_rb: float
    value_se: float


@dataclass
class AnnealResult:
    """Output of an annealed run: estimates, per-level stats, kept draws."""

    x_mean: np.ndarray
    value_rb: float
    value_mean: float
    value_se: float
    best_x: np.ndarray
    best_value: float
    draws: np.ndarray
    values: np.ndarray
    level_stats: list = field(default_factory=list)
    trace: np.ndarray | None = None
    trace_columns: tuple = ()


def batch_se(values, n_batches: int = 20) -> float:
    """Batch-means standard error of the mean of a correlated sequence."""
    v = np.asarray(values, float)
    n = len(v)
    if n < 2 * n_batches:
        n_batches = max(n // 2, 1)
    if n_batches < 2:
        return float("nan")
    cut = (n // n_batches) * n_batches
    means = v[:cut].reshape(n_batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def top_draws(draws, values, k: int = 5, sense: str = "min"):
    """The k best draws by objective, deduplicated on exact coordinates."""
    draws = np.asarray(draws, float)
    values = np.asarray(values, float)
    order = np.argsort(values)
    if sense == "max":
        order = order[::-1]
    elif sense != "min":
        raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
    kept_x, kept_v, seen = [], [], set()
    for i in order:
        key = draws[i].tobytes()
        if key in seen:
            continue
        seen.add(key)
        kept_x.append(draws[i])
        kept_v.append(values[i])
        if len(kept_x) == k:
            break
    return np.array(kept_x), np.array(kept_v)


def _lp_sweep(z, kappa, A, b, pi, rng: RngStream) -> float:
    """One Gibbs sweep of the tilted density exp(-kappa * z . pi) on {A pi <= b}.

    Returns the Rao-Blackwellised objective value for the sweep: each term
    z_k * pi_k is replaced by z_k times the conditional mean of pi_k given the
    other coordinates at the moment of its update.
    """
    rb = 0.0
    for k in range(len(pi)):
        iv = coordinate_interval(A, b, pi, k)
        if iv.width <= 0:
            rb += z[k] * pi[k]
            continue
        m = -kappa * z[k]
        rb += z[k] * trunc_exp_mean(m, iv)
        pi[k] = trunc_exp_sample(m, iv, rng)
    return rb


def solve_lp_dual(
    z,
    W,
    q,
    schedule: Schedule | None = None,
    rng: RngStream | None = None,
    pi0=None,
    record_trace: bool = False,
) -> AnnealResult:
    """Minimize z . pi over {pi : W^T pi <= q} by annealed Gibbs sampling.

    ``W`` has one column per constraint.  Raises UnboundedError when the
    objective decreases along a recession direction of the feasible set (the
    tilted density would not be normalizable), and InfeasibleError when the
    set is empty.  A zero objective returns a feasible point with value 0.
    """
    z = np.asarray(z, float)
    W = np.asarray(W, float)
    q = np.asarray(q, float)
    if W.shape[0] != len(z):
        raise ValueError(f"W has {W.shape[0]} rows, expected {len(z)}")
    A = W.T
    schedule = schedule or default_schedule()
    rng = rng or RngStream(0)

    if pi0 is None:
        pi = feasible_point(A, q)
    else:
        pi = np.asarray(pi0, float).copy()
    check_feasible(A, q, pi)

    if not np.any(z != 0.0):
        x = pi.copy()
        return AnnealResult(
            x_mean=x,
            value_rb=0.0,
            value_mean=0.0,
            value_se=0.0,
            best_x=x,
            best_value=0.0,
            draws=x[None, :],
            values=np.zeros(1),
            level_stats=[],
        )

    boundedness_certificate(z, A)

    d = len(z)
    all_draws, all_values = [], []
    level_stats = []
    trace_rows = [] if record_trace else None
    final_draws = final_values = final_rb = None

    for lvl in range(schedule.levels):
        kappa = schedule.kappas[lvl]
        n_sweeps = schedule.sweeps[lvl]
        burn = schedule.burnin(lvl)
        keep = n_sweeps - burn
        draws = np.empty((keep, d))
        rbs = np.empty(keep)
        row = 0
        for t in range(n_sweeps):
            rb = _lp_sweep(z, kappa, A, q, pi, rng)
            if t >= burn:
                draws[row] = pi
                rbs[row] = rb
                row += 1
                if trace_rows is not None:
                    trace_rows.append([float(lvl), float(t), kappa, float(z @ pi), *pi])
        values = draws @ z
        level_stats.append(
            LevelStats(
                kappa=kappa,
                sweeps=n_sweeps,
                burnin=burn,
                mean=draws.mean(axis=0),
                value_mean=float(values.mean()),
                value_rb=float(rbs.mean()),
                value_se=batch_se(values),
            )
        )
        all_draws.append(draws)
        all_values.append(values)
        final_draws, final_values, final_rb = draws, values, rbs

    cat_draws = np.vstack(all_draws)
    cat_values = np.concatenate(all_values)
    best_i = int(np.argmin(cat_values))

    trace = None
    trace_cols = ()
    if record_trace:
        trace = np.asarray(trace_rows)
        trace_cols = ("level", "sweep", "kappa", "value") + tuple(f"pi{j}" for j in range(d))

    return AnnealResult(
        x_mean=final_draws.mean(axis=0),
        value_rb=float(final_rb.mean()),
        value_mean=float(final_values.mean()),
        value_se=batch_se(final_values),
        best_x=cat_draws[best_i].copy(),
        best_value=float(cat_values[best_i]),
        draws=final_draws,
        values=final_values,
        level_stats=level_stats,
        trace=trace,
        trace_columns=trace_cols,
    )


__all__ = [
    "Schedule",
    "LevelStats",
    "AnnealResult",
    "default_schedule",
    "batch_se",
    "top_draws",
    "solve_lp_dual",
]
