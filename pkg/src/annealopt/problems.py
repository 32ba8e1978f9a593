"""Problem configuration: JSON schema, bundled instances, and builders.

Config files carry ``schema_version`` (currently 1) and a ``kind`` selecting
the builder.  Bundled instances live in the package's ``problems/`` data
directory and can be referred to by bare name from the command line.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .stochprog.farmer import FarmerProblem
from .stochprog.portfolio import PortfolioProblem

SCHEMA_VERSION = 1
KINDS = ("lp-dual", "portfolio", "farmer")

# Recognized but not implemented: adaptive weighting of the kappa ladder by a
# pseudo-prior over levels.  Configs carrying it parse fine; solvers refuse.
PSEUDO_PRIOR_KEY = "kappa_pseudo_prior"


def bundled_names():
    root = resources.files("annealopt").joinpath("problems")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_problem(spec: str | Path) -> dict:
    """Load and validate a problem config from a path or bundled name."""
    path = Path(spec)
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
    else:
        res = resources.files("annealopt").joinpath("problems", f"{spec}.json")
        if not res.is_file():
            raise ValueError(
                f"unknown problem {spec!r}: not a readable .json path and not one of "
                f"{', '.join(bundled_names())}"
            )
        text = res.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"problem config is not valid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise ValueError("problem config must be a JSON object")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(
            f"schema_version {cfg.get('schema_version')!r} unsupported; expected {SCHEMA_VERSION}"
        )
    if cfg.get("kind") not in KINDS:
        raise ValueError(f"kind {cfg.get('kind')!r} must be one of {KINDS}")
    return cfg


def pincus_lp(c, b_coef: float, t: float, flip_sign: bool = False):
    """Dual data for the two-variable equality-constrained profit LP.

    Primal: max c1 x1 + c2 x2 subject to x1 + b x2 = t, x >= 0, together with
    the implied caps x1 <= t and x2 <= t/b (redundant for the primal, but they
    give every dual variable a positive objective weight, which keeps the
    tilted dual density normalizable).  Dual: minimize
    t pi1 + t pi2 + (t/b) pi3 over pi1 + pi2 >= c1, b pi1 + pi3 >= c2,
    pi2 >= 0, pi3 >= 0.  Returns (z, W, q, meta); ``flip_sign`` negates the
    objective, which makes it decrease along a recession direction.
    """
    c = np.asarray(c, float)
    if c.shape != (2,):
        raise ValueError("c must have two entries")
    if b_coef <= 0 or t <= 0:
        raise ValueError("b_coef and t must be positive")
    A = np.array(
        [
            [-1.0, -1.0, 0.0],
            [-b_coef, 0.0, -1.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, -1.0],
        ]
    )
    q = np.array([-c[0], -c[1], 0.0, 0.0])
    z = np.array([t, t, t / b_coef])
    if flip_sign:
        z = -z
    if c[1] / b_coef > c[0]:
        optimum = c[1] * t / b_coef
        argmax = np.array([0.0, t / b_coef])
    else:
        optimum = c[0] * t
        argmax = np.array([t, 0.0])
    meta = {
        "primal_optimum": float(optimum),
        "primal_argmax": argmax,
        "flip_sign": bool(flip_sign),
    }
    return z, A.T, q, meta


def build_lp(cfg: dict):
    return pincus_lp(
        cfg["c"], float(cfg["b_coef"]), float(cfg["t"]), bool(cfg.get("flip_sign", False))
    )


def build_portfolio(cfg: dict) -> PortfolioProblem:
    kw = {}
    for key in ("gamma", "risk_free", "cap"):
        if key in cfg:
            kw[key] = float(cfg[key])
    if "bounds" in cfg:
        kw["bounds"] = tuple(tuple(b) for b in cfg["bounds"])
    return PortfolioProblem(mu=cfg["mu"], cov=cfg["cov"], **kw)


def build_farmer(cfg: dict) -> FarmerProblem:
    kw = {}
    if "prices" in cfg:
        kw["prices"] = tuple(cfg["prices"])
    if "rows" in cfg:
        kw["rows"] = tuple(tuple(r) for r in cfg["rows"])
    for key in ("omega0", "multipliers", "probs"):
        if key in cfg:
            kw[key] = tuple(cfg[key])
    for key in ("land", "plant_cost"):
        if key in cfg:
            kw[key] = float(cfg[key])
    return FarmerProblem(**kw)


def build(cfg: dict):
    kind = cfg["kind"]
    if kind == "lp-dual":
        return build_lp(cfg)
    if kind == "portfolio":
        return build_portfolio(cfg)
    if kind == "farmer":
        return build_farmer(cfg)
    raise ValueError(f"unhandled kind {kind!r}")
