"""Gaussian vectors truncated to a polyhedron, sampled by whitened Gibbs.

The chain runs in whitened coordinates phi = L^{-1} theta (Sigma = L L^T), so
every full conditional is a unit-variance normal truncated to an interval; the
correlation structure is carried entirely by the transformed constraint matrix
D = A L.  This keeps the one-dimensional kernels exact and avoids conditioning
arithmetic on Sigma inside the sweep.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .polytope import coordinate_interval, feasible_point
from .rng import RngStream
from .samplers1d import trunc_normal_sample

WHITEN_TOL = 1e-8
EIG_FLOOR = 1e-10


class TruncatedMVN:
    """N(mean, cov) conditioned to {theta : A theta <= b}.

    ``A`` may have zero rows for the unconstrained case.  The covariance must
    be symmetric positive definite; near-singular covariances (smallest
    eigenvalue below EIG_FLOOR * trace / K) are rejected rather than silently
    regularized.
    """

    def __init__(self, mean, cov, A=None, b=None):
        self.mean = np.asarray(mean, float).copy()
        self.cov = np.asarray(cov, float).copy()
        K = len(self.mean)
        if self.cov.shape != (K, K):
            raise ValueError(f"cov shape {self.cov.shape} does not match mean length {K}")
        if A is None:
            A = np.zeros((0, K))
            b = np.zeros(0)
        self.A = np.asarray(A, float).copy()
        self.b = np.asarray(b, float).copy()
        if self.A.shape[1] != K:
            raise ValueError(f"A has {self.A.shape[1]} columns, expected {K}")

        sym_err = float(np.abs(self.cov - self.cov.T).max(initial=0.0))
        if sym_err > 1e-10 * (1.0 + float(np.abs(self.cov).max())):
            raise ValueError(f"covariance is not symmetric (max asymmetry {sym_err:.3e})")
        w = np.linalg.eigvalsh(self.cov)
        tr = float(np.trace(self.cov))
        if w[0] <= EIG_FLOOR * tr / K:
            raise ValueError(
                f"covariance is numerically singular: min eigenvalue {w[0]:.3e} "
                f"vs floor {EIG_FLOOR * tr / K:.3e}"
            )
        self.L = np.linalg.cholesky(self.cov)
        Q = solve_triangular(self.L, np.eye(K), lower=True)
        err = float(np.abs(Q @ self.cov @ Q.T - np.eye(K)).max())
        if err >= WHITEN_TOL:
            raise ValueError(f"whitening check failed: |Q Sigma Q^T - I| = {err:.3e}")
        self.alpha = solve_triangular(self.L, self.mean, lower=True)
        self.D = self.A @ self.L

    @property
    def dim(self) -> int:
        return len(self.mean)

    def whiten(self, theta):
        return solve_triangular(self.L, np.asarray(theta, float), lower=True)

    def unwhiten(self, phi):
        return self.L @ np.asarray(phi, float)

    def feasible_start(self):
        """A feasible phi, from a phase-one LP when constraints are present."""
        if len(self.b) == 0:
            return self.alpha.copy()
        return feasible_point(self.D, self.b)

    def sweep(self, phi, rng: RngStream):
        """One in-place Gibbs sweep over the whitened coordinates."""
        for j in range(self.dim):
            iv = coordinate_interval(self.D, self.b, phi, j)
            if iv.width <= 0:
                continue
            phi[j] = trunc_normal_sample(self.alpha[j], 1.0, iv, rng)
        return phi

    def sample(self, n_sweeps: int, rng: RngStream, burnin: int = 0, init_phi=None):
        """Run the chain and return the kept draws of theta, one row per sweep."""
        phi = self.feasible_start() if init_phi is None else np.asarray(init_phi, float).copy()
        out = np.empty((max(n_sweeps - burnin, 0), self.dim))
        row = 0
        for t in range(n_sweeps):
            self.sweep(phi, rng)
            if t >= burnin:
                out[row] = self.unwhiten(phi)
                row += 1
        return out
