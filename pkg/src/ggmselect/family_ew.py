"""Exponentially weighted coefficient estimates and the family they induce.

For each node ``a`` the estimator is the mean of the pseudo-posterior

    pi(v)  ~  exp(-beta * ||X_a - X v||_n^2) * prod_j (1 + (v_j / tau)^2)^(-alpha)

over ``{v : v_a = 0}``, approximated by averaging an unadjusted Langevin
chain

    v  <-  v + h * grad log pi(v) + sqrt(2 h) * xi,     xi ~ N(0, I),

with coordinate ``a`` pinned to zero, after discarding a burn-in prefix.
``X`` is expected with unit-norm columns (see :func:`scale_columns`); under
that scaling the default inverse temperature ``beta = n^2 / 2`` makes the
flat-prior (``alpha = 0``) pseudo-posterior the exact Bayesian posterior for
unit-information Gaussian noise, whose mean is the least-squares fit.

The estimates then drive an adaptively weighted l1 path per node (weight
``1/|estimate|``, infinite on zeros) and the either-rule graphs along the
pooled breakpoints form the family.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from ._rng import substream
from .errors import ConvergenceError, DomainError
from .family_la import collect_path_graphs
from .graphs import GraphFamily
from .lars import lasso_path
from .linmodel import as_data_matrix

__all__ = ["EWParams", "scale_columns", "ew_estimator", "ew_matrix", "ew_family"]

logger = logging.getLogger("ggmselect")

# Chains whose iterates leave this sup-norm ball are declared divergent.
_DIVERGENCE_SUP = 1e6
# Noise is generated in blocks of this many steps to amortize RNG overhead.
_NOISE_BLOCK = 4096


@dataclass(frozen=True)
class EWParams:
    """Tuning of the exponentially weighted estimator.

    Attributes
    ----------
    alpha : float
        Prior sharpness (>= 0); 0 means a flat prior.
    beta : float or None
        Inverse temperature multiplying the squared n-normalized residual.
        ``None`` (default) resolves to ``n**2 / 2`` at run time — the
        Bayesian choice for unit-norm columns.
    tau : float or None
        Prior scale; ``None`` resolves to ``1 / sqrt(n (p - 1))``.
    h : float
        Langevin step size.
    T : float
        Total integration time; the chain runs ``round(T / h)`` steps.
    burn_in : float
        Fraction of steps discarded before averaging (in [0, 1)).
    seed : int or None
        Root seed of the chain noise; ``None`` lets the caller supply one.
    """

    alpha: float = 0.0
    beta: float | None = None
    tau: float | None = None
    h: float = 1e-3
    T: float = 200.0
    burn_in: float = 0.5
    seed: int | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta is not None and not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if self.tau is not None and not self.tau > 0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        if not self.h > 0:
            raise DomainError(f"h must be positive, got {self.h}")
        if not self.T >= self.h:
            raise DomainError(f"T must be >= h, got T={self.T}, h={self.h}")
        if not (0.0 <= self.burn_in < 1.0):
            raise DomainError(f"burn_in must be in [0, 1), got {self.burn_in}")

    def resolve(self, n: int, p: int) -> "EWParams":
        """Fill data-dependent defaults for an (n, p) design."""
        beta = self.beta if self.beta is not None else n * n / 2.0
        tau = self.tau if self.tau is not None else 1.0 / np.sqrt(n * (p - 1))
        return replace(self, beta=beta, tau=tau)


def scale_columns(X) -> np.ndarray:
    """Rescale every column of ``X`` to unit Euclidean norm."""
    X = as_data_matrix(X)
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms <= 0.0):
        raise DomainError(
            f"zero columns at indices {np.flatnonzero(norms <= 0.0).tolist()}"
        )
    return X / norms


def grad_log_density(X, a: int, v: np.ndarray, params: EWParams) -> np.ndarray:
    """Gradient of the log pseudo-posterior at ``v`` (entry ``a`` zeroed).

    Componentwise ``(2 beta / n) X^T (X_a - X v) - 2 alpha v / (tau^2 + v^2)``;
    ``params`` must already be resolved (no None fields).
    """
    X = as_data_matrix(X)
    n, _ = X.shape
    g = (2.0 * params.beta / n) * (X.T @ (X[:, a] - X @ v))
    if params.alpha > 0.0:
        g = g - 2.0 * params.alpha * v / (params.tau**2 + v**2)
    g[a] = 0.0
    return g


def ew_estimator(X, a: int, params: EWParams | None = None, seed: int | None = None) -> np.ndarray:
    """Posterior-mean coefficient estimate for node ``a`` via Langevin
    averaging.

    ``X`` should have unit-norm columns.  The chain starts at zero, runs
    ``round(T/h)`` steps, discards the burn-in prefix and averages the rest;
    it is deterministic given the seed (taken from ``params.seed``, else the
    ``seed`` argument).  Iterates leaving a sup-norm ball of 1e6 raise a
    convergence error.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    if not (0 <= a < p):
        raise DomainError(f"node {a} outside 0..{p - 1}")
    params = (params or EWParams()).resolve(n, p)
    root = params.seed if params.seed is not None else seed
    if root is None:
        raise DomainError("an explicit seed is required (params.seed or seed)")
    rng = substream(root, "ew", a)

    steps = int(round(params.T / params.h))
    burn = int(steps * params.burn_in)
    h = params.h
    sqrt2h = np.sqrt(2.0 * h)
    scale = 2.0 * params.beta / n
    Gm = scale * (X.T @ X)
    cv = scale * (X.T @ X[:, a])
    alpha2 = 2.0 * params.alpha
    tau2 = None if params.tau is None else params.tau**2

    v = np.zeros(p)
    acc = np.zeros(p)
    kept = 0
    done = 0
    while done < steps:
        block = min(_NOISE_BLOCK, steps - done)
        noise = rng.standard_normal((block, p))
        for i in range(block):
            drift = cv - Gm @ v
            if alpha2 > 0.0:
                drift -= alpha2 * v / (tau2 + v * v)
            v = v + h * drift + sqrt2h * noise[i]
            v[a] = 0.0
            done += 1
            if done > burn:
                acc += v
                kept += 1
        sup = float(np.max(np.abs(v)))
        if not np.isfinite(sup) or sup > _DIVERGENCE_SUP:
            raise ConvergenceError(
                f"Langevin chain for node {a} diverged at step {done} "
                f"(sup-norm {sup:.3g}); reduce h or increase beta"
            )
    if kept == 0:
        raise ConvergenceError("no iterates kept after burn-in")
    out = acc / kept
    out[a] = 0.0
    return out


def ew_matrix(X, params: EWParams | None = None, seed: int | None = None) -> np.ndarray:
    """Stack :func:`ew_estimator` rows for every node into a (p, p) matrix."""
    X = as_data_matrix(X)
    p = X.shape[1]
    return np.vstack([ew_estimator(X, a, params, seed) for a in range(p)])


def ew_family(X, theta_ew: np.ndarray, D: int, cap_support: int | None = None) -> GraphFamily:
    """Either-rule graph family of adaptively weighted l1 paths.

    Per node ``a`` the weights are ``1 / |theta_ew[a, b]|`` (infinite where
    the estimate is exactly zero, excluding that column); nodes whose whole
    row vanishes contribute an empty path.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    theta_ew = np.asarray(theta_ew, dtype=float)
    if theta_ew.shape != (p, p):
        raise DomainError(
            f"theta_ew must have shape ({p}, {p}), got {theta_ew.shape}"
        )
    if np.any(np.diag(theta_ew) != 0.0):
        raise DomainError("theta_ew must have a zero diagonal")
    paths = []
    for a in range(p):
        with np.errstate(divide="ignore"):
            wts = 1.0 / np.abs(theta_ew[a])
        wts[a] = np.inf
        if not np.any(np.isfinite(wts)):
            logger.info(
                "ew_family: all-zero coefficient row for node %d; empty path", a
            )
        paths.append(lasso_path(X, a, weights=wts, max_support=cap_support))
    return collect_path_graphs(paths, D, "or")
