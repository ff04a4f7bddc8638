"""Sparse Gaussian graphical model simulator.

A precision matrix is built as ``Omega0 = B B^T + D`` where ``B`` is a
random sparse lower-triangular matrix with a 3-block community layout
(within-block entries kept with probability ``eta_int``, across blocks
``eta_ext``; kept values Uniform[-1, 1]; diagonal Uniform[0, eps]) and ``D``
is a small diagonal jitter.  Both matrices are rescaled so the implied
covariance has unit diagonal.  The edges of the conditional-independence
graph are the nonzero off-diagonal entries of the precision matrix, and row
``a`` of the regression-coefficient matrix is ``theta[a, b] =
-Omega[a, b] / Omega[a, a]``.

``calibrate_eta`` finds the keep-probability matching a target sparsity
index (average node degree, ``2 |E| / p``) by bisection with common random
numbers across the bracket, so the count is monotone in ``eta`` and the
bisection is reliable at small trial budgets.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._rng import substream
from .errors import DomainError
from .graphs import Graph
from .linmodel import as_data_matrix

__all__ = ["SimParams", "CovModel", "gen_cov", "sample", "calibrate_eta"]

logger = logging.getLogger("ggmselect")

# Entries of the precision matrix below this are structural zeros.
_EDGE_TOL = 1e-12
# Diagonal jitter: Uniform on [0.5e-3, 1.5e-3].
_JITTER_LO = 0.5e-3
_JITTER_HI = 1.5e-3
# Cross-block keep probability is this fraction of the within-block one.
_EXT_FRACTION = 0.2


@dataclass(frozen=True)
class SimParams:
    """Inputs of one random covariance model.

    Attributes
    ----------
    p : int
        Number of variables (>= 2).
    eta_int : float
        Within-block keep probability, in [0, 1].
    eta_ext : float
        Across-block keep probability, in [0, 1].
    eps : float
        Upper bound of the Uniform[0, eps] diagonal of the sparse factor.
    seed : int
        Root seed of the model draw.
    """

    p: int
    eta_int: float
    eta_ext: float
    eps: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.p < 2:
            raise DomainError(f"p must be >= 2, got {self.p}")
        for name in ("eta_int", "eta_ext"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name} must be in [0, 1], got {v}")
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps}")


@dataclass(frozen=True)
class CovModel:
    """A covariance/precision pair with its graph and regression form.

    ``Sigma`` has unit diagonal; ``Omega = Sigma^{-1}`` up to numerical
    inversion error; ``theta[a, b] = -Omega[a, b] / Omega[a, a]`` with zero
    diagonal; ``graph`` holds the nonzero pattern of ``Omega``; ``sigma2[a]
    = 1 / Omega[a, a]`` is the conditional variance of node ``a``.
    """

    Sigma: np.ndarray = field(repr=False)
    Omega: np.ndarray = field(repr=False)
    graph: Graph
    theta: np.ndarray = field(repr=False)
    sigma2: np.ndarray = field(repr=False)

    @property
    def p(self) -> int:
        return self.graph.p

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "sigma": self.Sigma.tolist(),
            "omega": self.Omega.tolist(),
            "graph": self.graph.to_dict(),
            "theta": self.theta.tolist(),
            "sigma2": self.sigma2.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CovModel":
        try:
            return cls(
                Sigma=np.asarray(d["sigma"], dtype=float),
                Omega=np.asarray(d["omega"], dtype=float),
                graph=Graph.from_dict(d["graph"]),
                theta=np.asarray(d["theta"], dtype=float),
                sigma2=np.asarray(d["sigma2"], dtype=float),
            )
        except KeyError as exc:
            raise DomainError(f"malformed model payload: missing {exc}") from exc


def _block_ids(p: int) -> np.ndarray:
    """Three consecutive blocks of sizes ceil(p/3), ceil(rest/2), rest."""
    b1 = -(-p // 3)
    b2 = -(-(p - b1) // 2)
    ids = np.empty(p, dtype=int)
    ids[:b1] = 0
    ids[b1 : b1 + b2] = 1
    ids[b1 + b2 :] = 2
    return ids


def gen_cov(params: SimParams) -> CovModel:
    """Draw one random covariance model from ``params``.

    Deterministic given ``params.seed``; draws are laid out so that two
    models with the same seed and different keep-probabilities share their
    underlying uniforms (common random numbers), making the edge count
    nondecreasing in eta.
    """
    p = params.p
    rng = substream(params.seed, "cov")
    ids = _block_ids(p)
    same_block = ids[:, None] == ids[None, :]
    eta_mat = np.where(same_block, params.eta_int, params.eta_ext)

    keep_u = rng.random((p, p))
    values = rng.uniform(-1.0, 1.0, size=(p, p))
    diag_b = rng.uniform(0.0, params.eps, size=p)
    jitter = rng.uniform(_JITTER_LO, _JITTER_HI, size=p)

    lower = np.tril(np.ones((p, p), dtype=bool), k=-1)
    B = np.where(lower & (keep_u < eta_mat), values, 0.0)
    B[np.arange(p), np.arange(p)] = diag_b

    Omega0 = B @ B.T + np.diag(jitter)
    Omega0 = 0.5 * (Omega0 + Omega0.T)
    Sigma0 = np.linalg.inv(Omega0)
    Sigma0 = 0.5 * (Sigma0 + Sigma0.T)
    s = np.sqrt(np.diag(Sigma0))
    Sigma = Sigma0 / np.outer(s, s)
    np.fill_diagonal(Sigma, 1.0)
    Omega = Omega0 * np.outer(s, s)

    off = np.abs(Omega) > _EDGE_TOL
    np.fill_diagonal(off, False)
    edges = [(int(a), int(b)) for a, b in zip(*np.nonzero(np.triu(off)))]
    graph = Graph(p, edges)

    d = np.diag(Omega).copy()
    theta = np.where(off, -Omega / d[:, None], 0.0)
    return CovModel(
        Sigma=Sigma,
        Omega=Omega,
        graph=graph,
        theta=theta,
        sigma2=1.0 / d,
    )


def sample(model: CovModel, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` i.i.d. centered Gaussian rows with covariance
    ``model.Sigma`` (via its Cholesky factor); deterministic per seed."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    try:
        L = np.linalg.cholesky(model.Sigma)
    except np.linalg.LinAlgError as exc:
        raise DomainError("model covariance is not positive definite") from exc
    rng = substream(seed, "sample")
    Z = rng.standard_normal((n, model.p))
    return as_data_matrix(Z @ L.T)


def sparsity_index(graph: Graph) -> float:
    """Average node degree ``2 |E| / p``."""
    return 2.0 * graph.n_edges / graph.p


def calibrate_eta(
    p: int,
    target_Is: float,
    trials: int = 100,
    seed: int = 0,
    rel_tol: float = 0.05,
    max_iter: int = 60,
) -> float:
    """Find the within-block keep probability matching a target sparsity.

    Bisection on ``eta`` in [0, 1] (with the across-block probability tied
    to ``eta / 5``), matching the mean sparsity index over ``trials``
    simulated models to ``target_Is`` within ``rel_tol`` relative error.
    The same per-trial seeds are reused at every eta (common random
    numbers), so the objective is monotone and bisection cannot stall.
    Returns 1.0 with a warning when the target is unreachable.
    """
    if target_Is < 0:
        raise DomainError(f"target_Is must be >= 0, got {target_Is}")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if target_Is == 0.0:
        return 0.0

    trial_seeds = [substream(seed, "calibrate", t).integers(2**63) for t in range(trials)]

    def mean_index(eta: float) -> float:
        total = 0.0
        for t in range(trials):
            model = gen_cov(
                SimParams(
                    p=p,
                    eta_int=eta,
                    eta_ext=eta * _EXT_FRACTION,
                    seed=int(trial_seeds[t]),
                )
            )
            total += sparsity_index(model.graph)
        return total / trials

    hi_val = mean_index(1.0)
    if hi_val < target_Is * (1.0 - rel_tol):
        logger.warning(
            "calibrate_eta: target sparsity %.3g unreachable (max %.3g); "
            "returning eta=1",
            target_Is,
            hi_val,
        )
        return 1.0
    lo, hi = 0.0, 1.0
    eta = 0.5
    for _ in range(max_iter):
        eta = 0.5 * (lo + hi)
        val = mean_index(eta)
        if abs(val - target_Is) <= rel_tol * target_Is:
            return eta
        if val < target_Is:
            lo = eta
        else:
            hi = eta
    return eta
