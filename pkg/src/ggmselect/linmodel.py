"""Node-wise least squares and the penalized selection criterion.

Given data ``X`` (n rows, p columns) and a graph ``G``, each node ``a`` is
regressed on its neighbor columns.  Stacking the coefficient rows gives a
p-by-p matrix ``theta`` (zero diagonal, row ``a`` supported on the
neighborhood of ``a``), and the criterion scored by the selector is

    crit(X, G) = sum_a ||X_a - X theta_a||_n^2 * (1 + pen(d_a) / (n - d_a)),

where ``||v||_n^2 = ||v||^2 / n``, ``d_a`` is the degree of ``a`` and the
penalty comes from a precomputed table.  The criterion is additive over
nodes, which the evaluator exploits by caching per-(node, neighborhood)
residuals across the many overlapping graphs of a family.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg as slinalg

from .errors import DomainError
from .graphs import Graph
from .penalty import PenaltyTable

__all__ = [
    "NodeFit",
    "as_data_matrix",
    "fit_neighborhood",
    "fit_graph",
    "crit",
    "CritEvaluator",
]

# Relative rank tolerance used both for the QR fast path's rank check and for
# the pivoted fallback.
_RANK_RTOL = 1e-10


def as_data_matrix(X) -> np.ndarray:
    """Validate and return ``X`` as a float (n, p) array with finite entries."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DomainError(f"data matrix must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError("data matrix contains non-finite entries")
    return X


@dataclass(frozen=True)
class NodeFit:
    """Least-squares fit of one node on a set of other columns.

    Attributes
    ----------
    node : int
        Response column index.
    support : tuple[int, ...]
        Sorted regressor column indices.
    coef : np.ndarray
        Length-p coefficient vector, zero outside ``support``.
    rss : float
        Mean squared residual ``||X_node - X coef||^2 / n``.
    rank_deficient : bool
        True when the regressor block was numerically rank deficient and the
        minimum-norm solution was taken.
    """

    node: int
    support: tuple[int, ...]
    coef: np.ndarray
    rss: float
    rank_deficient: bool


def _solve_ls(A: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, bool]:
    """Least squares with a QR fast path and a min-norm pivoted fallback."""
    q, r = np.linalg.qr(A)
    diag = np.abs(np.diag(r))
    if diag.size and diag.min() > _RANK_RTOL * max(diag.max(), 1e-300):
        beta = slinalg.solve_triangular(r, q.T @ y)
        return beta, False
    # Rank-deficient: minimum-norm solution via LAPACK's pivoted-QR driver.
    # cond must match the rank tolerance above, otherwise the driver can keep
    # a numerically-zero pivot and return a catastrophically cancelled fit.
    beta, _, rank, _ = slinalg.lstsq(A, y, cond=_RANK_RTOL, lapack_driver="gelsy")
    return beta, True


def fit_neighborhood(X, a: int, support: Sequence[int]) -> NodeFit:
    """Regress column ``a`` of ``X`` on the columns in ``support``.

    ``support`` must not contain ``a`` and must have at most ``n - 2``
    elements.  An empty support gives the zero fit with
    ``rss = ||X_a||^2 / n``.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    if not (0 <= a < p):
        raise DomainError(f"node {a} outside 0..{p - 1}")
    supp = tuple(sorted(int(s) for s in support))
    if len(set(supp)) != len(supp):
        raise DomainError(f"support has repeated entries: {supp}")
    if a in supp:
        raise DomainError(f"support of node {a} must not contain the node itself")
    if any(not (0 <= s < p) for s in supp):
        raise DomainError(f"support {supp} outside 0..{p - 1}")
    if len(supp) > n - 2:
        raise DomainError(
            f"support size {len(supp)} exceeds n - 2 = {n - 2}"
        )
    y = X[:, a]
    coef = np.zeros(p)
    if not supp:
        return NodeFit(a, (), coef, float(y @ y) / n, False)
    beta, deficient = _solve_ls(X[:, supp], y)
    coef[list(supp)] = beta
    r = y - X[:, supp] @ beta
    return NodeFit(a, supp, coef, float(r @ r) / n, deficient)


def fit_graph(X, G: Graph) -> np.ndarray:
    """Coefficient matrix of ``G``: row ``a`` is the fit of node ``a`` on its
    neighbors.  Returns a (p, p) array with zero diagonal."""
    X = as_data_matrix(X)
    n, p = X.shape
    if G.p != p:
        raise DomainError(f"graph has {G.p} nodes but data has {p} columns")
    if G.max_degree() > n - 2:
        raise DomainError(
            f"graph max degree {G.max_degree()} exceeds n - 2 = {n - 2}"
        )
    theta = np.zeros((p, p))
    for a in range(p):
        theta[a] = fit_neighborhood(X, a, G.neighbors(a)).coef
    return theta


class CritEvaluator:
    """Criterion evaluation with per-(node, neighborhood) residual caching.

    Families produced by the graph constructions share most neighborhoods
    across members, so caching the node residuals turns the family sweep
    from O(|family| * p) regressions into O(#distinct neighborhoods).
    """

    def __init__(self, X, pt: PenaltyTable):
        self.X = as_data_matrix(X)
        self.n, self.p = self.X.shape
        if pt.params.n != self.n:
            raise DomainError(
                f"penalty table built for n={pt.params.n}, data has n={self.n}"
            )
        if pt.params.p != self.p:
            raise DomainError(
                f"penalty table built for p={pt.params.p}, data has p={self.p}"
            )
        self.pt = pt
        self._rss: dict[tuple[int, tuple[int, ...]], float] = {}

    def node_rss(self, a: int, support: Sequence[int]) -> float:
        key = (a, tuple(sorted(int(s) for s in support)))
        rss = self._rss.get(key)
        if rss is None:
            rss = fit_neighborhood(self.X, a, key[1]).rss
            self._rss[key] = rss
        return rss

    def node_crit(self, a: int, support: Sequence[int]) -> float:
        d = len(support)
        if d > self.pt.params.d_max:
            raise DomainError(
                f"degree {d} exceeds penalty table range {self.pt.params.d_max}"
            )
        return self.node_rss(a, support) * (1.0 + self.pt.pen(d) / (self.n - d))

    def per_node(self, G: Graph) -> np.ndarray:
        if G.p != self.p:
            raise DomainError(f"graph has {G.p} nodes, data has {self.p}")
        return np.array([self.node_crit(a, G.neighbors(a)) for a in range(self.p)])

    def graph_crit(self, G: Graph) -> float:
        return float(self.per_node(G).sum())


def crit(X, G: Graph, pt: PenaltyTable) -> float:
    """Penalized prediction criterion of ``G`` on data ``X``.

    Nonnegative; reduces to the plain sum of node mean squared residuals
    when every penalty table entry is zero.
    """
    return CritEvaluator(X, pt).graph_crit(G)
