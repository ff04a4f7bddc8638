"""Nested graph family from pairwise conditional-independence tests.

For every pair (a, b) and every conditioning set of size 0 or 1 the sample
partial correlation is turned into a likelihood-ratio p-value, and the pair
keeps the *largest* p-value over conditioning choices:

    P_max(a, b) = max over c in {none} + other nodes of
                  p-value( partial corr of (a, b) given c ).

A small P_max means no single node (nor the raw correlation) explains the
(a, b) association away.  Thresholding P_max at each of its distinct values
yields a nested sequence of graphs, truncated at the first one whose maximum
degree exceeds ``D``.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .errors import DomainError
from .graphs import Graph, GraphFamily
from .linmodel import as_data_matrix

__all__ = ["partial_corr", "pmax", "c01_family"]

# Conditioning on a column that is (numerically) a copy of one of the pair
# leaves nothing to correlate; denominators below this are treated as
# degenerate.
_DEGENERATE_TOL = 1e-12


def partial_corr(R: np.ndarray, a: int, b: int, c: int | None) -> float:
    """Sample partial correlation of (a, b) given c (or plain correlation).

    ``R`` is a correlation matrix; ``c=None`` means an empty conditioning
    set, returning ``R[a, b]`` itself.  Raises a domain error when either
    marginal correlation with ``c`` has modulus (numerically) 1, which makes
    the expression 0/0.
    """
    R = np.asarray(R, dtype=float)
    p = R.shape[0]
    if R.shape != (p, p):
        raise DomainError(f"correlation matrix must be square, got {R.shape}")
    if a == b or not all(0 <= i < p for i in (a, b)):
        raise DomainError(f"need two distinct nodes in 0..{p - 1}, got ({a}, {b})")
    if c is None:
        return float(R[a, b])
    if c in (a, b) or not (0 <= c < p):
        raise DomainError(
            f"conditioning node must be distinct and in 0..{p - 1}, got {c}"
        )
    den2 = (1.0 - R[a, c] ** 2) * (1.0 - R[b, c] ** 2)
    if den2 <= _DEGENERATE_TOL:
        raise DomainError(
            f"degenerate conditioning: |corr| with node {c} is numerically 1"
        )
    return float((R[a, b] - R[a, c] * R[b, c]) / np.sqrt(den2))


def _lrt_pvalue(r2: np.ndarray, n: int) -> np.ndarray:
    """P-value of the no-association likelihood-ratio test.

    The deviance statistic is ``n * log(1 / (1 - r^2))``, compared to its
    asymptotic chi-square(1) null law.
    """
    r2 = np.clip(r2, 0.0, 1.0 - 1e-15)
    stat = -n * np.log1p(-r2)
    return stats.chi2.sf(stat, df=1)


def pmax(X) -> np.ndarray:
    """Matrix of largest p-values over conditioning sets of size <= 1.

    Returns a symmetric (p, p) array with 1.0 on the diagonal.  Requires
    ``p >= 2`` and non-constant columns.  A conditioning column that is a
    numerical copy of either pair member would make the test degenerate; its
    (clipped) partial correlation then has modulus ~1, p-value ~0, and it
    never wins the max — i.e. degenerate conditionings are skipped.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    if p < 2:
        raise DomainError(f"need at least 2 columns, got {p}")
    sd = X.std(axis=0)
    if np.any(sd <= 0.0):
        raise DomainError(
            f"constant columns at indices {np.flatnonzero(sd <= 0.0).tolist()}"
        )
    R = np.corrcoef(X, rowvar=False)
    P = _lrt_pvalue(R**2, n)
    np.fill_diagonal(P, 1.0)
    for c in range(p):
        rc = R[:, c]
        den2 = np.outer(1.0 - rc**2, 1.0 - rc**2)
        den2 = np.maximum(den2, _DEGENERATE_TOL**2)
        Rc = (R - np.outer(rc, rc)) / np.sqrt(den2)
        Pc = _lrt_pvalue(Rc**2, n)
        Pc[c, :] = -np.inf  # pairs involving c itself: not a valid conditioning
        Pc[:, c] = -np.inf
        P = np.maximum(P, Pc)
    np.fill_diagonal(P, 1.0)
    return P


def c01_family(P: np.ndarray, D: int) -> GraphFamily:
    """Nested family of graphs thresholding ``P`` at its distinct values.

    Starts from the empty graph, then adds every threshold graph
    ``{(a,b): P[a,b] <= alpha}`` for the sorted distinct off-diagonal values
    ``alpha``, stopping just before the first graph whose maximum degree
    exceeds ``D``.  The family size never exceeds ``p * D + 1``.
    """
    P = np.asarray(P, dtype=float)
    p = P.shape[0]
    if P.shape != (p, p) or p < 2:
        raise DomainError(f"P must be a square matrix with p >= 2, got {P.shape}")
    if not np.allclose(P, P.T):
        raise DomainError("P must be symmetric")
    if D < 0:
        raise DomainError(f"D must be >= 0, got {D}")
    iu = np.triu_indices(p, k=1)
    vals = P[iu]
    order = np.argsort(vals, kind="stable")
    graphs = [Graph.empty(p)]
    edges: list[tuple[int, int]] = []
    deg = [0] * p
    i = 0
    m = len(order)
    while i < m:
        alpha = vals[order[i]]
        j = i
        ok = True
        while j < m and vals[order[j]] == alpha:
            a, b = iu[0][order[j]], iu[1][order[j]]
            edges.append((int(a), int(b)))
            deg[a] += 1
            deg[b] += 1
            if deg[a] > D or deg[b] > D:
                ok = False
            j += 1
        if not ok:
            break
        graphs.append(Graph(p, tuple(edges)))
        i = j
    return GraphFamily(p, D, graphs, "c01", truncated=False)
