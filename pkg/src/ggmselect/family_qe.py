"""Quasi-exhaustive graph family.

Per node, an exhaustive search over all regressor subsets of size at most
``D`` picks the neighborhood minimizing the penalized node criterion

    rss_n(S) * (1 + pen(|S|) / (n - |S|)).

The node neighborhoods are combined into two graphs (an edge needs the
relation in both directions for the AND graph, either direction for the OR
graph), and the family is every graph sandwiched between them whose degrees
stay within ``D``.  When the sandwich contains more than ``cap`` subsets, a
greedy stepwise walk between the two endpoint graphs stands in for the full
enumeration.

The subset search is the hot loop (sum_k binom(p-1, k) candidate subsets per
node); it runs on a Gram-matrix DFS with an incrementally updated Cholesky
factor, compiled with numba when available.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .graphs import Graph, GraphFamily
from .linmodel import CritEvaluator, as_data_matrix
from .penalty import PenaltyTable

try:  # pragma: no cover - exercised implicitly by every call
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


__all__ = [
    "select_neighborhood",
    "select_all_neighborhoods",
    "and_or_graphs",
    "qe_family",
]

# Relative tolerances of the DFS kernel: a candidate column whose residual
# (after projection on the chosen ones) falls below _COLLINEAR_RTOL of its
# norm is skipped as collinear; a subset whose rss falls below _EXACT_RTOL of
# ||X_a||^2 stops descending (supersets cannot improve the criterion).
_COLLINEAR_RTOL = 1e-10
_EXACT_RTOL = 1e-12


@njit(cache=True)
def _best_subset_kernel(Gsub, c, gaa, D, mult_over_n):  # pragma: no cover
    """DFS over all subsets of candidates (columns of ``Gsub``) of size <= D.

    Returns (best_crit, best_size, best_members) where ``best_members`` holds
    candidate indices (ascending) in its first ``best_size`` slots.  Subsets
    are visited in lexicographic preorder; ties on the criterion prefer the
    smaller subset, then the lexicographically smaller one.
    """
    m = Gsub.shape[0]
    L = np.zeros((D, D))
    w = np.zeros(D)
    y = np.zeros(D)
    chosen = np.zeros(D, dtype=np.int64)
    best_members = np.zeros(D, dtype=np.int64)
    best_crit = gaa * mult_over_n[0]
    best_size = 0
    ssq = 0.0
    depth = 0
    nxt = 0
    while True:
        while depth < D and nxt < m:
            j = nxt
            # Solve L[:depth,:depth] y = Gsub[chosen[:depth], j].
            ok = True
            for r in range(depth):
                s = Gsub[chosen[r], j]
                for t in range(r):
                    s -= L[r, t] * y[t]
                y[r] = s / L[r, r]
            d2 = Gsub[j, j]
            for t in range(depth):
                d2 -= y[t] * y[t]
            if d2 <= _COLLINEAR_RTOL * Gsub[j, j]:
                nxt += 1  # column is collinear with the chosen ones
                continue
            ell = math.sqrt(d2)
            s = c[j]
            for t in range(depth):
                s -= y[t] * w[t]
            wk = s / ell
            for t in range(depth):
                L[depth, t] = y[t]
            L[depth, depth] = ell
            w[depth] = wk
            chosen[depth] = j
            ssq += wk * wk
            depth += 1
            rss = gaa - ssq
            if rss < 0.0:
                rss = 0.0
            cr = rss * mult_over_n[depth]
            better = False
            if cr < best_crit:
                better = True
            elif cr == best_crit:
                if depth < best_size:
                    better = True
                elif depth == best_size:
                    for t in range(depth):
                        if chosen[t] < best_members[t]:
                            better = True
                            break
                        if chosen[t] > best_members[t]:
                            break
            if better:
                best_crit = cr
                best_size = depth
                for t in range(depth):
                    best_members[t] = chosen[t]
            if rss <= _EXACT_RTOL * gaa:
                nxt = m  # exact fit: no superset can win, skip descendants
            else:
                nxt = j + 1
        if depth == 0:
            break
        depth -= 1
        ssq -= w[depth] * w[depth]
        nxt = chosen[depth] + 1
    return best_crit, best_size, best_members


def _node_multipliers(pt: PenaltyTable, D: int, n: int) -> np.ndarray:
    mult = np.empty(D + 1)
    for k in range(D + 1):
        mult[k] = (1.0 + pt.pen(k) / (n - k)) / n
    return mult


def _select_one(G: np.ndarray, a: int, D: int, mult_over_n: np.ndarray) -> tuple[int, ...]:
    p = G.shape[0]
    cand = np.array([j for j in range(p) if j != a], dtype=np.int64)
    Gsub = np.ascontiguousarray(G[np.ix_(cand, cand)])
    c = np.ascontiguousarray(G[cand, a])
    _, size, members = _best_subset_kernel(Gsub, c, G[a, a], D, mult_over_n)
    return tuple(int(cand[members[t]]) for t in range(size))


def select_neighborhood(X, a: int, D: int, pt: PenaltyTable) -> tuple[int, ...]:
    """Best neighborhood of node ``a`` over all subsets of size at most ``D``.

    Ties on the criterion prefer fewer regressors, then the lexicographically
    smallest column tuple.  With ``D = 0`` the empty tuple is returned.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    if not (0 <= a < p):
        raise DomainError(f"node {a} outside 0..{p - 1}")
    D = min(int(D), p - 1)
    if D < 0:
        raise DomainError(f"D must be >= 0, got {D}")
    if D > min(pt.params.d_max, n - 3):
        raise DomainError(
            f"D={D} exceeds min(table d_max, n-3) = {min(pt.params.d_max, n - 3)}"
        )
    G = X.T @ X
    return _select_one(G, a, D, _node_multipliers(pt, D, n))


def select_all_neighborhoods(X, D: int, pt: PenaltyTable) -> list[tuple[int, ...]]:
    """Run :func:`select_neighborhood` for every node, sharing one Gram matrix."""
    X = as_data_matrix(X)
    n, p = X.shape
    D = min(int(D), p - 1)
    if D < 0:
        raise DomainError(f"D must be >= 0, got {D}")
    if D > min(pt.params.d_max, n - 3):
        raise DomainError(
            f"D={D} exceeds min(table d_max, n-3) = {min(pt.params.d_max, n - 3)}"
        )
    G = X.T @ X
    mult = _node_multipliers(pt, D, n)
    return [_select_one(G, a, D, mult) for a in range(p)]


def and_or_graphs(neighborhoods: list[tuple[int, ...]]) -> tuple[Graph, Graph]:
    """Combine node neighborhoods into the mutual and one-sided edge graphs.

    Edge ``(a, b)`` is in the AND graph iff each node selected the other, and
    in the OR graph iff at least one did.  The AND graph is a subgraph of the
    OR graph by construction.
    """
    p = len(neighborhoods)
    sets = [frozenset(ne) for ne in neighborhoods]
    for a, ne in enumerate(sets):
        if a in ne or any(not (0 <= b < p) for b in ne):
            raise DomainError(f"invalid neighborhood for node {a}: {sorted(ne)}")
    and_edges = []
    or_edges = []
    for a in range(p):
        for b in sets[a]:
            if b <= a:
                continue
            if a in sets[b]:
                and_edges.append((a, b))
            or_edges.append((a, b))
        for b in range(a + 1, p):
            if b not in sets[a] and a in sets[b]:
                or_edges.append((a, b))
    return Graph(p, and_edges), Graph(p, or_edges)


def _stepwise_family(
    G_and: Graph,
    G_or: Graph,
    D: int,
    cap: int,
    X,
    pt: PenaltyTable,
) -> GraphFamily:
    """Greedy walk from the AND graph toggling one sandwich edge at a time.

    Each step applies the single add/remove of a toggleable edge that most
    decreases the criterion (respecting the degree cap) and stops when no
    toggle improves it.  The family is the chain of visited graphs.
    """
    ev = CritEvaluator(X, pt)
    toggles = sorted(set(G_or.edges) - set(G_and.edges))
    visited = [G_and]
    current = G_and
    current_crit = ev.graph_crit(current)
    for _ in range(cap):
        best_edge = None
        best_crit = current_crit
        for (a, b) in toggles:
            if current.has_edge(a, b):
                cand = current.without_edge(a, b)
            else:
                if current.degree(a) >= D or current.degree(b) >= D:
                    continue
                cand = current.with_edge(a, b)
            # Only nodes a and b change; reuse cached node criteria.
            delta = (
                ev.node_crit(a, cand.neighbors(a))
                + ev.node_crit(b, cand.neighbors(b))
                - ev.node_crit(a, current.neighbors(a))
                - ev.node_crit(b, current.neighbors(b))
            )
            cand_crit = current_crit + delta
            if cand_crit < best_crit - 1e-12 * max(1.0, abs(current_crit)):
                best_crit = cand_crit
                best_edge = (a, b)
        if best_edge is None:
            break
        a, b = best_edge
        current = (
            current.without_edge(a, b)
            if current.has_edge(a, b)
            else current.with_edge(a, b)
        )
        current_crit = best_crit
        visited.append(current)
    return GraphFamily(G_and.p, D, visited, "qe", truncated=True)


def qe_family(
    G_and: Graph,
    G_or: Graph,
    D: int,
    cap: int = 100_000,
    X=None,
    pt: PenaltyTable | None = None,
) -> GraphFamily:
    """All graphs between the AND and OR graphs with degrees at most ``D``.

    The AND graph must be a subgraph of the OR graph and satisfy the degree
    cap.  When the number of edge subsets ``2**|E(or) - E(and)|`` exceeds
    ``cap``, the enumeration is replaced by the greedy stepwise walk, which
    requires ``X`` and ``pt`` and marks the family as truncated.
    """
    if G_and.p != G_or.p:
        raise DomainError("AND/OR graphs have different node counts")
    extra = set(G_or.edges) - set(G_and.edges)
    if set(G_and.edges) | extra != set(G_or.edges):
        raise DomainError("AND graph is not a subgraph of the OR graph")
    if G_and.max_degree() > D:
        raise DomainError(
            f"AND graph max degree {G_and.max_degree()} exceeds D={D}"
        )
    if cap < 1:
        raise DomainError(f"cap must be >= 1, got {cap}")
    toggles = sorted(extra)
    t = len(toggles)
    if t > 60 or 2**t > cap:
        if X is None or pt is None:
            raise DomainError(
                "sandwich too large for enumeration; stepwise fallback "
                "requires X and pt"
            )
        return _stepwise_family(G_and, G_or, D, cap, X, pt)

    p = G_and.p
    graphs: list[Graph] = []
    base_deg = list(G_and.degrees())
    edges: list[tuple[int, int]] = list(G_and.edges)

    def rec(i: int):
        if i == t:
            graphs.append(Graph(p, tuple(edges)))
            return
        rec(i + 1)  # exclude toggles[i] first so the AND graph comes first
        a, b = toggles[i]
        if base_deg[a] < D and base_deg[b] < D:
            edges.append((a, b))
            base_deg[a] += 1
            base_deg[b] += 1
            rec(i + 1)
            edges.pop()
            base_deg[a] -= 1
            base_deg[b] -= 1

    rec(0)
    return GraphFamily(p, D, graphs, "qe", truncated=False)
