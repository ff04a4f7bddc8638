"""Graph family traced out by the l1 regularization paths of all nodes.

Every node contributes a :class:`~ggmselect.lars.LassoPath`; pooling all
their breakpoints gives the grid of regularization levels where any support
changes.  Just below each pooled level the directed supports define a graph
— an edge needs *both* directed coefficients nonzero (mutual rule) — and
the family collects the distinct graphs encountered while every degree stays
within ``D``.  The first level whose graph violates the cap ends the family;
levels above every breakpoint contribute the empty graph, which is therefore
always the first member.
"""

from __future__ import annotations

from .errors import DomainError
from .graphs import Graph, GraphFamily
from .lars import LassoPath

__all__ = ["la_family", "collect_path_graphs"]


def _graph_at(paths: list[LassoPath], lam: float, rule: str, p: int) -> Graph:
    supports = [set(path.support_at(lam)) for path in paths]
    edges = []
    for a in range(p):
        for b in supports[a]:
            if rule == "or" or (b > a and a in supports[b]):
                edges.append((min(a, b), max(a, b)))
    return Graph(p, edges)


def collect_path_graphs(paths: list[LassoPath], D: int, rule: str) -> GraphFamily:
    """Distinct graphs along the pooled breakpoint grid, degree-capped.

    ``rule`` is ``"and"`` (edge iff both directed coefficients are nonzero)
    or ``"or"`` (either one).  Scanning runs from the largest pooled
    breakpoint downward and stops at the first graph with a degree above
    ``D``; the empty graph (levels above every breakpoint) always opens the
    family.
    """
    if rule not in ("and", "or"):
        raise DomainError(f"rule must be 'and' or 'or', got {rule!r}")
    if not paths:
        raise DomainError("need at least one path")
    p = paths[0].p
    if len(paths) != p or any(path.p != p for path in paths):
        raise DomainError("need exactly one path per node")
    if sorted(path.node for path in paths) != list(range(p)):
        raise DomainError("paths must cover each node exactly once")
    paths = sorted(paths, key=lambda path: path.node)
    levels = sorted(
        {float(lam) for path in paths for lam in path.breakpoints}, reverse=True
    )
    graphs = [Graph.empty(p)]
    label = "la" if rule == "and" else "ew"
    for lam in levels:
        G = _graph_at(paths, lam, rule, p)
        if G.max_degree() > D:
            break
        graphs.append(G)
    return GraphFamily(p, D, graphs, label, truncated=False)


def la_family(paths: list[LassoPath], D: int) -> GraphFamily:
    """Mutual-rule graph family of the unweighted node paths."""
    return collect_path_graphs(paths, D, "and")
