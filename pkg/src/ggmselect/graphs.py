"""Undirected graphs on ``p`` labeled nodes and ordered graph families.

A graph is stored as a canonical sorted tuple of edges ``(a, b)`` with
``0 <= a < b < p``.  Graphs are immutable, hashable, and compare equal iff
they have the same node count and edge set, regardless of the edge order
they were built from.
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError

__all__ = ["Graph", "GraphFamily", "degree_profile", "family_union"]


class Graph:
    """Immutable undirected graph on nodes ``0..p-1``."""

    __slots__ = ("p", "edges", "_neighbors", "_degrees", "_hash")

    def __init__(self, p: int, edges: Iterable[Sequence[int]] = ()):
        if p < 1:
            raise DomainError(f"p must be >= 1, got {p}")
        canon = set()
        for e in edges:
            a, b = int(e[0]), int(e[1])
            if a == b:
                raise DomainError(f"self-loop at node {a}")
            if a > b:
                a, b = b, a
            if not (0 <= a and b < p):
                raise DomainError(f"edge ({a},{b}) outside nodes 0..{p - 1}")
            canon.add((a, b))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        nbrs = [[] for _ in range(p)]
        for a, b in self.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        object.__setattr__(self, "_neighbors", tuple(tuple(sorted(s)) for s in nbrs))
        object.__setattr__(self, "_degrees", tuple(len(s) for s in nbrs))
        object.__setattr__(self, "_hash", hash((p, self.edges)))

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    # -- basic queries ----------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, a: int) -> tuple[int, ...]:
        """Sorted neighbors of node ``a``."""
        return self._neighbors[a]

    def degree(self, a: int) -> int:
        return self._degrees[a]

    def degrees(self) -> np.ndarray:
        """Degree profile as an int array of length ``p``."""
        return np.array(self._degrees, dtype=int)

    def max_degree(self) -> int:
        return max(self._degrees) if self.p else 0

    def has_edge(self, a: int, b: int) -> bool:
        return b in self._neighbors[a]

    # -- constructive helpers ---------------------------------------------

    def with_edge(self, a: int, b: int) -> "Graph":
        return Graph(self.p, self.edges + ((a, b),))

    def without_edge(self, a: int, b: int) -> "Graph":
        if a > b:
            a, b = b, a
        return Graph(self.p, tuple(e for e in self.edges if e != (a, b)))

    @classmethod
    def empty(cls, p: int) -> "Graph":
        return cls(p, ())

    @classmethod
    def complete(cls, p: int) -> "Graph":
        return cls(p, [(a, b) for a in range(p) for b in range(a + 1, p)])

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-ready form ``{"p": p, "edges": [[a, b], ...]}``."""
        return {"p": self.p, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "Graph":
        try:
            return cls(int(d["p"]), d["edges"])
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed graph payload: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "Graph":
        return cls.from_dict(json.loads(s))

    # -- dunder -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.p == other.p
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(p={self.p}, n_edges={self.n_edges})"


class GraphFamily:
    """Ordered, duplicate-free collection of candidate graphs.

    Each member carries a provenance label (which construction produced it).
    Duplicates are dropped on construction, keeping the first occurrence and
    its label.
    """

    def __init__(
        self,
        p: int,
        d_max: int,
        graphs: Iterable[Graph] = (),
        labels: Iterable[str] | str = (),
        truncated: bool = False,
    ):
        graphs = list(graphs)
        if isinstance(labels, str):
            labels = [labels] * len(graphs)
        else:
            labels = list(labels)
        if len(labels) != len(graphs):
            raise DomainError(
                f"{len(graphs)} graphs but {len(labels)} provenance labels"
            )
        self.p = p
        self.d_max = d_max
        self.truncated = truncated
        self._graphs: list[Graph] = []
        self._labels: list[str] = []
        seen = set()
        for g, lab in zip(graphs, labels):
            if g.p != p:
                raise DomainError(f"graph on {g.p} nodes in family with p={p}")
            if g.max_degree() > d_max:
                raise DomainError(
                    f"graph with max degree {g.max_degree()} exceeds d_max={d_max}"
                )
            if g not in seen:
                seen.add(g)
                self._graphs.append(g)
                self._labels.append(lab)

    @property
    def graphs(self) -> tuple[Graph, ...]:
        return tuple(self._graphs)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._labels)

    def __len__(self) -> int:
        return len(self._graphs)

    def __iter__(self) -> Iterator[Graph]:
        return iter(self._graphs)

    def __getitem__(self, i: int) -> Graph:
        return self._graphs[i]

    def __contains__(self, g: Graph) -> bool:
        return g in set(self._graphs)

    def __repr__(self) -> str:
        return (
            f"GraphFamily(p={self.p}, d_max={self.d_max}, "
            f"size={len(self)}, truncated={self.truncated})"
        )


def degree_profile(G: Graph) -> np.ndarray:
    """Node degrees of ``G`` as an int array; sums to twice the edge count."""
    return G.degrees()


def family_union(families: Sequence[GraphFamily]) -> GraphFamily:
    """Concatenate families, deduplicating and keeping first labels.

    All inputs must share ``p``; the union's ``d_max`` is the largest input
    ``d_max`` and its ``truncated`` flag is the OR of the inputs'.
    """
    if not families:
        raise DomainError("family_union needs at least one family")
    p = families[0].p
    for fam in families[1:]:
        if fam.p != p:
            raise DomainError(f"mismatched node counts: {fam.p} != {p}")
    d_max = max(f.d_max for f in families)
    graphs: list[Graph] = []
    labels: list[str] = []
    for fam in families:
        graphs.extend(fam.graphs)
        labels.extend(fam.labels)
    return GraphFamily(
        p,
        d_max,
        graphs,
        labels,
        truncated=any(f.truncated for f in families),
    )
