"""Bounded-degree graphs, the degree/neighbor query model, and set predicates.

Graphs are immutable and keep every adjacency list sorted ascending, so the
answer to "the j-th neighbor of v" is fixed.  All sublinear algorithms in the
package read the graph through :class:`Probe`, which forwards to
:func:`degree` / :func:`neighbor` and so charges a :class:`QueryLedger`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

VertexSet = frozenset


class GraphParseError(ValueError):
    """Base class for edge-list parse failures; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MalformedHeaderError(GraphParseError):
    pass


class MalformedEdgeError(GraphParseError):
    pass


class VertexRangeError(GraphParseError):
    pass


class DuplicateEdgeError(GraphParseError):
    pass


class SelfLoopError(GraphParseError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1`` with sorted adjacency."""

    adjacency: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if v in adj[u]:
                raise ValueError(f"duplicate edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
        return cls(tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def from_adjacency(cls, adj: Sequence[Iterable[int]]) -> "Graph":
        """Build from (possibly unsorted) neighbor lists; symmetry is checked."""
        lists = tuple(tuple(sorted(set(a))) for a in adj)
        for u, nbrs in enumerate(lists):
            for v in nbrs:
                if v == u or u not in lists[v]:
                    raise ValueError(f"adjacency not symmetric/simple at ({u}, {v})")
        return cls(lists)

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    @property
    def d_max(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def deg(self, v: int) -> int:
        """Degree without charging any ledger (for global, non-sublinear code)."""
        return len(self.adjacency[v])

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v]

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph relabelled to ``0..len-1``; returns it with the old ids."""
        old = sorted(set(vertices))
        index = {v: i for i, v in enumerate(old)}
        adj = [tuple(index[w] for w in self.adjacency[v] if w in index) for v in old]
        return Graph(tuple(adj)), old

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        out = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [s], [s]
            while stack:
                x = stack.pop()
                for y in self.adjacency[x]:
                    if not seen[y]:
                        seen[y] = True
                        comp.append(y)
                        stack.append(y)
            out.append(sorted(comp))
        return out


def parse_graph(text: str | bytes) -> Graph:
    """Parse the ``n m`` header + ``u v`` edge-list format ('#' lines are comments)."""
    if isinstance(text, bytes):
        text = text.decode()
    header = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    n = m = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            try:
                n, m = (int(p) for p in parts)
            except ValueError:
                raise MalformedHeaderError(lineno, f"expected 'n m', got {line!r}") from None
            if n < 0 or m < 0:
                raise MalformedHeaderError(lineno, "negative n or m")
            header = lineno
            continue
        if len(parts) != 2:
            raise MalformedEdgeError(lineno, f"expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedEdgeError(lineno, f"non-integer vertex in {line!r}") from None
        if len(edges) == m:
            raise MalformedEdgeError(lineno, f"more than m={m} edge lines")
        if not (0 <= u < n and 0 <= v < n):
            raise VertexRangeError(lineno, f"vertex id out of range [0, {n})")
        if u == v:
            raise SelfLoopError(lineno, f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdgeError(lineno, f"duplicate edge {key}")
        seen.add(key)
        edges.append(key)
    if header is None:
        raise MalformedHeaderError(1, "missing header")
    if len(edges) != m:
        raise MalformedEdgeError(header, f"header declares m={m} but found {len(edges)} edges")
    return Graph.from_edges(n, edges)


def serialize_graph(G: Graph) -> str:
    lines = [f"{G.n} {G.m}"]
    lines.extend(f"{u} {v}" for u, v in G.edges())
    return "\n".join(lines) + "\n"


# -- query model -------------------------------------------------------------


@dataclass
class QueryLedger:
    """Counts degree and neighbor queries; snapshots attribute them to calls."""

    degree_queries: int = 0
    neighbor_queries: int = 0
    per_call_snapshots: list[tuple[object, int]] = field(default_factory=list)
    _mark: int = 0

    @property
    def total(self) -> int:
        return self.degree_queries + self.neighbor_queries

    def snapshot(self, call_id) -> int:
        """Record (and return) the queries made since the previous snapshot."""
        delta = self.total - self._mark
        self._mark = self.total
        self.per_call_snapshots.append((call_id, delta))
        return delta

    @property
    def max_per_call(self) -> int:
        return max((q for _, q in self.per_call_snapshots), default=0)


def degree(G: Graph, ledger: QueryLedger | None, v: int) -> int:
    if ledger is not None:
        ledger.degree_queries += 1
    return len(G.adjacency[v])


def neighbor(G: Graph, ledger: QueryLedger | None, v: int, j: int) -> int:
    """The j-th neighbor of v, 1-based as in the query model."""
    nbrs = G.adjacency[v]
    if not 1 <= j <= len(nbrs):
        raise IndexError(f"neighbor index {j} out of range for vertex {v} of degree {len(nbrs)}")
    if ledger is not None:
        ledger.neighbor_queries += 1
    return nbrs[j - 1]


class Probe:
    """Query-model view of a graph for one logical call.

    Reading a vertex's adjacency costs one degree query plus one neighbor
    query per incident edge, and only the first time within this probe;
    a local algorithm is free to remember answers it has seen.

    ``footprint()`` scopes collect the set of vertices read, so a memoized
    sub-result can later be replayed with :meth:`charge` at exactly the cost a
    fresh execution would have paid.
    """

    __slots__ = ("G", "ledger", "_known", "_scopes")

    def __init__(self, G: Graph, ledger: QueryLedger | None = None):
        self.G = G
        self.ledger = ledger
        self._known: dict[int, tuple[int, ...]] = {}
        self._scopes: list[set[int]] = []

    def adjacent(self, v: int) -> tuple[int, ...]:
        nbrs = self._known.get(v)
        if nbrs is None:
            d = degree(self.G, self.ledger, v)
            nbrs = tuple(neighbor(self.G, self.ledger, v, j) for j in range(1, d + 1))
            self._known[v] = nbrs
        for scope in self._scopes:
            scope.add(v)
        return nbrs

    def charge(self, vertices: Iterable[int]) -> None:
        """Read every vertex in ``vertices``; same cost as calling adjacent() on each."""
        known, adjacency = self._known, self.G.adjacency
        fresh = [v for v in vertices if v not in known]
        for v in fresh:
            known[v] = adjacency[v]
        if self.ledger is not None and fresh:
            self.ledger.degree_queries += len(fresh)
            self.ledger.neighbor_queries += sum(len(adjacency[v]) for v in fresh)
        for scope in self._scopes:
            scope.update(vertices)

    def begin(self) -> None:
        self._scopes.append(set())

    def end(self) -> frozenset[int]:
        return frozenset(self._scopes.pop())

    @property
    def read(self) -> frozenset[int]:
        return frozenset(self._known)


# -- set predicates ----------------------------------------------------------


def boundary(G: Graph, S: Iterable[int]) -> set[int]:
    """N(S): vertices outside S adjacent to some vertex of S."""
    S = set(S)
    out = set()
    for v in S:
        out.update(w for w in G.adjacency[v] if w not in S)
    return out


def cut_size(G: Graph, S: Iterable[int]) -> int:
    return len(boundary(G, S))


def conductance(G: Graph, S: Iterable[int]) -> Fraction:
    S = set(S)
    if not S:
        raise ValueError("conductance of the empty set is undefined")
    return Fraction(cut_size(G, S), len(S))


def is_connected_subset(G: Graph, S: Iterable[int]) -> bool:
    S = set(S)
    if not S:
        return False
    start = next(iter(S))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in G.adjacency[x]:
            if y in S and y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(S)


def is_isolated_neighborhood(G: Graph, v: int, S: Iterable[int], k: int, delta, c: int) -> bool:
    """True iff S is a (k, delta, c)-isolated neighborhood of v in G."""
    S = set(S)
    if v not in S or len(S) > k or not is_connected_subset(G, S):
        return False
    eta = cut_size(G, S)
    return eta <= c and Fraction(eta, len(S)) <= as_fraction(delta)


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, 'p/q' string, or float (via repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


# -- partitions --------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """A partition f of V: ``component_of[v]`` indexes into ``components``."""

    component_of: tuple[int, ...]
    components: tuple[frozenset[int], ...]
    cut_edges: int

    @classmethod
    def from_sets(cls, G: Graph, f: Sequence[Iterable[int]]) -> "Partition":
        """Build from a per-vertex mapping v -> f(v); checks it is a partition."""
        comp_of = [-1] * G.n
        comps: list[frozenset[int]] = []
        for v in range(G.n):
            if comp_of[v] >= 0:
                continue
            block = frozenset(f[v])
            if v not in block:
                raise ValueError(f"vertex {v} not in its own component")
            for w in block:
                if comp_of[w] >= 0 or frozenset(f[w]) != block:
                    raise ValueError(f"inconsistent component for vertex {w}")
                comp_of[w] = len(comps)
            comps.append(block)
        cut = sum(1 for u, w in G.edges() if comp_of[u] != comp_of[w])
        return cls(tuple(comp_of), tuple(comps), cut)

    def part(self, v: int) -> frozenset[int]:
        return self.components[self.component_of[v]]

    def rep(self, v: int) -> int:
        return min(self.part(v))

    def to_text(self) -> str:
        return "".join(f"{v} {self.rep(v)}\n" for v in range(len(self.component_of)))
