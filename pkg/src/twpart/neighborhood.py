"""Isolated-neighborhood search: Find-Neighborhood, enumeration, coverers.

A (k, delta, c)-isolated neighborhood of v is a connected vertex set S with
v in S, |S| <= k, |N(S)| <= c and |N(S)| / |S| <= delta.

``find_neighborhood`` is the branching search: BFS from v until k vertices
are seen; if that set is not isolated, delete one of its vertices (other
than v) and search again with one less deletion to spend.  The search tree
below a state depends only on the set of deleted vertices, so failed states
are remembered by that set; this does not change the answer.

``enumerate_neighborhoods`` lists every isolated neighborhood of v.  The
branching search run to completion encounters exactly these sets (any valid
S is reached by deleting the vertices of N(S) one by one), so the default
method generates them directly by an include/exclude search over connected
sets, which is much cheaper; ``method="branching"`` keeps the slow route for
cross-checking.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .graph import Graph, Probe, QueryLedger, as_fraction

# Per-call query bound constant: queries <= QUERY_CONSTANT * max(d, 1) * k**(c+1).
QUERY_CONSTANT = 2


@dataclass(frozen=True)
class SearchBudget:
    k: int
    delta: Fraction
    c: int

    def __post_init__(self):
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.c < 0:
            raise ValueError("c must be >= 0")
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @property
    def boundary_cap(self) -> int:
        """Largest cut-size an isolated neighborhood can have (eta <= delta*|S| <= delta*k)."""
        return min(self.c, int(self.delta * self.k))


def _bfs(probe: Probe, v: int, k: int, removed) -> list[int]:
    order = [v]
    seen = {v}
    i = 0
    while i < len(order) and len(order) < k:
        for y in probe.adjacent(order[i]):
            if y not in seen and y not in removed:
                seen.add(y)
                order.append(y)
                if len(order) == k:
                    break
        i += 1
    return order


def _isolated(probe: Probe, S, budget: SearchBudget) -> bool:
    # S comes from a BFS, so it is connected, contains v and has |S| <= k.
    members = set(S)
    nbrs = set()
    for x in S:
        for y in probe.adjacent(x):
            if y not in members:
                nbrs.add(y)
                if len(nbrs) > budget.c:
                    return False
    return len(nbrs) <= budget.delta * len(S)


def _as_probe(G: Graph, ledger, probe):
    return probe if probe is not None else Probe(G, ledger)


def find_neighborhood(G: Graph, v: int, budget: SearchBudget, ledger: QueryLedger | None = None,
                      *, probe: Probe | None = None, family=None, prune: bool = True) -> frozenset[int]:
    """Return a (k, delta, c)-isolated neighborhood of v, or {v} if none exists.

    With ``prune`` (the default) the branching search skips any state whose
    deleted set meets every isolated neighborhood of v, since no such state
    can succeed; ``family`` may supply those neighborhoods (or a callable
    producing them) when they are already known.
    The returned set is the same as with ``prune=False``.
    """
    probe = _as_probe(G, ledger, probe)
    root = _bfs(probe, v, budget.k, ())
    if _isolated(probe, root, budget):
        return frozenset(root)
    if budget.c == 0:
        return frozenset((v,))

    fam: _Family | None = None
    dead = 0  # deleted vertices as a mask over fam's numbering
    if prune:
        if family is None:
            fam = _Family.build(probe, v, budget)
        else:
            fam = family() if callable(family) else family
            if not isinstance(fam, _Family):
                fam = _Family.from_sets(v, fam)
        if not fam.masks:
            return frozenset((v,))

    failed: set[frozenset[int]] = set()
    removed: set[int] = set()

    def alive() -> bool:
        return any(not m & dead for m in fam.masks)

    def search(S, c):
        nonlocal dead
        for w in sorted(S):
            if w == v:
                continue
            removed.add(w)
            bit = fam.bit(w) if fam is not None else 0
            dead |= bit
            key = frozenset(removed)
            found = None
            if key not in failed and (fam is None or alive()):
                T = _bfs(probe, v, budget.k, removed)
                if _isolated(probe, T, budget):
                    found = T
                elif c > 1:
                    found = search(T, c - 1)
                if found is None:
                    failed.add(key)
            removed.discard(w)
            dead &= ~bit
            if found is not None:
                return found
        return None

    found = search(root, budget.c)
    return frozenset(found) if found is not None else frozenset((v,))


def _canonical(family: Iterable[frozenset[int]]) -> list[frozenset[int]]:
    return sorted(set(family), key=lambda S: tuple(sorted(S)))


def enumerate_neighborhoods(G: Graph, v: int, budget: SearchBudget, ledger: QueryLedger | None = None,
                            *, probe: Probe | None = None, method: str = "exact") -> list[frozenset[int]]:
    """All (k, delta, c)-isolated neighborhoods of v, sorted by their sorted tuples."""
    probe = _as_probe(G, ledger, probe)
    if method == "exact":
        return _Family.build(probe, v, budget).sets()
    if method == "branching":
        return _canonical(_enumerate_branching(probe, v, budget))
    raise ValueError(f"unknown method {method!r}")


class _Family:
    """The isolated neighborhoods of one vertex as bitmasks over a local numbering."""

    __slots__ = ("ids", "index", "masks", "_union")

    def __init__(self, ids: list[int], masks: list[int]):
        self.ids = ids
        self.index = {x: i for i, x in enumerate(ids)}
        self.masks = masks
        self._union = None

    @classmethod
    def build(cls, probe: Probe, v: int, budget: SearchBudget) -> "_Family":
        ids, masks = _enumerate_connected(probe, v, budget)
        return cls(ids, masks)

    @classmethod
    def from_sets(cls, v: int, sets: Iterable[Iterable[int]]) -> "_Family":
        sets = [frozenset(S) for S in sets]
        ids = sorted(set().union(*sets) | {v})
        index = {x: i for i, x in enumerate(ids)}
        return cls(ids, [sum(1 << index[x] for x in S) for S in sets])

    def bit(self, x: int) -> int:
        i = self.index.get(x)
        return 0 if i is None else 1 << i

    def _members(self, mask: int) -> list[int]:
        out = []
        while mask:
            low = mask & -mask
            out.append(self.ids[low.bit_length() - 1])
            mask ^= low
        return out

    def union(self) -> frozenset[int]:
        if self._union is None:
            acc = 0
            for m in self.masks:
                acc |= m
            self._union = frozenset(self._members(acc))
        return self._union

    def sets(self) -> list[frozenset[int]]:
        return _canonical(frozenset(self._members(m)) for m in self.masks)


def _enumerate_connected(probe: Probe, v: int, budget: SearchBudget) -> tuple[list[int], list[int]]:
    # Include/exclude over the frontier: each connected S containing v is
    # produced once, at the leaf where the frontier is empty and N(S) = X.
    # Sets are bitmasks over vertices numbered in discovery order.
    k, cap = budget.k, budget.boundary_cap
    max_cut = [int(budget.delta * p) for p in range(k + 1)]
    ids = [v]
    index = {v: 0}
    adj_mask: dict[int, int] = {}
    out: list[int] = []

    def mask_of(i):
        m = adj_mask.get(i)
        if m is None:
            m = 0
            for y in probe.adjacent(ids[i]):
                j = index.get(y)
                if j is None:
                    j = index[y] = len(ids)
                    ids.append(y)
                m |= 1 << j
            adj_mask[i] = m
        return m

    slack = k + cap
    stack = [(1, 0, mask_of(0), 1, 0)]
    pop, push, emit, known = stack.pop, stack.append, out.append, adj_mask.get
    while stack:
        P, X, frontier, p, x = pop()
        if not frontier:
            if x <= max_cut[p]:
                emit(P)
            continue
        # every frontier vertex ends up either inside S or in N(S)
        if frontier.bit_count() > slack - p - x:
            continue
        if p == k:
            # no room left: the whole frontier is the boundary
            if x + frontier.bit_count() <= max_cut[k]:
                emit(P)
            continue
        if x == cap:
            # no boundary left: everything reachable must join S
            while frontier:
                P |= frontier
                if P.bit_count() > k:
                    break
                grown = 0
                while frontier:
                    low = frontier & -frontier
                    frontier ^= low
                    i = low.bit_length() - 1
                    grown |= known(i) or mask_of(i)
                frontier = grown & ~P & ~X
            else:
                if x <= max_cut[P.bit_count()]:
                    emit(P)
            continue
        low = frontier & -frontier
        rest = frontier ^ low
        push((P, X | low, rest, p, x + 1))
        inside = P | low
        i = low.bit_length() - 1
        push((inside, X, rest | ((known(i) or mask_of(i)) & ~inside & ~X), p + 1, x))
    return ids, out


def _enumerate_branching(probe: Probe, v: int, budget: SearchBudget) -> list[frozenset[int]]:
    # The branching search run without stopping at the first hit.
    out: list[frozenset[int]] = []
    visited: set[frozenset[int]] = set()
    removed: set[int] = set()

    def visit(c):
        key = frozenset(removed)
        if key in visited:
            return
        visited.add(key)
        S = _bfs(probe, v, budget.k, removed)
        if _isolated(probe, S, budget):
            out.append(frozenset(S))
        if c > 0:
            for w in sorted(S):
                if w != v:
                    removed.add(w)
                    visit(c - 1)
                    removed.discard(w)

    visit(budget.c)
    return out


def find_coverers(G: Graph, v: int, budget: SearchBudget, ledger: QueryLedger | None = None,
                  *, probe: Probe | None = None, cache: "NeighborhoodCache | None" = None) -> list[int]:
    """Vertices u whose Find-Neighborhood output contains v (v itself always qualifies)."""
    probe = _as_probe(G, ledger, probe)
    if cache is not None:
        return list(cache.coverers(probe, v))
    candidates = _Family.build(probe, v, budget).union() | {v}
    return [u for u in sorted(candidates) if v in find_neighborhood(G, u, budget, probe=probe)]


def min_cover_bruteforce(family: list[Iterable[int]], limit: int = 20) -> int:
    """Size of the smallest subfamily whose union equals the union of ``family``.

    Breadth-first search over the set of covered elements, so the cost is
    bounded by 2**|union| rather than by the number of subfamilies; ``limit``
    caps |union|.
    """
    sets = [frozenset(S) for S in family]
    universe = frozenset().union(*sets)
    if not universe:
        return 0
    if len(universe) > limit:
        raise ValueError(f"union of {len(universe)} elements exceeds the exhaustive limit {limit}")
    index = {x: i for i, x in enumerate(sorted(universe))}
    masks = {sum(1 << index[x] for x in S) for S in sets}
    full = (1 << len(index)) - 1
    seen = {0}
    layer = [0]
    size = 0
    while layer:
        size += 1
        nxt = []
        for covered in layer:
            for mk in masks:
                acc = covered | mk
                if acc == full:
                    return size
                if acc not in seen:
                    seen.add(acc)
                    nxt.append(acc)
        layer = nxt
    raise AssertionError("unreachable: the whole family covers its union")


class NeighborhoodCache:
    """Per-(graph, budget) memo of neighborhood, enumeration and coverer results.

    Each entry stores the set of vertices whose adjacency its computation
    read.  A hit replays that set on the caller's probe, so the ledger sees
    the same queries a from-scratch run would make.  Entries are pure
    functions of (graph, budget, vertex), so concurrent fills are harmless.
    """

    def __init__(self, G: Graph, budget: SearchBudget):
        self.G = G
        self.budget = budget
        self._family: dict[int, tuple[_Family, frozenset[int]]] = {}
        self._find: dict[int, tuple[frozenset[int], frozenset[int]]] = {}
        self._cover: dict[int, tuple[tuple[int, ...], frozenset[int]]] = {}

    def _memo(self, table, key, probe: Probe, compute):
        hit = table.get(key)
        if hit is not None:
            probe.charge(hit[1])
            return hit[0]
        probe.begin()
        try:
            value = compute()
        finally:
            footprint = probe.end()
        table[key] = (value, footprint)
        return value

    def _family_of(self, probe: Probe, v: int) -> _Family:
        return self._memo(self._family, v, probe, lambda: _Family.build(probe, v, self.budget))

    def neighborhoods(self, probe: Probe, v: int) -> list[frozenset[int]]:
        return self._family_of(probe, v).sets()

    def find(self, probe: Probe, v: int) -> frozenset[int]:
        return self._memo(self._find, v, probe, lambda: find_neighborhood(
            self.G, v, self.budget, probe=probe, family=lambda: self._family_of(probe, v)))

    def coverers(self, probe: Probe, v: int) -> tuple[int, ...]:
        def compute():
            candidates = self._family_of(probe, v).union() | {v}
            return tuple(u for u in sorted(candidates) if v in self.find(probe, u))
        return self._memo(self._cover, v, probe, compute)
