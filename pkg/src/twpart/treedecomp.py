"""Tree decompositions: validation, normalization, exact treewidth, and the
bag-forest partition that turns a decomposition into isolated neighborhoods.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .forest import stronger_tree_partition
from .graph import Graph, as_fraction, is_isolated_neighborhood


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[frozenset[int], ...]
    links: tuple[tuple[int, int], ...]

    @classmethod
    def make(cls, bags: Iterable[Iterable[int]], links: Iterable[tuple[int, int]] = ()) -> "TreeDecomposition":
        return cls(tuple(frozenset(b) for b in bags),
                   tuple(sorted({(min(a, b), max(a, b)) for a, b in links})))

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def neighbors(self) -> list[set[int]]:
        out = [set() for _ in self.bags]
        for a, b in self.links:
            out[a].add(b)
            out[b].add(a)
        return out

    def as_graph(self) -> Graph:
        """The forest over bag indices."""
        return Graph.from_edges(len(self.bags), self.links)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: str | None = None
    witness: object = None

    def __bool__(self):
        return self.ok


def parse_decomposition(text: str) -> TreeDecomposition:
    """Parse ``b t`` then b lines ``bag_id size v1 .. v_size`` then t lines ``bag_u bag_v``."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise DecompositionError("missing 'b t' header")
    b, t = (int(x) for x in lines[0])
    if len(lines) != 1 + b + t:
        raise DecompositionError(f"expected {b} bag lines and {t} link lines")
    bags: list[frozenset[int] | None] = [None] * b
    for parts in lines[1:1 + b]:
        bag_id, size = int(parts[0]), int(parts[1])
        if not 0 <= bag_id < b or bags[bag_id] is not None:
            raise DecompositionError(f"bad or repeated bag id {bag_id}")
        if len(parts) != 2 + size:
            raise DecompositionError(f"bag {bag_id} declares {size} vertices, lists {len(parts) - 2}")
        bags[bag_id] = frozenset(int(x) for x in parts[2:])
    links = []
    for parts in lines[1 + b:]:
        if len(parts) != 2:
            raise DecompositionError(f"bad link line {' '.join(parts)!r}")
        a, c = int(parts[0]), int(parts[1])
        if not (0 <= a < b and 0 <= c < b) or a == c:
            raise DecompositionError(f"bad link ({a}, {c})")
        links.append((a, c))
    return TreeDecomposition.make(bags, links)


def serialize_decomposition(D: TreeDecomposition) -> str:
    out = [f"{len(D.bags)} {len(D.links)}"]
    for i, bag in enumerate(D.bags):
        out.append(" ".join(map(str, [i, len(bag), *sorted(bag)])))
    out.extend(f"{a} {b}" for a, b in D.links)
    return "\n".join(out) + "\n"


# -- validation ---------------------------------------------------------------


def _is_forest(num_nodes: int, links) -> tuple[bool, object]:
    parent = list(range(num_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in links:
        if not (0 <= a < num_nodes and 0 <= b < num_nodes) or a == b:
            return False, (a, b)
        ra, rb = find(a), find(b)
        if ra == rb:
            return False, (a, b)
        parent[ra] = rb
    return True, None


def validate(G: Graph, D: TreeDecomposition) -> ValidationReport:
    for i, bag in enumerate(D.bags):
        bad = [x for x in bag if not 0 <= x < G.n]
        if bad:
            return ValidationReport(False, "bag-range", (i, min(bad)))
    where: list[list[int]] = [[] for _ in range(G.n)]
    for i, bag in enumerate(D.bags):
        for x in bag:
            where[x].append(i)
    for x in range(G.n):
        if not where[x]:
            return ValidationReport(False, "vertex-coverage", x)
    for u, v in G.edges():
        if not set(where[u]).intersection(where[v]):
            return ValidationReport(False, "edge-coverage", (u, v))
    ok, link = _is_forest(len(D.bags), D.links)
    if not ok:
        return ValidationReport(False, "forest", link)
    nbrs = D.neighbors()
    for x in range(G.n):
        holders = set(where[x])
        start = where[x][0]
        seen = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j in nbrs[i]:
                if j in holders and j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != len(holders):
            return ValidationReport(False, "connectivity", x)
    return ValidationReport(True)


def is_edge_overlapping(D: TreeDecomposition) -> bool:
    return all(D.bags[a] & D.bags[b] for a, b in D.links)


def is_non_repeated(D: TreeDecomposition) -> bool:
    if any(not bag for bag in D.bags):
        return False
    return not any(D.bags[a] <= D.bags[b] or D.bags[b] <= D.bags[a] for a, b in D.links)


class _Work:
    """Mutable decomposition used by normalize()."""

    def __init__(self, G: Graph, D: TreeDecomposition):
        self.G = G
        self.bags = {i: set(b) for i, b in enumerate(D.bags)}
        self.adj = {i: set() for i in self.bags}
        for a, b in D.links:
            self.adj[a].add(b)
            self.adj[b].add(a)
        self.where: dict[int, set[int]] = {x: set() for x in range(G.n)}
        for i, bag in self.bags.items():
            for x in bag:
                self.where[x].add(i)

    def metric(self) -> int:
        return len(self.bags) + sum(len(a) for a in self.adj.values()) // 2 + sum(map(len, self.bags.values()))

    def drop_bag(self, i):
        for j in self.adj.pop(i):
            self.adj[j].discard(i)
        for x in self.bags.pop(i):
            self.where[x].discard(i)

    def removable(self, i, x) -> bool:
        others = self.where[x] - {i}
        if not others:
            return False
        if sum(1 for j in self.adj[i] if j in others) > 1:
            return False
        bag = self.bags[i]
        for y in self.G.adjacency[x]:
            if y in bag and not any(y in self.bags[j] for j in others):
                return False
        return True

    def freeze(self) -> TreeDecomposition:
        ids = sorted(self.bags)
        index = {i: p for p, i in enumerate(ids)}
        links = [(index[a], index[b]) for a in ids for b in self.adj[a] if a < b]
        return TreeDecomposition.make([self.bags[i] for i in ids], links)


def normalize(G: Graph, D: TreeDecomposition, trace: list[int] | None = None) -> TreeDecomposition:
    """Make D edge-overlapping, minimal and non-repeated without raising its width.

    Works in passes until a pass changes nothing.  A pass visits the bags in
    ascending index and tries four rules on the visited bag X_i, in order:
    1. drop X_i if it is empty;
    2. if X_i is a subset of a linked bag X_j (smallest such j), merge X_i into X_j;
    3. cut every link from X_i to a disjoint bag;
    4. delete each vertex of X_i (ascending) whose removal leaves a tree decomposition.
    ``trace`` receives |bags| + |links| + sum |bag| after every rule application.
    """
    report = validate(G, D)
    if not report:
        raise DecompositionError(f"invalid decomposition: {report.violation} at {report.witness}")
    W = _Work(G, D)

    def applied():
        nonlocal changed
        changed = True
        if trace is not None:
            trace.append(W.metric())

    changed = True
    while changed:
        changed = False
        for i in sorted(W.bags):
            if not W.bags[i]:
                W.drop_bag(i)
                applied()
                continue
            target = next((j for j in sorted(W.adj[i]) if W.bags[i] <= W.bags[j]), None)
            if target is not None:
                for x in W.adj[i] - {target}:
                    W.adj[x].add(target)
                    W.adj[target].add(x)
                W.drop_bag(i)
                applied()
                continue
            for j in sorted(W.adj[i]):
                if not W.bags[i] & W.bags[j]:
                    W.adj[i].discard(j)
                    W.adj[j].discard(i)
                    applied()
            for x in sorted(W.bags[i]):
                if W.removable(i, x):
                    W.bags[i].discard(x)
                    W.where[x].discard(i)
                    applied()
    return W.freeze()


def is_minimal(G: Graph, D: TreeDecomposition) -> bool:
    W = _Work(G, D)
    return not any(W.removable(i, x) for i in W.bags for x in W.bags[i])


@dataclass(frozen=True)
class StructuralReport:
    ok: bool
    violations: tuple = ()

    def __bool__(self):
        return self.ok


def check_structural_lemmas(G: Graph, D: TreeDecomposition) -> StructuralReport:
    """Check the subtree size sandwich and the bag-degree bound d(h+1).

    For every bag-subtree T' hanging below a node (each tree rooted at its
    smallest bag):  |V(T')| / (h+1) <= |bags(T')| <= |V(T')|.
    """
    problems = []
    if not is_non_repeated(D):
        problems.append(("precondition", "not non-repeated (empty bag or linked subset)"))
    if not is_edge_overlapping(D):
        problems.append(("precondition", "not edge-overlapping"))
    if not problems and not is_minimal(G, D):
        problems.append(("precondition", "not minimal"))
    if problems:
        return StructuralReport(False, tuple(problems))
    h = D.width
    nbrs = D.neighbors()
    seen = [False] * len(D.bags)
    for root in range(len(D.bags)):
        if seen[root]:
            continue
        order, parent = [root], {root: None}
        seen[root] = True
        for i in order:
            for j in sorted(nbrs[i]):
                if not seen[j]:
                    seen[j] = True
                    parent[j] = i
                    order.append(j)
        count = {i: 1 for i in order}
        verts = {i: set(D.bags[i]) for i in order}
        for i in reversed(order):
            vs = verts[i]
            if not (len(vs) <= (h + 1) * count[i] and count[i] <= len(vs)):
                problems.append(("size-sandwich", i, count[i], len(vs)))
            p = parent[i]
            if p is not None:
                count[p] += count[i]
                small, big = sorted((verts[p], vs), key=len)
                big |= small
                verts[p] = big
            del verts[i]
    d = G.d_max
    for i, ns in enumerate(nbrs):
        if len(ns) > d * (h + 1):
            problems.append(("degree", i, len(ns), d * (h + 1)))
    return StructuralReport(not problems, tuple(problems))


# -- exact treewidth ------------------------------------------------------------


def _elimination_order(n: int, adj: list[int], t: int) -> list[int] | None:
    """An elimination order of width <= t, or None.  ``adj`` holds bitmasks."""
    full = (1 << n) - 1
    failed: set[int] = set()

    def fill_nbrs(S, v):
        # vertices outside S + v reachable from v through eliminated vertices
        out, frontier, seen = 0, adj[v], 1 << v
        while frontier:
            low = frontier & -frontier
            frontier ^= low
            if seen & low:
                continue
            seen |= low
            u = low.bit_length() - 1
            if S & low:
                frontier |= adj[u] & ~seen
            else:
                out |= low
        return out

    def solve(S):
        remaining = full & ~S
        if bin(remaining).count("1") <= t + 1:
            rest = remaining
            order = []
            while rest:
                low = rest & -rest
                rest ^= low
                order.append(low.bit_length() - 1)
            return order
        if S in failed:
            return None
        options = []
        rest = remaining
        while rest:
            low = rest & -rest
            rest ^= low
            v = low.bit_length() - 1
            q = fill_nbrs(S, v)
            if bin(q).count("1") <= t:
                options.append((v, q))
        for v, q in options:
            # a simplicial vertex of small degree is always safe to eliminate
            simplicial = True
            qq = q
            while qq and simplicial:
                low = qq & -qq
                qq ^= low
                u = low.bit_length() - 1
                if q & ~low & ~fill_nbrs(S, u):
                    simplicial = False
            if simplicial:
                tail = solve(S | (1 << v))
                if tail is None:
                    failed.add(S)
                    return None
                return [v] + tail
        for v, _ in options:
            tail = solve(S | (1 << v))
            if tail is not None:
                return [v] + tail
        failed.add(S)
        return None

    return solve(0)


def _decomposition_from_order(n: int, adj: list[int], order: list[int]):
    pos = {v: i for i, v in enumerate(order)}
    filled = [set() for _ in range(n)]
    for v in range(n):
        m = adj[v]
        while m:
            low = m & -m
            m ^= low
            filled[v].add(low.bit_length() - 1)
    bags, links = [], []
    higher_of = []
    for v in order:
        higher = {u for u in filled[v] if pos[u] > pos[v]}
        for a in higher:
            filled[a] |= higher - {a}
        bags.append({v} | higher)
        higher_of.append(higher)
    for i, higher in enumerate(higher_of):
        if higher:
            j = min(pos[u] for u in higher)
            links.append((i, j))
    return bags, links


def exact_treewidth(G: Graph, cap: int = 25) -> tuple[int, TreeDecomposition]:
    """Treewidth of G with a witness decomposition of that width.

    Searches elimination orders over eliminated-vertex subsets, memoizing
    failed subsets, one connected component at a time.
    """
    if G.n > cap:
        raise ValueError(f"exact treewidth limited to n <= {cap}, got {G.n}")
    bags: list[set[int]] = []
    links: list[tuple[int, int]] = []
    tw = 0 if G.n else -1
    for comp in G.components():
        H, old = G.induced(comp)
        adj = [sum(1 << u for u in H.adjacency[v]) for v in range(H.n)]
        t = 0 if H.m == 0 else 1
        while True:
            order = _elimination_order(H.n, adj, t)
            if order is not None:
                break
            t += 1
        tw = max(tw, t)
        cb, cl = _decomposition_from_order(H.n, adj, order)
        off = len(bags)
        bags.extend({old[x] for x in b} for b in cb)
        links.extend((a + off, b + off) for a, b in cl)
    return tw, TreeDecomposition.make(bags, links)


# -- isolated neighborhoods from a decomposition ----------------------------------


@dataclass(frozen=True)
class DecompositionPartitionResult:
    g: tuple[frozenset[int], ...]
    good_set: frozenset[int]
    k_bound: int
    width: int
    d: int


def neighborhood_size_bound(epsilon, delta, d: int, h: int) -> int:
    """ceil(28860 d^3 (h+1)^5 / (delta eps^2))."""
    eps, dl = as_fraction(epsilon), as_fraction(delta)
    return math.ceil(Fraction(28860 * d ** 3 * (h + 1) ** 5) / (dl * eps * eps))


def decomposition_partition(G: Graph, D: TreeDecomposition, epsilon, delta, d: int | None = None
                            ) -> DecompositionPartitionResult:
    """Build g: V -> 2^V from a decomposition so most g(v) are isolated neighborhoods.

    Partitions the normalized bag forest (accuracy eps/(h+1), degree
    d(h+1), conductance delta*eps/(60 d (h+1))), keeps the vertices that
    appear only in a single good bag-part and in no bag next to a good part,
    and sets g(v) to v's component among those vertices ({v} otherwise).
    """
    eps, dl = as_fraction(epsilon), as_fraction(delta)
    if not (0 < eps < Fraction(1, 2) and 0 < dl < Fraction(1, 2)):
        raise ValueError("epsilon and delta must lie in (0, 1/2)")
    report = validate(G, D)
    if not report:
        raise DecompositionError(f"invalid decomposition: {report.violation} at {report.witness}")
    if d is None:
        d = max(G.d_max, 2)
    if d < G.d_max:
        raise ValueError(f"d={d} below the graph's maximum degree {G.d_max}")
    N = normalize(G, D)
    h = max(N.width, 0)
    dt = d * (h + 1)
    bag_eps = eps / (h + 1)
    bag_delta = dl * eps / (60 * d * (h + 1))
    forest = N.as_graph()
    fp = stronger_tree_partition(forest, bag_eps, bag_delta, dt)
    part_bound = Fraction(28860 * d ** 3 * (h + 1) ** 4) / (dl * eps * eps)

    good_parts = set()
    for pid, block in enumerate(fp.partition.components):
        if is_isolated_neighborhood(forest, min(block), block, part_bound, bag_delta, 2):
            good_parts.add(pid)
    excluded = set()
    for pid, block in enumerate(fp.partition.components):
        if pid in good_parts:
            outside = {j for i in block for j in forest.adjacency[i] if j not in block}
            for j in outside:
                excluded.update(N.bags[j])
        else:
            for i in block:
                excluded.update(N.bags[i])
    kept = set(range(G.n)) - excluded

    g: list[frozenset[int] | None] = [None] * G.n
    for v in range(G.n):
        if g[v] is not None:
            continue
        if v not in kept:
            g[v] = frozenset((v,))
            continue
        comp, stack = {v}, [v]
        while stack:
            x = stack.pop()
            for y in G.adjacency[x]:
                if y in kept and y not in comp:
                    comp.add(y)
                    stack.append(y)
        block = frozenset(comp)
        for x in block:
            g[x] = block
    k_bound = neighborhood_size_bound(eps, dl, d, h)
    # The verdict depends only on the block (v is always in g(v)), so check each block once.
    verdict = {}
    for v in range(G.n):
        if g[v] not in verdict:
            verdict[g[v]] = is_isolated_neighborhood(G, v, g[v], k_bound, dl, 2 * (h + 1))
    good = frozenset(v for v in range(G.n) if verdict[g[v]])
    return DecompositionPartitionResult(tuple(g), good, k_bound, h, d)
