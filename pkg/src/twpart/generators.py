"""Seeded instance generators: forests, cacti, partial k-trees with witnesses, grids."""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

from .graph import Graph
from .treedecomp import TreeDecomposition

FAMILIES = ("forest", "cactus", "partial_ktree", "grid")


class GeneratorError(ValueError):
    """The requested instance cannot be built under the given constraints."""


@dataclass(frozen=True)
class GenSpec:
    family: str
    n: int
    d: int = 3
    h: int = 1
    seed: int = 0
    noise_edges: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GeneratorError(f"unknown family {self.family!r}")
        if self.n < 0 or self.d < 0 or self.noise_edges < 0:
            raise GeneratorError("n, d and noise_edges must be non-negative")
        if self.family == "partial_ktree":
            if self.h < 1:
                raise GeneratorError("partial_ktree needs h >= 1")
            if self.n > self.h + 1 and self.d < self.h + 1:
                raise GeneratorError(f"partial_ktree with h={self.h} needs d >= h+1")
        if self.family == "cactus" and self.n > 1 and self.d < 2:
            raise GeneratorError("cactus needs d >= 2")
        if self.family == "grid":
            side = math.isqrt(self.n)
            if side * side != self.n:
                raise GeneratorError(f"grid needs a square n, got {self.n}")
            if self.n > 4 and self.d < 4:
                raise GeneratorError("grid needs d >= 4")


def random_forest(n: int, d: int, rng: random.Random) -> tuple[Graph, list[int]]:
    """Random attachment under a degree cap; returns the forest and parent pointers (-1 for roots)."""
    parent = [-1] * n
    deg = [0] * n
    open_: list[int] = []  # vertices with spare degree
    edges = []
    for v in range(n):
        if v > 0 and open_ and rng.random() >= 1 / n:
            i = rng.randrange(len(open_))
            u = open_[i]
            parent[v] = u
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
            if deg[u] >= d:
                open_[i] = open_[-1]
                open_.pop()
        if deg[v] < d:
            open_.append(v)
    return Graph.from_edges(n, edges), parent


def forest_witness(parent: list[int]) -> TreeDecomposition:
    """Bag {v, parent(v)} per vertex (just {v} for roots), linked along the forest."""
    bags = [{v} if p < 0 else {v, p} for v, p in enumerate(parent)]
    links = [(v, p) for v, p in enumerate(parent) if p >= 0]
    return TreeDecomposition.make(bags, links)


def random_cactus(n: int, d: int, rng: random.Random) -> Graph:
    """A random tree plus edges that close vertex-disjoint cycles, degree-capped."""
    tree_parent = [-1] * n
    deg = [0] * n
    depth = [0] * n
    edges = set()
    open_: list[int] = []
    for v in range(n):
        if v > 0:
            i = rng.randrange(len(open_))
            u = open_[i]
            tree_parent[v] = u
            depth[v] = depth[u] + 1
            edges.add((u, v))
            deg[u] += 1
            deg[v] += 1
            if deg[u] >= d:
                open_[i] = open_[-1]
                open_.pop()
        if deg[v] < d:
            open_.append(v)
    used = [False] * n
    for _ in range(n):
        u, w = rng.randrange(n), rng.randrange(n)
        if u == w or deg[u] >= d or deg[w] >= d or (min(u, w), max(u, w)) in edges:
            continue
        path = []
        a, b = u, w
        while a != b:
            if depth[a] < depth[b]:
                a, b = b, a
            path.append(a)
            a = tree_parent[a]
        path.append(a)
        if any(used[x] for x in path):
            continue
        for x in path:
            used[x] = True
        edges.add((min(u, w), max(u, w)))
        deg[u] += 1
        deg[w] += 1
    return Graph.from_edges(n, sorted(edges))


def random_partial_ktree(n: int, h: int, d: int, rng: random.Random) -> tuple[Graph, TreeDecomposition]:
    """Grow an h-tree under degree cap d, then drop each non-backbone edge with probability 1/2.

    Each new vertex joins an h-clique whose members all have spare degree,
    picked as the lowest total degree among a few random candidates.  The
    edge to the clique's first member is kept (the backbone), so the graph
    stays connected.  The construction bags form the witness decomposition.
    """
    if n <= h + 1:
        bags = [set(range(n))]
        edges = [(i, i + 1) for i in range(n - 1)]
        extra = [(a, b) for a, b in itertools.combinations(range(n), 2) if b != a + 1]
        edges += [e for e in extra if rng.random() < 0.5]
        return Graph.from_edges(n, edges), TreeDecomposition.make(bags if n else [], [])
    deg = [0] * n
    keep = set()
    optional = []
    for i in range(h):
        keep.add((i, i + 1))
    for a, b in itertools.combinations(range(h + 1), 2):
        deg[a] += 1
        deg[b] += 1
        if b != a + 1:
            optional.append((a, b))
    bags = [set(range(h + 1))]
    links = []
    # (clique members, index of a bag containing them)
    cliques = [(c, 0) for c in itertools.combinations(range(h + 1), h)]
    for v in range(h + 1, n):
        best = None
        for _ in range(8):
            while cliques:
                i = rng.randrange(len(cliques))
                if all(deg[x] < d for x in cliques[i][0]):
                    break
                cliques[i] = cliques[-1]
                cliques.pop()
            if not cliques:
                break
            cand = cliques[i]
            score = sum(deg[x] for x in cand[0])
            if best is None or score < best[0]:
                best = (score, cand)
        if best is None:
            raise GeneratorError(f"degree cap d={d} exhausted after {v} vertices")
        members, home = best[1]
        keep.add((members[0], v))
        for x in members:
            deg[x] += 1
            if x != members[0]:
                optional.append((x, v))
        deg[v] = h
        bags.append(set(members) | {v})
        links.append((home, len(bags) - 1))
        for drop in range(h):
            new = tuple(x for j, x in enumerate(members) if j != drop) + (v,)
            cliques.append((new, len(bags) - 1))
    edges = sorted(keep) + [e for e in optional if rng.random() < 0.5]
    return Graph.from_edges(n, edges), TreeDecomposition.make(bags, links)


def grid(n: int) -> Graph:
    side = math.isqrt(n)
    edges = []
    for r in range(side):
        for c in range(side):
            v = r * side + c
            if c + 1 < side:
                edges.append((v, v + 1))
            if r + 1 < side:
                edges.append((v, v + side))
    return Graph.from_edges(side * side, edges)


def perturb_far(G: Graph, noise_edges: int, d: int, seed: int) -> Graph:
    """Add ``noise_edges`` random non-edges between vertices of degree < d."""
    if noise_edges == 0:
        return G
    rng = random.Random(seed)
    adj = [set(a) for a in G.adjacency]
    if sum(max(d - len(a), 0) for a in adj) < 2 * noise_edges:
        raise GeneratorError(f"not enough spare degree for {noise_edges} extra edges")
    open_ = [v for v in range(G.n) if len(adj[v]) < d]
    added = misses = 0
    while added < noise_edges:
        u, w = rng.choice(open_), rng.choice(open_)
        if u == w or w in adj[u]:
            misses += 1
            if misses % 1000 == 0 and not any(
                    y not in adj[x] for x, y in itertools.combinations(open_, 2)):
                raise GeneratorError(f"ran out of addable pairs after {added} edges")
            continue
        adj[u].add(w)
        adj[w].add(u)
        added += 1
        open_ = [x for x in open_ if len(adj[x]) < d] if len(adj[u]) >= d or len(adj[w]) >= d else open_
        if len(open_) < 2 and added < noise_edges:
            raise GeneratorError(f"ran out of spare degree after {added} edges")
    return Graph.from_adjacency(adj)


def generate(spec: GenSpec) -> tuple[Graph, TreeDecomposition | None]:
    """Build the instance; the witness is dropped once noise edges are added."""
    rng = random.Random(spec.seed)
    witness = None
    if spec.family == "forest":
        G, parent = random_forest(spec.n, spec.d, rng)
        witness = forest_witness(parent)
    elif spec.family == "cactus":
        G = random_cactus(spec.n, spec.d, rng)
    elif spec.family == "partial_ktree":
        G, witness = random_partial_ktree(spec.n, spec.h, spec.d, rng)
    else:
        G = grid(spec.n)
    if spec.noise_edges:
        G = perturb_far(G, spec.noise_edges, spec.d, rng.randrange(1 << 63))
        witness = None
    return G, witness
