"""Estimators and property testers that run on top of the partitioning oracle.

Both reduce a global question to exact work on the oracle's small parts:

* ``estimate_optimum`` samples vertices, solves the problem exactly on each
  sampled vertex's part, and scales the average share up to n.
* ``test_property`` rejects when the oracle cuts too many edges (stage 1)
  or when a sampled part already violates the property (stage 2).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .graph import Graph, degree, neighbor, QueryLedger, as_fraction
from .oracle import OracleParams, OracleSession
from .treedecomp import exact_treewidth

PROBLEMS = ("matching", "vertex_cover", "dominating_set")
PROPERTIES = ("forest", "cactus", "treewidth_le_h", "k_colorable")

SOLVER_CAPS = {"matching": 64, "vertex_cover": 30, "dominating_set": 30}
TREEWIDTH_CAP = 25
COLORING_CAP = 64


class CapExceededError(ValueError):
    """A component (or the configured k) is beyond an exact solver's size cap."""


# -- exact solvers on small components ---------------------------------------------


def _max_matching(C: Graph) -> int:
    H = nx.Graph()
    H.add_nodes_from(range(C.n))
    H.add_edges_from(C.edges())
    return len(nx.max_weight_matching(H, maxcardinality=True))


def _min_vertex_cover(C: Graph) -> int:
    best = C.n

    def solve(adj: dict[int, set[int]], taken: int):
        nonlocal best
        # a vertex of degree 1 never needs to be taken: its neighbor covers at least as much
        changed = True
        while changed:
            changed = False
            for x in list(adj):
                if x in adj and len(adj[x]) == 1:
                    (y,) = adj[x]
                    taken += 1
                    for z in adj.pop(y):
                        adj[z].discard(y)
                    changed = True
            for x in [x for x, ns in adj.items() if not ns]:
                del adj[x]
        if not adj:
            best = min(best, taken)
            return
        edges = sum(len(ns) for ns in adj.values()) // 2
        dmax = max(len(ns) for ns in adj.values())
        if taken + math.ceil(edges / dmax) >= best:
            return
        v = max(adj, key=lambda x: (len(adj[x]), -x))
        # branch 1: take v
        sub = {x: set(ns) for x, ns in adj.items()}
        for z in sub.pop(v):
            sub[z].discard(v)
        solve(sub, taken + 1)
        # branch 2: leave v out, so all its neighbors are taken
        sub = {x: set(ns) for x, ns in adj.items()}
        nbrs = sub.pop(v)
        for y in nbrs:
            for z in sub.pop(y):
                if z in sub:
                    sub[z].discard(y)
        solve(sub, taken + len(nbrs))

    solve({v: set(C.adjacency[v]) for v in range(C.n)}, 0)
    return best


def _min_dominating_set(C: Graph) -> int:
    closed = [frozenset(C.adjacency[v]) | {v} for v in range(C.n)]
    reach = max((len(s) for s in closed), default=1)
    best = C.n

    def solve(undominated: frozenset[int], size: int):
        nonlocal best
        if not undominated:
            best = min(best, size)
            return
        if size + math.ceil(len(undominated) / reach) >= best:
            return
        # the undominated vertex with the fewest ways to be dominated
        u = min(undominated, key=lambda x: (len(closed[x]), x))
        options = sorted(closed[u], key=lambda w: (-len(closed[w] & undominated), w))
        for w in options:
            solve(undominated - closed[w], size + 1)

    solve(frozenset(range(C.n)), 0)
    return best


_SOLVERS = {"matching": _max_matching, "vertex_cover": _min_vertex_cover,
            "dominating_set": _min_dominating_set}


def exact_component_optimum(problem: str, C: Graph) -> int:
    """Exact optimum of ``problem`` on the (small) graph C."""
    if problem not in _SOLVERS:
        raise ValueError(f"unknown problem {problem!r}")
    if C.n > SOLVER_CAPS[problem]:
        raise CapExceededError(f"{problem} solver limited to {SOLVER_CAPS[problem]} vertices, got {C.n}")
    return _SOLVERS[problem](C)


# -- estimation ---------------------------------------------------------------------


def estimate_sample_size(epsilon) -> int:
    """Hoeffding: s = ceil(4.5 ln(40) / eps^2)."""
    eps = float(as_fraction(epsilon))
    return math.ceil(4.5 * math.log(40) / (eps * eps))


@dataclass(frozen=True)
class EstimateReport:
    problem: str
    estimate: float
    samples: int
    epsilon: float
    seed: int
    queries_total: int = 0
    max_queries_per_call: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def estimate_optimum(G: Graph, params: OracleParams, problem: str, epsilon, seed: int = 0,
                     session: OracleSession | None = None) -> EstimateReport:
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if params.k > SOLVER_CAPS[problem]:
        raise CapExceededError(f"k={params.k} exceeds the {problem} solver cap {SOLVER_CAPS[problem]}")
    session = session or OracleSession(G, params)
    s = estimate_sample_size(epsilon)
    if G.n == 0:
        return EstimateReport(problem, 0.0, s, float(as_fraction(epsilon)), seed)
    rng = random.Random(seed)
    solved: dict[frozenset[int], Fraction] = {}
    total = Fraction(0)
    before = session.ledger.total
    for _ in range(s):
        part = session.query(rng.randrange(G.n))
        y = solved.get(part)
        if y is None:
            C, _ = G.induced(part)
            y = solved[part] = Fraction(exact_component_optimum(problem, C), len(part))
        total += y
    estimate = float(total * G.n / s)
    return EstimateReport(problem, estimate, s, float(as_fraction(epsilon)), seed,
                          session.ledger.total - before, session.ledger.max_per_call)


# -- property checks ----------------------------------------------------------------


def _is_forest(C: Graph) -> bool:
    return C.m == C.n - len(C.components())


def _is_cactus(C: Graph) -> bool:
    # every block is a single edge or a cycle
    H = nx.Graph()
    H.add_nodes_from(range(C.n))
    H.add_edges_from(C.edges())
    for block in nx.biconnected_component_edges(H):
        block = list(block)
        if len(block) == 1:
            continue
        verts = {x for e in block for x in e}
        if len(block) != len(verts):
            return False
    return True


def _is_colorable(C: Graph, colors: int) -> bool:
    order = sorted(range(C.n), key=lambda v: (-len(C.adjacency[v]), v))
    color = [-1] * C.n

    def place(i):
        if i == len(order):
            return True
        v = order[i]
        used = {color[w] for w in C.adjacency[v]}
        # only try one fresh color: fresh colors are interchangeable
        fresh_tried = False
        for col in range(colors):
            if col in used:
                continue
            fresh = all(c != col for c in color)
            if fresh and fresh_tried:
                continue
            fresh_tried |= fresh
            color[v] = col
            if place(i + 1):
                return True
            color[v] = -1
        return False

    return place(0)


def check_component_membership(prop: str, C: Graph, param: int | None = None) -> bool:
    """Does C belong to the family?  ``param`` is h for treewidth_le_h, k for k_colorable."""
    if prop == "forest":
        return _is_forest(C)
    if prop == "cactus":
        return _is_cactus(C)
    if prop == "treewidth_le_h":
        if param is None:
            raise ValueError("treewidth_le_h needs h")
        if C.n > TREEWIDTH_CAP:
            raise CapExceededError(f"treewidth check limited to {TREEWIDTH_CAP} vertices, got {C.n}")
        if C.n <= param + 1:
            return True
        return exact_treewidth(C, cap=TREEWIDTH_CAP)[0] <= param
    if prop == "k_colorable":
        if param is None:
            raise ValueError("k_colorable needs the number of colors")
        if C.n > COLORING_CAP:
            raise CapExceededError(f"coloring check limited to {COLORING_CAP} vertices, got {C.n}")
        return _is_colorable(C, param)
    raise ValueError(f"unknown property {prop!r}")


# -- testing --------------------------------------------------------------------------


def tester_sample_sizes(epsilon) -> tuple[int, int]:
    """(edge samples, vertex samples) = (ceil(32/eps^2), ceil(16/eps))."""
    eps = as_fraction(epsilon)
    return math.ceil(32 / eps ** 2), math.ceil(16 / eps)


def cut_threshold(epsilon, d: int, n: int) -> Fraction:
    """Stage-1 rejection threshold on the estimated number of cut edges: (3/4) eps d n.

    A graph that is eps-far needs at least eps*d*n edge changes; if fewer than
    three quarters of those are cut edges, the parts themselves carry the
    remaining quarter and stage 2 finds one of them.
    """
    return Fraction(3, 4) * as_fraction(epsilon) * d * n


@dataclass(frozen=True)
class TestVerdict:
    property: str
    accept: bool
    evidence: object = None
    stats: dict = field(default_factory=dict, compare=False)

    __test__ = False  # not a pytest class

    def as_dict(self) -> dict:
        ev = self.evidence
        if isinstance(ev, frozenset):
            ev = sorted(ev)
        return {"property": self.property, "accept": self.accept, "evidence": ev, **self.stats}


def sample_edge(G: Graph, ledger: QueryLedger, d: int, rng: random.Random, max_tries: int = 100000):
    """A uniformly random edge: random vertex, random slot in 1..d, retry on empty slots.

    Returns (edge or None, attempts).
    """
    for attempt in range(1, max_tries + 1):
        v = rng.randrange(G.n)
        j = rng.randint(1, d)
        if j <= degree(G, ledger, v):
            return (v, neighbor(G, ledger, v, j)), attempt
    return None, max_tries


def test_property(G: Graph, params: OracleParams, prop: str, epsilon, seed: int = 0,
                  param: int | None = None, d: int | None = None,
                  session: OracleSession | None = None) -> TestVerdict:
    if prop not in PROPERTIES:
        raise ValueError(f"unknown property {prop!r}")
    if prop == "treewidth_le_h":
        param = params.h if param is None else param
        if params.k > TREEWIDTH_CAP:
            raise CapExceededError(f"k={params.k} exceeds the treewidth check cap {TREEWIDTH_CAP}")
    if prop == "k_colorable":
        param = 3 if param is None else param
        if params.k > COLORING_CAP:
            raise CapExceededError(f"k={params.k} exceeds the coloring check cap {COLORING_CAP}")
    d = d if d is not None else max(params.d, G.d_max, 1)
    if G.d_max > d:
        raise ValueError(f"graph degree {G.d_max} exceeds d={d}")
    session = session or OracleSession(G, params)
    rng = random.Random(seed)
    s1, s2 = tester_sample_sizes(epsilon)
    stats = {"edge_samples": s1, "vertex_samples": s2, "seed": seed}
    if G.n == 0:
        return TestVerdict(prop, True, None, stats)

    # Stage 1: estimate the number of edges the oracle cuts.
    sampler = QueryLedger()
    attempts = crossing = got = 0
    for _ in range(s1):
        edge, tries = sample_edge(G, sampler, d, rng)
        attempts += tries
        if edge is None:
            break
        got += 1
        u, w = edge
        if session.query(u) != session.query(w):
            crossing += 1
    m_hat = Fraction(got * G.n * d, 2 * attempts) if attempts else Fraction(0)
    cut_hat = Fraction(crossing, got) * m_hat if got else Fraction(0)
    threshold = cut_threshold(epsilon, d, G.n)
    stats.update({"m_hat": float(m_hat), "cut_estimate": float(cut_hat), "cut_threshold": float(threshold)})
    if cut_hat > threshold:
        stats["queries_total"] = session.ledger.total + sampler.total
        return TestVerdict(prop, False, {"cut_estimate": float(cut_hat)}, stats)

    # Stage 2: look for a sampled part that is not in the family.
    verdict = TestVerdict(prop, True, None, stats)
    for _ in range(s2):
        part = session.query(rng.randrange(G.n))
        C, _ = G.induced(part)
        if not check_component_membership(prop, C, param):
            verdict = TestVerdict(prop, False, part, stats)
            break
    stats["queries_total"] = session.ledger.total + sampler.total
    stats["max_queries_per_call"] = session.ledger.max_per_call
    return verdict
