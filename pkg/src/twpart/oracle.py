"""The partitioning oracle: a global rank-ordered partition and its local simulation.

Global partition: compute S_v = find_neighborhood(v) for every vertex, walk
the vertices in increasing rank, and let each S_v claim whatever part of it
is still unclaimed.

Local query for q: the vertex that claims q is the lowest-ranked u whose
S_u contains q (a *coverer* of q); the answer is every w in S_u whose
lowest-ranked coverer is also u.  Both views compute the same function.
"""
from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath

from .graph import Graph, Partition, Probe, QueryLedger, as_fraction
from .neighborhood import NeighborhoodCache, SearchBudget

MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15

# Per-call bound checked by the test-suite: queries <= ORACLE_QUERY_CONSTANT * d * k**(4h+7).
ORACLE_QUERY_CONSTANT = 1

# Theoretical-mode safety cap on k for anything that actually partitions.
THEORETICAL_K_CAP = 10 ** 6

# Significant digits kept when rounding the derived delta down to a rational.
DELTA_DIGITS = 40


@dataclass(frozen=True)
class OracleParams:
    epsilon: Fraction
    d: int
    h: int
    k: int
    delta: Fraction
    c: int
    seed: int = 0
    mode: str = "practical"

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.c != 2 * (self.h + 1):
            raise ValueError(f"c must equal 2(h+1) = {2 * (self.h + 1)}, got {self.c}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned value")

    @classmethod
    def practical(cls, k: int, delta, h: int, seed: int = 0, epsilon="1/10", d: int = 0) -> "OracleParams":
        return cls(as_fraction(epsilon), d, h, k, as_fraction(delta), 2 * (h + 1), seed, "practical")

    @property
    def budget(self) -> SearchBudget:
        return SearchBudget(self.k, self.delta, self.c)

    def as_dict(self) -> dict:
        return {"mode": self.mode, "epsilon": str(self.epsilon), "d": self.d, "h": self.h,
                "k": self.k, "delta": str(self.delta), "c": self.c, "seed": self.seed}


# -- parameter derivation ---------------------------------------------------------


def _combined_coefficient(eps: Fraction, d: int, h: int) -> Fraction:
    F = math.factorial(2 * h + 3)
    return Fraction(2886000 * d ** 5 * (h + 1) ** 5 * F) / eps ** 3


def combined_rhs_ceil(k: int, epsilon, d: int, h: int, dps: int = 80) -> int:
    """ceil(2886000 d^5 (h+1)^5 (2h+3)! (1 + log2 k + log2 (2h+3)!) / eps^3)."""
    eps = as_fraction(epsilon)
    A = _combined_coefficient(eps, d, h)
    F = math.factorial(2 * h + 3)
    with mpmath.workdps(dps):
        rhs = mpmath.mpf(A.numerator) / A.denominator * (1 + mpmath.log(k, 2) + mpmath.log(F, 2))
        return int(mpmath.ceil(rhs))


def delta_for(k: int, epsilon, h: int, digits: int = DELTA_DIGITS) -> Fraction:
    """eps / (100 (2h+3)! (1 + log2 k + log2 (2h+3)!)), rounded down to a rational."""
    eps = as_fraction(epsilon)
    F = math.factorial(2 * h + 3)
    with mpmath.workdps(digits + 30):
        exact = (mpmath.mpf(eps.numerator) / eps.denominator
                 / (100 * F * (1 + mpmath.log(k, 2) + mpmath.log(F, 2))))
        exponent = int(mpmath.floor(mpmath.log10(exact))) - digits + 1
        scaled = int(mpmath.floor(exact / mpmath.mpf(10) ** exponent))
    return Fraction(scaled) * Fraction(10) ** exponent


def derive_parameters(epsilon, d: int, h: int, seed: int = 0) -> OracleParams:
    """Theoretical-mode parameters.

    k is the least fixed point of k <- ceil(RHS(k)) reached from k = 1, where
    RHS is the combined size inequality with base-2 logarithms; delta is the
    largest admissible conductance for that k, rounded down to DELTA_DIGITS
    significant digits, and k is bumped if the rounding breaks k >=
    28860 d^5 (h+1)^5 / (delta eps^2).
    """
    eps = as_fraction(epsilon)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError("epsilon must lie in (0, 1/2)")
    if d < 2:
        raise ValueError("d must be >= 2")
    if h < 1:
        raise ValueError("h must be >= 1")
    k = 1
    while True:
        nxt = combined_rhs_ceil(k, eps, d, h)
        if nxt <= k:
            break
        k = nxt
    while True:
        delta = delta_for(k, eps, h)
        if k >= Fraction(28860 * d ** 5 * (h + 1) ** 5) / (delta * eps * eps):
            break
        k += 1
    return OracleParams(eps, d, h, k, delta, 2 * (h + 1), seed, "theoretical")


# -- ranks -------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Rank:
    value: int
    vertex: int


def mix64(x: int) -> int:
    """splitmix64 finalizer."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def rank(seed: int, v: int) -> Rank:
    """Rank of v: splitmix64(seed + (v + 1) * golden-ratio constant), ties broken by id."""
    return Rank(mix64(seed + (v + 1) * GOLDEN64), v)


# -- global and local partition ------------------------------------------------------


def _check_params(G: Graph, params: OracleParams):
    if params.mode == "theoretical" and params.k > THEORETICAL_K_CAP:
        raise ValueError(f"theoretical k={params.k} exceeds the cap {THEORETICAL_K_CAP}; "
                         "use practical parameters")


def global_partition(G: Graph, params: OracleParams, cache: NeighborhoodCache | None = None) -> Partition:
    _check_params(G, params)
    cache = cache if cache is not None else NeighborhoodCache(G, params.budget)
    probe = Probe(G)
    order = sorted(range(G.n), key=lambda v: rank(params.seed, v))
    comp_of = [-1] * G.n
    comps: list[frozenset[int]] = []
    for v in order:
        U = [w for w in cache.find(probe, v) if comp_of[w] < 0]
        if not U:
            continue
        for w in U:
            comp_of[w] = len(comps)
        comps.append(frozenset(U))
    cut = sum(1 for u, w in G.edges() if comp_of[u] != comp_of[w])
    return Partition(tuple(comp_of), tuple(comps), cut)


@dataclass
class OracleSession:
    """Answers f(q) queries locally; every call is charged to ``ledger``.

    The neighborhood cache may be shared between sessions on the same graph
    and budget; it never changes an answer or its query count.
    """

    G: Graph
    params: OracleParams
    ledger: QueryLedger = field(default_factory=QueryLedger)
    cache: NeighborhoodCache | None = None

    def __post_init__(self):
        _check_params(self.G, self.params)
        self._lock = threading.Lock()
        self._ranks: dict[int, Rank] = {}  # pure function of (seed, u); racing fills agree
        if self.cache is None:
            self.cache = NeighborhoodCache(self.G, self.params.budget)
        elif self.cache.G is not self.G or self.cache.budget != self.params.budget:
            raise ValueError("neighborhood cache belongs to another graph or budget")

    def _rank(self, u: int) -> Rank:
        r = self._ranks.get(u)
        if r is None:
            r = self._ranks[u] = rank(self.params.seed, u)
        return r

    def _leader(self, probe: Probe, w: int) -> int:
        return min(self.cache.coverers(probe, w), key=self._rank)

    def query(self, q: int) -> frozenset[int]:
        if not 0 <= q < self.G.n:
            raise IndexError(f"vertex {q} out of range")
        call = QueryLedger()
        probe = Probe(self.G, call)
        u = self._leader(probe, q)
        answer = frozenset(w for w in self.cache.find(probe, u) if self._leader(probe, w) == u)
        with self._lock:
            self.ledger.degree_queries += call.degree_queries
            self.ledger.neighbor_queries += call.neighbor_queries
            self.ledger.snapshot(q)
        return answer


def oracle_query(session: OracleSession, q: int) -> frozenset[int]:
    return session.query(q)


def local_partition(G: Graph, params: OracleParams, session: OracleSession | None = None,
                    threads: int = 1) -> Partition:
    """Partition obtained by querying the oracle at every vertex."""
    session = session or OracleSession(G, params)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            answers = list(pool.map(session.query, range(G.n)))
    else:
        answers = [session.query(v) for v in range(G.n)]
    return Partition.from_sets(G, answers)


@dataclass(frozen=True)
class CutStats:
    cut_edges: int
    cut_fraction: float
    histogram: dict


def cut_stats(G: Graph, f: Partition | Callable[[int], frozenset]) -> CutStats:
    """Cut edges, their fraction of m, and the component-size histogram {size: count}."""
    part_of = f.part if isinstance(f, Partition) else f
    answers = [frozenset(part_of(v)) for v in range(G.n)]
    cut = sum(1 for u, w in G.edges() if answers[u] != answers[w])
    hist = Counter(len(S) for S in set(answers))
    return CutStats(cut, cut / G.m if G.m else 0.0, dict(sorted(hist.items())))


def stats_record(G: Graph, partition: Partition, params: OracleParams,
                 ledger: QueryLedger | None = None) -> dict:
    ledger = ledger or QueryLedger()
    return {
        "n": G.n, "m": G.m, "cut_edges": partition.cut_edges,
        "max_component": max((len(S) for S in partition.components), default=0),
        "queries_total": ledger.total,
        "degree_queries": ledger.degree_queries, "neighbor_queries": ledger.neighbor_queries,
        "max_queries_per_call": ledger.max_per_call,
        "seed": params.seed, "k": params.k, "delta": str(params.delta), "c": params.c,
        "h": params.h, "mode": params.mode,
    }
