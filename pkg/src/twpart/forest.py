"""Partitioning bounded-degree forests into mostly (k, delta, 2)-isolated parts.

Four phases over a working copy of the forest:

1. contract leaves lighter than ``k' = 480 d / (delta eps)`` into their neighbor;
2. cut out every vertex of degree > 2: each branch contracted into it becomes
   a part, the vertex itself a singleton;
3. walk the remaining paths from their ends, contracting ends lighter than
   ``2 / delta`` inward and emitting heavier ones as parts;
4. every vertex left isolated emits what was contracted into it.

Whenever a choice is free the smallest vertex id goes first, so the output
is a pure function of the input.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import Graph, Partition, as_fraction, boundary, is_connected_subset


@dataclass(frozen=True)
class ForestPartition:
    partition: Partition
    good: frozenset[int]
    k: Fraction
    leaf_weight: Fraction
    stats: dict = field(default_factory=dict, compare=False)


def size_bound(epsilon, delta, d) -> Fraction:
    """k = 481 d^2 / (delta eps)."""
    return Fraction(481 * d * d) / (as_fraction(delta) * as_fraction(epsilon))


def leaf_weight_threshold(epsilon, delta, d) -> Fraction:
    """k' = 480 d / (delta eps)."""
    return Fraction(480 * d) / (as_fraction(delta) * as_fraction(epsilon))


def check_forest_input(T: Graph, epsilon, delta, d) -> None:
    eps, dl = as_fraction(epsilon), as_fraction(delta)
    if not (0 < eps < Fraction(1, 2) and 0 < dl < Fraction(1, 2)):
        raise ValueError("epsilon and delta must lie in (0, 1/2)")
    if d < 2:
        raise ValueError("degree bound d must be >= 2")
    if T.d_max > d:
        raise ValueError(f"forest has degree {T.d_max} > d={d}")
    if T.m != T.n - len(T.components()):
        raise ValueError("input graph has a cycle")


def stronger_tree_partition(T: Graph, epsilon, delta, d: int | None = None, *,
                            leaf_weight=None) -> ForestPartition:
    """Partition forest ``T``; ``good`` holds the vertices whose part is (k, delta, 2)-isolated.

    ``leaf_weight`` overrides k' (useful to exercise the phases on small
    trees; the size and good-set guarantees are only claimed for the default).
    """
    if d is None:
        d = max(T.d_max, 2)
    check_forest_input(T, epsilon, delta, d)
    eps, dl = as_fraction(epsilon), as_fraction(delta)
    k_leaf = leaf_weight_threshold(eps, dl, d) if leaf_weight is None else as_fraction(leaf_weight)
    path_weight = 2 / dl

    n = T.n
    nbrs = [set(a) for a in T.adjacency]
    live = [True] * n
    weight = [1] * n
    absorbed: list[list[int]] = [[] for _ in range(n)]  # contraction forest
    comp_of = [-1] * n
    parts: list[frozenset[int]] = []

    def emit(root):
        # s[root] is root plus everything contracted into it, transitively
        block = [root]
        for x in block:
            block.extend(absorbed[x])
        for x in block:
            comp_of[x] = len(parts)
        parts.append(frozenset(block))

    def remove(v):
        live[v] = False
        for y in nbrs[v]:
            nbrs[y].discard(v)
        nbrs[v] = set()

    def contract(v, u):
        weight[u] += weight[v]
        absorbed[u].append(v)
        remove(v)

    # Phase 1
    heap = [v for v in range(n) if len(nbrs[v]) == 1 and weight[v] < k_leaf]
    heapq.heapify(heap)
    while heap:
        v = heapq.heappop(heap)
        if not live[v] or len(nbrs[v]) != 1 or weight[v] >= k_leaf:
            continue
        (u,) = nbrs[v]
        contract(v, u)
        if len(nbrs[u]) == 1 and weight[u] < k_leaf:
            heapq.heappush(heap, u)
    leaf_weights = [weight[v] for v in range(n) if live[v] and len(nbrs[v]) == 1]

    # Phase 2: degrees only fall, so one ascending sweep re-evaluates correctly
    high = 0
    for v in range(n):
        if live[v] and len(nbrs[v]) > 2:
            high += 1
            for u in sorted(absorbed[v]):
                emit(u)
            absorbed[v] = []
            emit(v)
            remove(v)
    max_deg_after = max((len(nbrs[v]) for v in range(n) if live[v]), default=0)

    # Phase 3
    heap = [v for v in range(n) if live[v] and len(nbrs[v]) == 1]
    heapq.heapify(heap)
    while heap:
        v = heapq.heappop(heap)
        if not live[v] or len(nbrs[v]) != 1:
            continue
        (u,) = nbrs[v]
        if weight[v] >= path_weight:
            emit(v)
            remove(v)
        else:
            contract(v, u)
        if len(nbrs[u]) == 1:
            heapq.heappush(heap, u)

    # Phase 4
    for v in range(n):
        if live[v]:
            assert not nbrs[v]
            emit(v)
            remove(v)

    assert all(c >= 0 for c in comp_of)
    cut = sum(1 for u, w in T.edges() if comp_of[u] != comp_of[w])
    partition = Partition(tuple(comp_of), tuple(parts), cut)
    k = size_bound(eps, dl, d)
    good = set()
    for block in parts:
        # the isolation predicate depends on w only through w in block
        if len(block) <= k and is_connected_subset(T, block):
            eta = len(boundary(T, block))
            if eta <= 2 and Fraction(eta, len(block)) <= dl:
                good.update(block)
    stats = {"phase1_leaf_weights": leaf_weights, "phase2_high_degree": high,
             "phase2_max_degree_after": max_deg_after}
    return ForestPartition(partition, frozenset(good), k, k_leaf, stats)
