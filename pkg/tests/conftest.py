import random

import pytest

from twpart.graph import Graph


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph.from_edges(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def grid_graph(side):
    edges = []
    for r in range(side):
        for c in range(side):
            v = r * side + c
            if c + 1 < side:
                edges.append((v, v + 1))
            if r + 1 < side:
                edges.append((v, v + side))
    return Graph.from_edges(side * side, edges)


def random_connected(n, extra, rng, max_deg=None):
    """Random spanning tree plus ``extra`` random edges (respecting max_deg if given)."""
    edges = set()
    deg = [0] * n
    for v in range(1, n):
        choices = [u for u in range(v) if max_deg is None or deg[u] < max_deg]
        u = rng.choice(choices)
        edges.add((u, v))
        deg[u] += 1
        deg[v] += 1
    for _ in range(extra * 4):
        if extra <= 0 or n < 2:
            break
        u, v = rng.sample(range(n), 2)
        e = (min(u, v), max(u, v))
        if e in edges or (max_deg is not None and (deg[u] >= max_deg or deg[v] >= max_deg)):
            continue
        edges.add(e)
        deg[u] += 1
        deg[v] += 1
        extra -= 1
    return Graph.from_edges(n, sorted(edges))


@pytest.fixture
def rng():
    return random.Random(12345)
