import random

import pytest
from hypothesis import given, settings, strategies as st

from twpart.generators import forest_witness, random_forest, random_partial_ktree
from twpart.graph import Graph, is_isolated_neighborhood
from twpart.treedecomp import (
    DecompositionError,
    TreeDecomposition,
    check_structural_lemmas,
    decomposition_partition,
    exact_treewidth,
    is_edge_overlapping,
    is_minimal,
    is_non_repeated,
    normalize,
    parse_decomposition,
    serialize_decomposition,
    validate,
)

from conftest import complete, cycle, path, random_connected
from reference import treewidth_bruteforce


def path_bags(n):
    return TreeDecomposition.make([{i, i + 1} for i in range(n - 1)], [(i, i + 1) for i in range(n - 2)])


def test_single_bag_is_valid():
    G = random_connected(8, 5, random.Random(2))
    assert validate(G, TreeDecomposition.make([range(8)]))


def test_path_bags_valid_and_width():
    D = TreeDecomposition.make([{0, 1}, {1, 2}], [(0, 1)])
    assert validate(path(3), D)
    assert D.width == 1


def test_unlinked_bags_fail_connectivity():
    report = validate(path(3), TreeDecomposition.make([{0, 1}, {1, 2}]))
    assert not report
    assert report.violation == "connectivity"
    assert report.witness == 1


def test_other_violations():
    G = path(3)
    assert validate(G, TreeDecomposition.make([{0, 1}, {2}], [(0, 1)])).violation == "edge-coverage"
    assert validate(G, TreeDecomposition.make([{0, 1}], [])).violation == "vertex-coverage"
    cyc = TreeDecomposition.make([{0, 1}, {1, 2}, {1}], [(0, 1), (1, 2), (0, 2)])
    assert validate(G, cyc).violation == "forest"
    assert validate(G, TreeDecomposition.make([{0, 1, 7}, {1, 2}], [(0, 1)])).violation == "bag-range"


def test_round_trip_text():
    D = TreeDecomposition.make([{0, 1}, {1, 2}, {2, 3}], [(0, 1), (1, 2)])
    assert parse_decomposition(serialize_decomposition(D)) == D
    with pytest.raises(DecompositionError):
        parse_decomposition("2 1\n0 2 0 1\n")


def test_normalize_rule2_duplicate_bags():
    G = Graph.from_edges(2, [(0, 1)])
    N = normalize(G, TreeDecomposition.make([{0, 1}, {0, 1}], [(0, 1)]))
    assert N.bags == (frozenset({0, 1}),) and N.links == ()


def test_normalize_rule3_cuts_empty_links():
    G = Graph.from_edges(2, [])
    N = normalize(G, TreeDecomposition.make([{0}, {1}], [(0, 1)]))
    assert sorted(map(set, N.bags), key=min) == [{0}, {1}] and N.links == ()


def test_normalize_strips_redundant_vertex():
    G = Graph.from_edges(3, [(0, 1)])
    N = normalize(G, TreeDecomposition.make([{0, 1, 2}, {2}], [(0, 1)]))
    assert list(N.bags) == [frozenset({0, 1}), frozenset({2})]
    assert N.links == ()


def random_valid_decomposition(G, rng):
    """A valid but wasteful decomposition: elimination bags padded with junk."""
    tw, D = exact_treewidth(G)
    bags = [set(b) for b in D.bags]
    links = list(D.links)
    for i in range(len(bags)):
        if rng.random() < 0.5:
            j = len(bags)
            bags.append(set(rng.sample(sorted(bags[i]), rng.randint(0, len(bags[i])))))
            links.append((i, j))
    return TreeDecomposition.make(bags, links)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 8), st.integers(0, 10**6))
def test_normalize_properties(n, extra, seed):
    rng = random.Random(seed)
    G = random_connected(n, extra, rng)
    D = random_valid_decomposition(G, rng)
    trace = []
    N = normalize(G, D, trace)
    assert validate(G, N)
    assert is_edge_overlapping(N) and is_non_repeated(N) and is_minimal(G, N)
    assert N.width <= D.width
    start = len(D.bags) + len(D.links) + sum(map(len, D.bags))
    assert all(a > b for a, b in zip([start] + trace, trace))
    assert normalize(G, N) == N
    assert check_structural_lemmas(G, N)


def test_normalize_rejects_invalid():
    with pytest.raises(DecompositionError):
        normalize(path(3), TreeDecomposition.make([{0, 1}, {1, 2}]))


def test_structural_lemmas_path():
    G = path(10)
    assert check_structural_lemmas(G, path_bags(10))


def test_structural_lemmas_empty_bag_precondition():
    D = TreeDecomposition.make([{0, 1}, set()], [(0, 1)])
    report = check_structural_lemmas(path(2), D)
    assert not report
    assert report.violations[0][0] == "precondition"


def test_structural_lemmas_random_forest():
    T, parent = random_forest(100, 3, random.Random(5))
    N = normalize(T, forest_witness(parent))
    assert check_structural_lemmas(T, N)


def test_structural_lemmas_partial_ktree():
    G, W = random_partial_ktree(60, 2, 5, random.Random(3))
    N = normalize(G, W)
    assert N.width <= 2
    assert check_structural_lemmas(G, N)


@pytest.mark.parametrize("G,tw", [(path(5), 1), (cycle(6), 2), (complete(5), 4),
                                  (Graph.from_edges(3, []), 0), (Graph.from_edges(0, []), -1)])
def test_exact_treewidth_examples(G, tw):
    got, W = exact_treewidth(G)
    assert got == tw
    assert validate(G, W) and W.width == max(tw, 0) or G.n == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10), st.integers(0, 10**6))
def test_exact_treewidth_matches_bruteforce(n, extra, seed):
    G = random_connected(n, extra, random.Random(seed))
    tw, W = exact_treewidth(G)
    assert tw == treewidth_bruteforce(G.n, G.edges())
    assert validate(G, W) and W.width == tw


def test_exact_treewidth_grid_and_cap():
    from conftest import grid_graph
    assert exact_treewidth(grid_graph(4))[0] == 4
    with pytest.raises(ValueError):
        exact_treewidth(path(26))


def test_partition_edgeless():
    G = Graph.from_edges(6, [])
    r = decomposition_partition(G, TreeDecomposition.make([{v} for v in range(6)]), 0.3, 0.3)
    assert r.g == tuple(frozenset({v}) for v in range(6))
    assert r.good_set == frozenset(range(6))


def test_partition_star_single_bag():
    G = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    r = decomposition_partition(G, TreeDecomposition.make([range(4)]), 0.3, 0.3)
    assert r.k_bound >= 4
    assert all(part == frozenset(range(4)) for part in r.g)
    assert r.good_set == frozenset(range(4))


def test_partition_large_forest():
    T, parent = random_forest(10_000, 3, random.Random(11))
    r = decomposition_partition(T, forest_witness(parent), 0.3, 0.3)
    assert len(r.good_set) >= 0.985 * T.n
    for v in list(r.good_set)[:300]:
        assert is_isolated_neighborhood(T, v, r.g[v], r.k_bound, 0.3, 2 * (r.width + 1))


def test_partition_good_vertices_are_isolated():
    G, W = random_partial_ktree(200, 2, 5, random.Random(6))
    r = decomposition_partition(G, W, 0.4, 0.4)
    assert len(r.good_set) >= (1 - 0.4 / 20) * G.n
    for v in r.good_set:
        assert is_isolated_neighborhood(G, v, r.g[v], r.k_bound, 0.4, 2 * (r.width + 1))
    seen = set()
    for v in range(G.n):
        assert v in r.g[v]
        for w in r.g[v]:
            assert r.g[w] == r.g[v]
        seen.add(r.g[v])


def test_partition_errors():
    with pytest.raises(ValueError):
        decomposition_partition(path(3), path_bags(3), 0.6, 0.3)
    with pytest.raises(DecompositionError):
        decomposition_partition(path(3), TreeDecomposition.make([{0, 1}, {1, 2}]), 0.3, 0.3)
    with pytest.raises(ValueError):
        decomposition_partition(complete(4), TreeDecomposition.make([range(4)]), 0.3, 0.3, d=2)
