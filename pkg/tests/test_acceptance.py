"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``.  The printed lines go
straight to the terminal (output capture is bypassed for them), so the
summary is visible in a normal ``pytest -v`` log.
"""
import math
import random
from fractions import Fraction

import pytest

from twpart.apps import estimate_optimum, test_property as run_tester
from twpart.forest import size_bound, stronger_tree_partition
from twpart.generators import GenSpec, forest_witness, generate, random_forest, random_partial_ktree
from twpart.graph import is_connected_subset, is_isolated_neighborhood
from twpart.neighborhood import (
    NeighborhoodCache,
    SearchBudget,
    enumerate_neighborhoods,
    find_neighborhood,
    min_cover_bruteforce,
)
from twpart.oracle import (
    ORACLE_QUERY_CONSTANT,
    OracleParams,
    OracleSession,
    derive_parameters,
    global_partition,
)
from twpart.treedecomp import (
    TreeDecomposition,
    check_structural_lemmas,
    decomposition_partition,
    exact_treewidth,
    is_edge_overlapping,
    is_minimal,
    is_non_repeated,
    normalize,
    validate,
)

from conftest import random_connected
from reference import (
    connected_sets_containing,
    delta_bound,
    fixed_point_k,
    max_matching,
    min_dominating_set,
    min_vertex_cover,
    neighbors_of,
)

pytestmark = pytest.mark.slow


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\nacceptance criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def block_verdicts(G, part_of, k, delta, c):
    """Per-vertex isolation check, memoized per block (v is in its own block, so
    the verdict for v depends only on the block)."""
    memo = {}
    out = {}
    for v in range(G.n):
        S = frozenset(part_of(v))
        if v not in S:
            out[v] = False
            continue
        if S not in memo:
            memo[S] = is_isolated_neighborhood(G, v, S, k, delta, c)
        out[v] = memo[S]
    return out


# -- criteria 1 and 2: local == global, partition axioms ---------------------------------

BUDGETS = [(k, delta, h) for k in (5, 20) for delta in (Fraction(1, 5), Fraction(1, 2)) for h in (1, 2)]
SEEDS = (0, 1, 2, 3, 4)


def equivalence_instances():
    out = []
    for i in range(10):
        rng = random.Random(100 + i)
        out.append(("forest", generate(GenSpec("forest", rng.randint(40, 80), 3, 1, 100 + i))[0]))
        out.append(("partial_2tree", generate(GenSpec("partial_ktree", rng.randint(30, 50), 5, 2, 200 + i))[0]))
        n = rng.randint(40, 60)
        out.append(("noisy_forest", generate(GenSpec("forest", n, 3, 1, 300 + i, noise_edges=n // 10))[0]))
    return out


@pytest.fixture(scope="module")
def equivalence_run():
    mismatches, axiom_failures, checked = [], [], 0
    instances = equivalence_instances()
    for gi, (family, G) in enumerate(instances):
        for k, delta, h in BUDGETS:
            cache = None
            for seed in SEEDS:
                params = OracleParams.practical(k, delta, h, seed)
                if cache is None:
                    cache = NeighborhoodCache(G, params.budget)
                P = global_partition(G, params, cache)
                session = OracleSession(G, params, cache=cache)
                answers = [session.query(v) for v in range(G.n)]
                for v, ans in enumerate(answers):
                    checked += 1
                    if ans != P.part(v):
                        mismatches.append((family, gi, k, delta, h, seed, v))
                    if v not in ans or len(ans) > k or any(answers[w] != ans for w in ans):
                        axiom_failures.append((family, gi, k, delta, h, seed, v))
    return {"instances": instances, "checked": checked, "mismatches": mismatches, "axioms": axiom_failures}


def test_criterion_01_local_equals_global(equivalence_run, capsys):
    r = equivalence_run
    families = sorted({f for f, _ in r["instances"]})
    ok = len(r["instances"]) == 30 and not r["mismatches"]
    report(capsys, 1, ok, f"{len(r['instances'])} graphs ({', '.join(families)}), {len(BUDGETS)} budgets x "
                          f"{len(SEEDS)} seeds, {r['checked']} vertex queries, mismatches={len(r['mismatches'])}")


def test_criterion_02_partition_axioms(equivalence_run, capsys):
    r = equivalence_run
    report(capsys, 2, not r["axioms"], f"{r['checked']} answers checked for v in f(v), symmetry, |f(v)| <= k; "
                                        f"violations={len(r['axioms'])}")


# -- criteria 3 and 4: Find-Neighborhood against brute force, cover bounds -----------------

SMALL_BUDGETS = [SearchBudget(k, delta, c) for k in range(1, 7) for c in range(0, 4)
                 for delta in (Fraction(1, 4), Fraction(1, 2), Fraction(1))]


def small_connected_graphs(count, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(1, 10)
        out.append(random_connected(n, rng.randint(0, n + 3), rng, max_deg=rng.choice([3, 4, None])))
    return out


@pytest.fixture(scope="module")
def small_instances():
    graphs = small_connected_graphs(200, seed=2024)
    data = []
    for G in graphs:
        adj = G.adjacency
        # every connected set containing v of size <= 6, with its cut-size
        sets = {v: [(S, len(neighbors_of(adj, S))) for S in connected_sets_containing(adj, v, 6)]
                for v in range(G.n)}
        data.append((G, sets))
    return data


def brute_isolated(sets_v, b):
    return [S for S, eta in sets_v if len(S) <= b.k and eta <= b.c and Fraction(eta, len(S)) <= b.delta]


def test_criterion_03_find_neighborhood_vs_bruteforce(small_instances, capsys):
    calls = bad = 0
    for G, sets in small_instances:
        for b in SMALL_BUDGETS:
            for v in range(G.n):
                calls += 1
                exists = bool(brute_isolated(sets[v], b))
                S = find_neighborhood(G, v, b)
                valid = v in S and is_isolated_neighborhood(G, v, S, b.k, b.delta, b.c)
                if valid != exists:
                    bad += 1
    report(capsys, 3, bad == 0, f"{len(small_instances)} graphs (n <= 10), {len(SMALL_BUDGETS)} budgets, "
                                f"{calls} searches, disagreements={bad}")


def test_criterion_04_cover_bounds(small_instances, capsys):
    worst_cover = worst_coverers = 0.0
    bad = checked = 0
    for G, sets in small_instances:
        for b in SMALL_BUDGETS:
            bound = math.factorial(b.c + 1)
            finds = [find_neighborhood(G, u, b) for u in range(G.n)]
            real = [is_isolated_neighborhood(G, u, finds[u], b.k, b.delta, b.c) for u in range(G.n)]
            for v in range(G.n):
                family = enumerate_neighborhoods(G, v, b)
                assert sorted(map(sorted, family)) == sorted(map(sorted, brute_isolated(sets[v], b)))
                cover = min_cover_bruteforce(family) if family else 0
                coverers = sum(1 for u in range(G.n) if real[u] and v in finds[u])
                checked += 1
                worst_cover = max(worst_cover, cover / bound)
                worst_coverers = max(worst_coverers, coverers / (b.k * bound))
                if cover > bound or coverers > b.k * bound:
                    bad += 1
    report(capsys, 4, bad == 0, f"{checked} (graph, budget, v) cases; max cover/(c+1)! = {worst_cover:.3f}, "
                                f"max coverers/(k(c+1)!) = {worst_coverers:.3f}; violations={bad}")


# -- criterion 5: forest partitioner -----------------------------------------------------


def test_criterion_05_forest_partitioner(capsys):
    lines, ok = [], True
    for d in (3, 4):
        for eps in (Fraction(3, 10), Fraction(45, 100)):
            for delta in (Fraction(1, 5), Fraction(1, 4)):
                T, _ = random_forest(10_000, d, random.Random(d * 1000 + int(eps * 100) + int(delta * 100)))
                fp = stronger_tree_partition(T, eps, delta, d)
                bound = Fraction(481 * d * d) / (delta * eps)
                comps = fp.partition.components
                connected = all(is_connected_subset(T, S) for S in comps)
                small = all(len(S) <= bound for S in comps)
                verdict = block_verdicts(T, fp.partition.part, size_bound(eps, delta, d), delta, 2)
                good = {v for v, g in verdict.items() if g}
                enough = len(good) >= (1 - eps / 60) * T.n and good == fp.good
                ok &= connected and small and enough
                lines.append(f"d={d} eps={eps} delta={delta}: parts={len(comps)} good={len(good)}")
    report(capsys, 5, ok, "; ".join(lines))


# -- criterion 6: decomposition pipeline -------------------------------------------------


def test_criterion_06_decomposition_pipeline(capsys):
    eps = delta = Fraction(3, 10)
    lines, ok = [], True
    for seed in range(3):
        G, W = random_partial_ktree(2000, 2, 5, random.Random(seed))
        r = decomposition_partition(G, W, eps, delta, d=5)
        h = r.width
        bound = math.ceil(Fraction(28860 * 5 ** 3 * (h + 1) ** 5) / (delta * eps * eps))
        verdict = block_verdicts(G, lambda v: r.g[v], bound, delta, 2 * (h + 1))
        good = {v for v, g in verdict.items() if g}
        sizes_ok = r.k_bound == bound and all(len(S) <= bound for S in r.g)
        enough = len(good) >= (1 - eps / 20) * G.n and good == set(r.good_set)
        ok &= sizes_ok and enough
        lines.append(f"seed {seed}: width={h} good={len(good)}/{G.n} max|g|={max(map(len, r.g))}")
    report(capsys, 6, ok, "; ".join(lines))


# -- criterion 7: normalization ----------------------------------------------------------


def scramble(G, D, rng, steps):
    """Random validity-preserving edits that make a decomposition redundant."""
    bags = [set(b) for b in D.bags]
    links = {tuple(sorted(e)) for e in D.links}
    for _ in range(steps):
        i = rng.randrange(len(bags)) if bags else None
        move = rng.randrange(5)
        j = len(bags)
        if i is None or move == 0:
            bags.append(set())
            if i is not None:
                links.add((i, j))
        elif move == 1:
            bags.append(set(bags[i]))
            links.add((i, j))
        elif move == 2:
            bags.append(set(rng.sample(sorted(bags[i]), rng.randint(0, len(bags[i])))))
            links.add((i, j))
        elif move == 3:
            # grow a bag with a vertex held by a linked bag (keeps its bags connected)
            nbrs = [b for a, b in links if a == i] + [a for a, b in links if b == i]
            if nbrs:
                other = bags[rng.choice(nbrs)]
                if other:
                    bags[i].add(rng.choice(sorted(other)))
        else:
            # subdivide a link with the intersection of its two bags
            if links:
                a, b = rng.choice(sorted(links))
                links.discard((a, b))
                bags.append(bags[a] & bags[b])
                links |= {(a, j), (b, j)}
    return TreeDecomposition.make(bags, links)


def decomposition_cases(count):
    rng = random.Random(77)
    cases = []
    for i in range(count):
        kind = i % 4
        if kind == 0:
            T, parent = random_forest(rng.randint(5, 120), 3, rng)
            G, D = T, forest_witness(parent)
        elif kind == 1:
            G, D = random_partial_ktree(rng.randint(5, 120), 2, 5, rng)
        elif kind == 2:
            G, D = random_partial_ktree(rng.randint(5, 80), 3, 8, rng)
        else:
            G = random_connected(rng.randint(2, 14), rng.randint(0, 12), rng)
            D = exact_treewidth(G)[1]
        cases.append((G, scramble(G, D, rng, rng.randint(0, 3 * len(D.bags) + 5))))
    return cases


def test_criterion_07_normalization(capsys):
    cases = decomposition_cases(100)
    failures = []
    for idx, (G, D) in enumerate(cases):
        assert validate(G, D), "scrambled input must be valid"
        N = normalize(G, D)
        checks = {
            "valid": bool(validate(G, N)),
            "edge-overlapping": is_edge_overlapping(N),
            "minimal": is_minimal(G, N),
            "non-repeated": is_non_repeated(N),
            "width": N.width <= D.width,
            "idempotent": normalize(G, N) == N,
            "structural": bool(check_structural_lemmas(G, N)),
        }
        failures += [(idx, name) for name, good in checks.items() if not good]
    report(capsys, 7, not failures, f"{len(cases)} scrambled decompositions normalized; failures={failures[:5]}")


# -- criterion 8: query-cost locality ----------------------------------------------------


def test_criterion_08_query_locality(capsys):
    samples = 40
    maxima = {}
    within_bound = True
    for n in (1000, 100_000):
        G, _ = generate(GenSpec("forest", n, 3, 1, seed=1))
        params = OracleParams.practical(20, Fraction(1, 5), 1, seed=1)
        session = OracleSession(G, params)
        rng = random.Random(5)
        for _ in range(samples):
            session.query(rng.randrange(n))
        maxima[n] = session.ledger.max_per_call
        within_bound &= maxima[n] <= ORACLE_QUERY_CONSTANT * G.d_max * params.k ** (4 * params.h + 7)
    ok = within_bound and maxima[100_000] <= 2 * maxima[1000]
    report(capsys, 8, ok, f"max queries per call over {samples} calls: n=1e3 -> {maxima[1000]}, "
                          f"n=1e5 -> {maxima[100_000]}; C={ORACLE_QUERY_CONSTANT}")


# -- criterion 9: estimators -------------------------------------------------------------


def test_criterion_09_estimators(capsys):
    eps = Fraction(1, 5)
    trials = 50
    hits = {"matching": 0, "vertex_cover": 0, "dominating_set": 0}
    worst = dict.fromkeys(hits, 0.0)
    for i in range(trials):
        rng = random.Random(1000 + i)
        n = rng.randint(150, 300)
        if i % 2 == 0:
            G, _ = random_forest(n, 3, rng)
            h = 1
        else:
            G, _ = random_partial_ktree(n, 2, 5, rng)
            h = 2
        params = OracleParams.practical(20, Fraction(1, 5), h, seed=i)
        session = OracleSession(G, params)
        opt = {
            "matching": max_matching(G.n, G.edges()),
            "vertex_cover": min_vertex_cover(G.n, G.edges()),
            "dominating_set": min_dominating_set(G.n, [set(a) for a in G.adjacency]),
        }
        for problem in hits:
            est = estimate_optimum(G, params, problem, eps, seed=i, session=session).estimate
            err = abs(est - opt[problem]) / G.n
            worst[problem] = max(worst[problem], err)
            hits[problem] += err <= eps
    ok = all(h >= 0.9 * trials for h in hits.values())
    detail = ", ".join(f"{p}: {hits[p]}/{trials} within eps*n (worst {worst[p]:.3f}n)" for p in hits)
    report(capsys, 9, ok, detail)


# -- criterion 10: testers ---------------------------------------------------------------


def test_criterion_10_testers(capsys):
    n, trials, eps = 2000, 30, Fraction(1, 10)
    outcome = {}
    for noise in (0, n // 5):
        G, _ = generate(GenSpec("forest", n, 3, 1, seed=5, noise_edges=noise))
        cache = NeighborhoodCache(G, SearchBudget(20, Fraction(1, 5), 4))
        rejected = 0
        for t in range(trials):
            params = OracleParams.practical(20, Fraction(1, 5), 1, seed=t)
            session = OracleSession(G, params, cache=cache)
            rejected += not run_tester(G, params, "forest", eps, seed=t, d=3, session=session).accept
        outcome[noise] = rejected
    ok = outcome[0] == 0 and outcome[n // 5] >= Fraction(2, 3) * trials
    report(capsys, 10, ok, f"forest n={n}: accepted {trials - outcome[0]}/{trials}; "
                           f"forest + {n // 5} noise edges: rejected {outcome[n // 5]}/{trials}")


# -- criterion 11: parameter derivation --------------------------------------------------


def test_criterion_11_parameter_derivation(capsys):
    eps = Fraction(2, 5)
    p = derive_parameters(eps, 3, 1)
    ref_k = fixed_point_k(eps, 3, 1)
    again = derive_parameters(eps, 3, 1)
    delta_ok = p.delta <= Fraction(delta_bound(eps, p.k, 1))
    c_ok = all(derive_parameters(Fraction(1, 4), 3, h).c == 2 * (h + 1) for h in (1, 2, 3, 4))
    ok = p.k == ref_k and p == again and delta_ok and c_ok
    report(capsys, 11, ok, f"(eps=0.4, d=3, h=1): k={p.k} (reference {ref_k}), delta~{float(p.delta):.6e}, "
                           f"c={p.c}")
