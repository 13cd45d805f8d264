import math
from itertools import combinations

import numpy as np
import pytest

from robustlab import (
    build_graph,
    build_triangle_hypergraph,
    detect_B1,
    detect_F_config,
    detect_F_prime,
    gen_paley,
    parse_triple_list,
    second_eigenvalue,
    sparsify_hypergraph,
    write_triple_list,
)
from robustlab.errors import FormatError, ParameterError
from robustlab.graph import internal_edge_count
from robustlab.hypergraph import (
    count_F_configs,
    find_linear_3cycles_through,
    hypergraph_from_triples,
    triangle_degree_stats,
)

from conftest import complete_graph, cycle_graph, random_small_graphs
from oracles import count_F_bruteforce


def brute_triangle_count(G):
    return sum(
        1
        for a, b, c in combinations(range(G.n), 3)
        if G.has_edge(a, b) and G.has_edge(a, c) and G.has_edge(b, c)
    )


def test_build_examples():
    assert build_triangle_hypergraph(complete_graph(4)).t == 4
    assert build_triangle_hypergraph(cycle_graph(5)).t == 0
    assert build_triangle_hypergraph(gen_paley(13)).t == 26


def test_build_matches_bruteforce():
    import robustlab

    hosts = random_small_graphs(40, n_max=14, seed=17)
    hosts += [robustlab.gen_gnp(n, p, seed=n) for n, p in ((30, 0.4), (50, 0.25), (50, 0.6))]
    for G in hosts:
        H = build_triangle_hypergraph(G)
        assert H.t == brute_triangle_count(G)
        # triples sorted, strictly increasing rows
        assert all(a < b < c for a, b, c in H.triples)


def test_degree_stats():
    H = build_triangle_hypergraph(complete_graph(4))
    stats = triangle_degree_stats(H, 3, 0.2)
    assert stats["min"] == stats["max"] == 3
    assert stats["in_band"]
    assert triangle_degree_stats(build_triangle_hypergraph(cycle_graph(5)), 2, 0.2)["max"] == 0
    H13 = build_triangle_hypergraph(gen_paley(13))
    s13 = triangle_degree_stats(H13, 6, 0.2)
    assert s13["min"] == s13["max"] == 6


def test_hyperdegree_mixing_consistency():
    # hyperdegree of v equals the edge count inside N(v), which the mixing
    # lemma bounds by (1/2)((d/n) d^2 + lambda d) on regular hosts
    for q in (13, 17, 29):
        G = gen_paley(q)
        d = (q - 1) // 2
        lam = second_eigenvalue(G).lam
        H = build_triangle_hypergraph(G)
        bound = 0.5 * ((d / q) * d**2 + lam * d)
        for v in range(q):
            e_nv = internal_edge_count(G, G.adj[v])
            assert len(H.incidence[v]) == e_nv
            assert e_nv <= bound + 1e-9


def test_sparsify_hypergraph():
    H = build_triangle_hypergraph(complete_graph(20))
    assert H.t == 1140
    assert sparsify_hypergraph(H, 1.0, seed=0).t == H.t
    assert sparsify_hypergraph(H, 0.0, seed=0).t == 0
    counts = [sparsify_hypergraph(H, 0.1, seed=s).t for s in range(300)]
    sigma = math.sqrt(1140 * 0.1 * 0.9)
    assert abs(np.mean(counts) - 114) <= 3 * sigma / math.sqrt(len(counts))


def test_detect_b1():
    empty = hypergraph_from_triples(30, [])
    assert detect_B1(empty) is None
    h4 = build_triangle_hypergraph(complete_graph(4))
    w = detect_B1(h4)  # threshold 2 ln 4 ~ 2.77, every vertex has 3
    assert w is not None and w.kind == "B1" and w.verify(h4)
    single = hypergraph_from_triples(30, [(0, 1, 2)])
    assert detect_B1(single) is None  # threshold 2 ln 30 ~ 6.8


def test_linear_3cycles():
    H = hypergraph_from_triples(6, [(0, 1, 3), (1, 2, 4), (0, 2, 5)])
    for h in range(3):
        pairs = find_linear_3cycles_through(H, h)
        assert len(pairs) == 1
    k4h = build_triangle_hypergraph(complete_graph(4))
    for h in range(k4h.t):
        assert find_linear_3cycles_through(k4h, h) == []
    # K6: verify against a direct pair scan
    k6h = build_triangle_hypergraph(complete_graph(6))
    h = 0
    want = 0
    for f in range(k6h.t):
        for g in range(f + 1, k6h.t):
            if f == h or g == h:
                continue
            A, B, C = k6h.triple_set(h), k6h.triple_set(f), k6h.triple_set(g)
            if (
                len(A & B) == 1
                and len(A & C) == 1
                and len(B & C) == 1
                and len(A | B | C) == 6
            ):
                want += 1
    assert len(find_linear_3cycles_through(k6h, h)) == want
    with pytest.raises(ParameterError):
        find_linear_3cycles_through(k6h, 999)


def planted_F(n_extra_offset=3):
    tris = [(0, 1, 2)]
    v = n_extra_offset
    for _ in range(5):
        a, b, c = v, v + 1, v + 2
        v += 3
        tris.append(tuple(sorted((2, a, b))))
        tris.append(tuple(sorted((b, c, 0))))
    return hypergraph_from_triples(18, tris)


def test_detect_f_planted():
    H = planted_F()
    w = detect_F_config(H)
    assert w is not None and w.kind == "F" and w.verify(H)


def test_detect_f_too_small():
    H = planted_F()
    sub = hypergraph_from_triples(18, [tuple(t) for t in H.triples[:10]])
    assert detect_F_config(sub) is None


def test_detect_f_sparse_paley_runs():
    G = gen_paley(61)
    H = build_triangle_hypergraph(G)
    d = 30
    p = (61 * math.log(61)) ** (1 / 3) / d
    pi = 2**-11 * p**3
    for s in range(100):
        Hp = sparsify_hypergraph(H, pi, seed=s)
        assert detect_F_config(Hp) is None


def test_detect_f_prime():
    H = hypergraph_from_triples(5, [(0, 1, 2), (2, 3, 4), (1, 3, 4)])
    w = detect_F_prime(H)
    assert w is not None and w.verify(H)
    matching = hypergraph_from_triples(9, [(0, 1, 2), (3, 4, 5), (6, 7, 8)])
    assert detect_F_prime(matching) is None
    k5h = build_triangle_hypergraph(complete_graph(5))
    w5 = detect_F_prime(k5h)
    assert w5 is not None and w5.verify(k5h)


def test_count_f_configs():
    H = planted_F()
    assert count_F_configs(H) == 240  # 2 orientations x 5! orderings
    assert count_F_configs(H) == count_F_bruteforce(H)
    small = hypergraph_from_triples(18, [tuple(t) for t in H.triples[:10]])
    assert count_F_configs(small) == 0
    k6h = build_triangle_hypergraph(complete_graph(6))
    assert count_F_configs(k6h) == 0
    assert count_F_bruteforce(k6h) == 0


def test_count_f_matches_bruteforce_random():
    rng = np.random.default_rng(2)
    for _ in range(6):
        n = 9
        tris = set()
        while len(tris) < 12:
            tris.add(tuple(sorted(rng.choice(n, 3, replace=False).tolist())))
        H = hypergraph_from_triples(n, sorted(tris))
        assert count_F_configs(H) == count_F_bruteforce(H)
        got = detect_F_config(H)
        assert (got is not None) == (count_F_configs(H) > 0)


def test_triple_list_roundtrip():
    H = build_triangle_hypergraph(complete_graph(6))
    assert parse_triple_list(write_triple_list(H)) == H
    with pytest.raises(FormatError):
        parse_triple_list("")
    with pytest.raises(FormatError):
        parse_triple_list("5 1\n2 1 0\n")
    with pytest.raises(FormatError):
        parse_triple_list("5 2\n0 1 2\n")
