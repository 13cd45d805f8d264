import numpy as np
import pytest

from robustlab import (
    SparsifyParams,
    gen_bipartite_biregular,
    gen_gnp,
    gen_paley,
    gen_random_regular,
    sparsify,
    write_edge_list,
)
from robustlab.errors import ParameterError
from robustlab.generators import edge_uniforms, sparsify_with_uniforms

from conftest import complete_graph


def test_regular_k4():
    G = gen_random_regular(4, 3, seed=0)
    assert G == complete_graph(4)


def test_regular_postcondition():
    G = gen_random_regular(10, 3, seed=1)
    assert set(G.degrees.tolist()) == {3}


def test_regular_infeasible():
    with pytest.raises(ParameterError):
        gen_random_regular(5, 3)
    with pytest.raises(ParameterError):
        gen_random_regular(4, 4)


@pytest.mark.parametrize("seed", range(25))
def test_regular_property_many_seeds(seed):
    for n, d in [(12, 3), (15, 4), (9, 4)]:
        G = gen_random_regular(n, d, seed=seed)
        assert set(G.degrees.tolist()) == {d}


def test_paley_5_is_c5():
    G = gen_paley(5)
    assert G.m == 5 and set(G.degrees.tolist()) == {2}
    assert all(G.has_edge(i, (i + 1) % 5) for i in range(5))


def test_paley_13():
    G = gen_paley(13)
    assert G.m == 39 and set(G.degrees.tolist()) == {6}


def test_paley_self_complementary():
    for q in (5, 13, 17):
        G = gen_paley(q)
        assert 2 * G.m == q * (q - 1) // 2  # exactly half of all pairs
        # multiplication by a quadratic non-residue maps edges onto non-edges
        residues = {(x * x) % q for x in range(1, q)}
        r = next(x for x in range(2, q) if x not in residues)
        for u in range(q):
            for v in range(u + 1, q):
                assert G.has_edge(u, v) != G.has_edge((r * u) % q, (r * v) % q)


def test_paley_rejects_bad_q():
    for q in (7, 9, 12, 15):
        with pytest.raises(ParameterError):
            gen_paley(q)


def test_gnp_extremes():
    assert gen_gnp(7, 0.0, seed=0).m == 0
    assert gen_gnp(7, 1.0, seed=0) == complete_graph(7)


def test_gnp_mean_edges():
    trials = 400
    ms = [gen_gnp(100, 0.5, seed=s).m for s in range(trials)]
    mean = np.mean(ms)
    sigma = np.sqrt(4950 * 0.25)
    assert abs(mean - 2475) <= 3 * sigma / np.sqrt(trials)


def test_bipartite_k33():
    G = gen_bipartite_biregular(3, 3, seed=0)
    assert G.m == 9
    assert set(G.degrees.tolist()) == {3}


def test_bipartite_two_regular_is_even_cycles(petersen=None):
    G = gen_bipartite_biregular(8, 2, seed=7)
    assert set(G.degrees.tolist()) == {2}
    # 2-regular bipartite: disjoint even cycles covering all vertices
    seen = set()
    for start in range(16):
        if start in seen:
            continue
        cyc = [start]
        prev, cur = None, start
        while True:
            nxts = [int(u) for u in G.adj[cur] if u != prev]
            prev, cur = cur, nxts[0]
            if cur == start:
                break
            cyc.append(cur)
        assert len(cyc) % 2 == 0 and len(cyc) >= 4
        seen.update(cyc)
    assert len(seen) == 16


def test_bipartite_infeasible():
    with pytest.raises(ParameterError):
        gen_bipartite_biregular(4, 5)


def test_sparsify_extremes(k6_edges=None):
    G = gen_gnp(30, 0.5, seed=2)
    assert sparsify(G, SparsifyParams(1.0, seed=0)) == G
    assert sparsify(G, SparsifyParams(0.0, seed=0)).m == 0
    assert sparsify(G, SparsifyParams(0.0, seed=0)).n == G.n


def test_sparsify_mean():
    G = complete_graph(100)
    trials = 400
    ms = [sparsify(G, SparsifyParams(0.3, seed=s)).m for s in range(trials)]
    sigma = np.sqrt(4950 * 0.3 * 0.7)
    assert abs(np.mean(ms) - 1485) <= 3 * sigma / np.sqrt(trials)


def test_monotone_coupling():
    G = gen_gnp(40, 0.6, seed=5)
    u = edge_uniforms(G, seed=9)
    lo = sparsify_with_uniforms(G, 0.2, u)
    hi = sparsify_with_uniforms(G, 0.5, u)
    lo_set = {tuple(e) for e in lo.edges}
    hi_set = {tuple(e) for e in hi.edges}
    assert lo_set <= hi_set
    assert {tuple(e) for e in hi.edges} <= {tuple(e) for e in G.edges}


def test_determinism_byte_identical():
    a = gen_random_regular(20, 4, seed=11)
    b = gen_random_regular(20, 4, seed=11)
    assert write_edge_list(a) == write_edge_list(b)
    g1 = sparsify(a, SparsifyParams(0.4, seed=3))
    g2 = sparsify(b, SparsifyParams(0.4, seed=3))
    assert write_edge_list(g1) == write_edge_list(g2)
