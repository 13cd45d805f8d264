import numpy as np
import pytest

from robustlab import (
    check_c_expander,
    count_isolated,
    external_neighborhood,
    find_hamiltonian_cycle,
    gen_bipartite_biregular,
    gen_gnp,
    gen_random_regular,
    hall_violation_bipartite,
    max_matching,
    tutte_violation,
)
from robustlab.errors import CapExceededError, ParameterError
from robustlab.structure import expander_implies_pm_test

from conftest import complete_graph, cycle_graph, path_graph, petersen_graph, random_small_graphs
from oracles import c_expander_bruteforce, has_augmenting_path_bruteforce, matching_size_bruteforce


def test_external_neighborhood():
    k4 = complete_graph(4)
    assert external_neighborhood(k4, [0]) == (1, 2, 3)
    assert external_neighborhood(k4, range(4)) == ()
    pet = petersen_graph()
    assert external_neighborhood(pet, [0]) == (1, 4, 5)


# -- C-expander ---------------------------------------------------------------


def test_k12_expands():
    rep = check_c_expander(complete_graph(12), 3)
    assert rep.holds and rep.verdict == "certified-holds"


def test_disjoint_cliques_joint_edge():
    edges = [(i, j) for i in range(6) for j in range(i + 1, 6)]
    edges += [(i, j) for i in range(6, 12) for j in range(i + 1, 12)]
    from robustlab import build_graph

    rep = check_c_expander(build_graph(12, edges), 3)
    assert not rep.holds and rep.failing_kind == "joint-edge"
    A, B = rep.witness
    assert not any(
        build_graph(12, edges).has_edge(u, v) for u in A for v in B
    )


def test_path_expansion_violation():
    rep = check_c_expander(path_graph(12), 3)
    assert not rep.holds and rep.failing_kind == "expansion"


def test_exact_matches_literal_bruteforce():
    count = 0
    for G in random_small_graphs(100, n_max=12, seed=21, n_min=4):
        got = check_c_expander(G, 3).holds
        want = c_expander_bruteforce(G, 3)
        assert got == want
        count += 1
    assert count == 100


def test_exact_cap():
    with pytest.raises(CapExceededError):
        check_c_expander(complete_graph(21), 3)


def test_sampled_only_refutes():
    rep = check_c_expander(complete_graph(40), 3, mode="sampled", k=200, seed=1)
    assert rep.holds and rep.verdict == "no-violation-found" and not rep.certified
    rep2 = check_c_expander(path_graph(40), 3, mode="sampled", k=200, seed=1)
    assert not rep2.holds and rep2.verdict == "violated"


# -- matchings ----------------------------------------------------------------


def test_matching_basics():
    assert len(max_matching(complete_graph(4))) == 2
    assert len(max_matching(path_graph(3))) == 1
    assert len(max_matching(petersen_graph())) == 5


def test_matching_vs_bruteforce_500():
    for G in random_small_graphs(500, n_max=12, seed=33):
        m = max_matching(G)
        assert len(m) == matching_size_bruteforce(G), G
        assert not has_augmenting_path_bruteforce(G, m.edges)


def test_tutte_examples():
    assert tutte_violation(complete_graph(4)) is None
    assert tutte_violation(path_graph(3)) == ()
    from robustlab import build_graph

    star = build_graph(4, [(0, 1), (0, 2), (0, 3)])
    S = tutte_violation(star)
    assert S == (0,)


def test_tutte_matches_matching():
    for G in random_small_graphs(120, n_max=10, seed=5):
        perfect = 2 * len(max_matching(G)) == G.n
        assert (tutte_violation(G) is None) == perfect


def test_hall_bipartite():
    assert hall_violation_bipartite(gen_bipartite_biregular(3, 3, seed=0)) is None
    from robustlab.graph import Graph
    import numpy as np

    # two A-vertices share their single B-neighbor
    G = Graph(4, np.array([[0, 2], [1, 2]]), parts=(np.array([0, 1]), np.array([2, 3])))
    S = hall_violation_bipartite(G)
    assert S == (0, 1)
    # C6 as bipartite graph has a perfect matching
    c6 = Graph(
        6,
        np.array([[0, 3], [0, 5], [1, 3], [1, 4], [2, 4], [2, 5]]),
        parts=(np.array([0, 1, 2]), np.array([3, 4, 5])),
    )
    assert hall_violation_bipartite(c6) is None


def test_hall_requires_bipartition():
    with pytest.raises(ParameterError):
        hall_violation_bipartite(complete_graph(4))
    from robustlab.graph import Graph
    import numpy as np

    bad = Graph(4, np.array([[0, 1]]), parts=(np.array([0, 1]), np.array([2, 3])))
    with pytest.raises(ParameterError):
        hall_violation_bipartite(bad)


def test_hall_koenig_consistency():
    from robustlab.graph import Graph

    rng = np.random.default_rng(8)
    for _ in range(60):
        na = int(rng.integers(2, 6))
        edges = []
        for i in range(na):
            for j in range(na, 2 * na):
                if rng.random() < 0.45:
                    edges.append((i, j))
        G = Graph(
            2 * na,
            np.array(sorted(edges), dtype=np.int64).reshape(-1, 2),
            parts=(np.arange(na), np.arange(na, 2 * na)),
        )
        viol = hall_violation_bipartite(G)
        perfect = 2 * len(max_matching(G)) == G.n
        assert (viol is None) == perfect
        if viol is not None:
            nb = set()
            for a in viol:
                nb.update(map(int, G.adj[a]))
            assert len(nb) < len(viol)


# -- hamiltonicity ------------------------------------------------------------


def test_ham_examples():
    assert find_hamiltonian_cycle(cycle_graph(5)).found
    from robustlab import build_graph

    c4 = build_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])  # K4 minus a PM
    assert find_hamiltonian_cycle(c4).found
    res = find_hamiltonian_cycle(path_graph(4))
    assert not res.found and res.certified_absent and res.method == "exact"


def test_ham_verifies_cycles():
    for G in random_small_graphs(80, n_max=12, seed=9):
        res = find_hamiltonian_cycle(G, seed=1)
        if res.found:
            n = G.n
            assert sorted(res.cycle) == list(range(n))
            assert all(G.has_edge(res.cycle[i], res.cycle[(i + 1) % n]) for i in range(n))


def test_ham_heuristic_large():
    G = gen_random_regular(60, 6, seed=2)
    res = find_hamiltonian_cycle(G, budget=50, seed=0)
    assert res.found and res.method == "rotation-extension"
    assert sorted(res.cycle) == list(range(60))


def test_ham_budget_validation():
    with pytest.raises(ParameterError):
        find_hamiltonian_cycle(cycle_graph(5), budget=0)


def test_count_isolated():
    from robustlab import build_graph

    assert count_isolated(build_graph(5, [])) == 5
    assert count_isolated(complete_graph(5)) == 0
    k5_plus = build_graph(6, [(i, j) for i in range(5) for j in range(i + 1, 5)])
    assert count_isolated(k5_plus) == 1


def test_expander_implies_pm():
    rep = expander_implies_pm_test(3, 16, trials=20, seed=0, d=6)
    assert rep["counterexample"] is None
    assert rep["certified"] + rep["skipped"] == rep["trials"]
    assert rep["perfect_matchings"] == rep["certified"]
    with pytest.raises(ParameterError):
        expander_implies_pm_test(2, 16, trials=1)
    with pytest.raises(ParameterError):
        expander_implies_pm_test(3, 15, trials=1)
