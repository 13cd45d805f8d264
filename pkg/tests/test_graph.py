import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustlab import build_graph, directed_pair_count, internal_edge_count, parse_edge_list, write_edge_list
from robustlab.errors import DuplicateEdgeError, FormatError, SelfLoopError, VertexRangeError
from robustlab.graph import vertex_set

from conftest import complete_graph, petersen_graph, random_small_graphs


def test_triangle_build():
    G = build_graph(3, [(0, 1), (1, 2), (0, 2)])
    assert G.m == 3
    assert G.degrees.tolist() == [2, 2, 2]


def test_empty_graph():
    G = build_graph(2, [])
    assert G.m == 0 and G.n == 2


def test_duplicate_edge_rejected():
    with pytest.raises(DuplicateEdgeError):
        build_graph(4, [(0, 1), (0, 1)])
    with pytest.raises(DuplicateEdgeError):
        build_graph(4, [(0, 1), (1, 0)])


def test_self_loop_rejected():
    with pytest.raises(SelfLoopError):
        build_graph(3, [(1, 1)])


def test_out_of_range_rejected():
    with pytest.raises(VertexRangeError):
        build_graph(3, [(0, 3)])
    with pytest.raises(VertexRangeError):
        vertex_set(3, [5])


def test_build_idempotent_under_edge_order():
    a = build_graph(5, [(0, 1), (2, 3), (1, 4)])
    b = build_graph(5, [(1, 4), (1, 0), (3, 2)])
    assert a == b


def test_pair_counts_triangle():
    G = build_graph(3, [(0, 1), (1, 2), (0, 2)])
    assert directed_pair_count(G, range(3), range(3)) == 6
    assert directed_pair_count(G, [0], [1, 2]) == 2


def test_pair_counts_petersen():
    G = petersen_graph()
    assert G.m == 15
    assert directed_pair_count(G, range(10), range(10)) == 30
    assert internal_edge_count(G, range(5)) == 5


def test_internal_counts():
    assert internal_edge_count(complete_graph(4), range(4)) == 6
    assert internal_edge_count(complete_graph(4), []) == 0


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_pair_count_symmetry_and_doubling(data):
    G = random_small_graphs(1, seed=data.draw(st.integers(0, 10**6)))[0]
    S = data.draw(st.sets(st.integers(0, G.n - 1)))
    T = data.draw(st.sets(st.integers(0, G.n - 1)))
    assert directed_pair_count(G, S, T) == directed_pair_count(G, T, S)
    assert directed_pair_count(G, S, S) == 2 * internal_edge_count(G, S)


def test_edge_list_roundtrip():
    for G in random_small_graphs(10, seed=3):
        assert parse_edge_list(write_edge_list(G)) == G


def test_edge_list_format_errors():
    with pytest.raises(FormatError):
        parse_edge_list("")
    with pytest.raises(FormatError):
        parse_edge_list("3\n0 1\n")
    with pytest.raises(FormatError):
        parse_edge_list("3 2\n0 1\n")
    with pytest.raises(FormatError):
        parse_edge_list("3 1\n1 0\n")  # needs u < v
    with pytest.raises(FormatError):
        parse_edge_list("3 1\n0 x\n")


def test_induced_subgraph_labels():
    G = petersen_graph()
    sub, labels = G.induced([0, 1, 2, 3, 4])
    assert sub.n == 5 and sub.m == 5  # the outer ring is a 5-cycle
    assert labels.tolist() == [0, 1, 2, 3, 4]
    sub2, _ = G.induced(range(10))
    assert sub2 == G
