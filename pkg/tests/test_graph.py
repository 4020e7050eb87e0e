import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbpdmm.graph import (
    Graph,
    GraphGenerationError,
    complete_graph,
    cycle_graph,
    erdos_renyi,
    is_connected,
    neighbors,
    path_graph,
    read_edge_list,
    write_edge_list,
)


def test_er_forced_single_edge():
    for seed in range(5):
        g = erdos_renyi(2, 1.0, seed)
        assert g.edges == {(0, 1)}


def test_er_golden_fixture(fixtures):
    g = erdos_renyi(5, 0.5, 42)
    assert sorted(g.edges) == [(0, 2), (1, 2), (2, 4), (3, 4)]
    assert g == read_edge_list(fixtures / "er_m5_p05_seed42.txt")


def test_er_hundred_nodes_connected():
    g = erdos_renyi(100, 0.2, 0)
    assert g.node_count == 100 and is_connected(g)
    # expected edge count 0.2 * C(100, 2) = 990
    assert 850 < len(g.edges) < 1130


def test_er_deterministic():
    assert erdos_renyi(30, 0.15, 9) == erdos_renyi(30, 0.15, 9)


def test_er_retry_cap():
    with pytest.raises(GraphGenerationError, match="m=40, p_edge=0.001"):
        erdos_renyi(40, 0.001, 0, max_retries=5)


@pytest.mark.parametrize("m,p", [(1, 0.5), (5, 0.0), (5, 1.5)])
def test_er_bad_args(m, p):
    with pytest.raises(ValueError):
        erdos_renyi(m, p)


def test_neighbors_examples():
    p = path_graph(3)
    assert neighbors(p, 1) == {0, 2}
    assert neighbors(p, 0) == {1}
    assert neighbors(complete_graph(4), 2) == {0, 1, 3}
    with pytest.raises(IndexError):
        neighbors(p, 3)


def test_is_connected_examples():
    assert not is_connected(Graph(4, [(0, 1), (2, 3)]))
    assert is_connected(path_graph(6))
    assert is_connected(Graph(1))


def test_no_self_loops_and_unordered():
    with pytest.raises(ValueError):
        Graph(3, [(1, 1)])
    assert Graph(3, [(2, 0), (0, 2)]).edges == {(0, 2)}


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 25), st.floats(0.15, 1.0), st.integers(0, 10_000))
def test_generated_graphs_connected_and_symmetric(m, p, seed):
    g = erdos_renyi(m, p, seed)
    assert is_connected(g)
    for i in range(m):
        for j in g.neighbors(i):
            assert i in g.neighbors(j)
            assert i != j
    A = g.adjacency()
    assert np.array_equal(A, A.T)


def test_edge_list_roundtrip(tmp_path):
    g = cycle_graph(6)
    write_edge_list(g, tmp_path / "g.txt")
    assert read_edge_list(tmp_path / "g.txt") == g
    (tmp_path / "h.txt").write_text("# comment\n0 1\n\n1 2  # trailing\n")
    assert read_edge_list(tmp_path / "h.txt", node_count=4) == Graph(4, [(0, 1), (1, 2)])
