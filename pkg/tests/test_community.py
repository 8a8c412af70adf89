"""Louvain and modularity oracles."""

import numpy as np
import pytest

import networkx as nx

from linkssl.community import (BlockState, get_detector, load_partition_file,
                               louvain, modularity, relabel_dense)
from linkssl.graphs import Graph


def two_triangles():
    return Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


def blocks_of(state):
    groups = {}
    for node, b in enumerate(state.assignment):
        groups.setdefault(int(b), set()).add(node)
    return set(frozenset(s) for s in groups.values())


def test_modularity_two_triangles_by_triangle():
    b = BlockState(np.array([0, 0, 0, 1, 1, 1]), 2, "external")
    assert modularity(two_triangles(), b) == pytest.approx(0.5, abs=1e-12)


def test_modularity_single_block_is_zero():
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
    b = BlockState(np.zeros(5, dtype=int), 1, "external")
    assert modularity(g, b) == pytest.approx(0.0, abs=1e-12)


def test_modularity_triangle_singletons():
    g = Graph(3, [(0, 1), (1, 2), (0, 2)])
    b = BlockState(np.array([0, 1, 2]), 3, "external")
    assert modularity(g, b) == pytest.approx(-1.0 / 3.0, abs=1e-12)


def test_modularity_invariant_under_relabeling():
    g = two_triangles()
    b1 = BlockState(np.array([0, 0, 0, 1, 1, 1]), 2, "external")
    b2 = BlockState(np.array([1, 1, 1, 0, 0, 0]), 2, "external")
    assert modularity(g, b1) == modularity(g, b2)


def test_modularity_matches_networkx_oracle():
    rng = np.random.default_rng(3)
    pool = [(u, v) for u in range(14) for v in range(u + 1, 14)]
    idx = rng.choice(len(pool), size=30, replace=False)
    g = Graph(14, [pool[i] for i in idx])
    assignment = rng.integers(0, 3, size=14)
    _, nb = relabel_dense(assignment)
    b = BlockState(*relabel_dense(assignment), "external")
    nxg = nx.Graph(list(map(tuple, g.edges.tolist())))
    nxg.add_nodes_from(range(14))
    communities = [
        {i for i in range(14) if b.assignment[i] == c}
        for c in range(b.num_blocks)
    ]
    expected = nx.algorithms.community.modularity(nxg, communities)
    assert modularity(g, b) == pytest.approx(expected, abs=1e-12)


def test_louvain_recovers_two_triangles():
    state = louvain(two_triangles(), seed=0)
    assert state.num_blocks == 2
    assert blocks_of(state) == {frozenset({0, 1, 2}), frozenset({3, 4, 5})}


def test_louvain_single_block_on_complete_graph():
    g = Graph(5, [(u, v) for u in range(5) for v in range(u + 1, 5)])
    state = louvain(g, seed=1)
    assert state.num_blocks == 1


def test_louvain_recovers_bridged_cliques():
    clique_a = [(u, v) for u in range(10) for v in range(u + 1, 10)]
    clique_b = [(u + 10, v + 10) for u, v in clique_a]
    g = Graph(20, clique_a + clique_b + [(0, 10)])
    state = louvain(g, seed=0)
    expected = {frozenset(range(10)), frozenset(range(10, 20))}
    assert blocks_of(state) == expected
    # the recovered partition beats the coarser single-block partition and
    # a finer random refinement
    q_found = modularity(g, state)
    q_single = modularity(g, BlockState(np.zeros(20, dtype=int), 1, "external"))
    finer = np.array([0] * 5 + [1] * 5 + [2] * 5 + [3] * 5)
    q_finer = modularity(g, BlockState(finer, 4, "external"))
    assert q_found > q_single and q_found > q_finer


def test_louvain_never_below_single_block_quality():
    rng = np.random.default_rng(11)
    for trial in range(5):
        pool = [(u, v) for u in range(16) for v in range(u + 1, 16)]
        idx = rng.choice(len(pool), size=28, replace=False)
        g = Graph(16, [pool[i] for i in idx])
        state = louvain(g, seed=trial)
        assert modularity(g, state) >= modularity(
            g, BlockState(np.zeros(16, dtype=int), 1, "external")) - 1e-12


def test_louvain_deterministic_given_seed():
    g = two_triangles()
    a = louvain(g, seed=5)
    b = louvain(g, seed=5)
    assert np.array_equal(a.assignment, b.assignment)


def test_louvain_edgeless_graph_warns_singletons():
    g = Graph(4, [])
    with pytest.warns(UserWarning):
        state = louvain(g, seed=0)
    assert state.num_blocks == 4


def test_block_state_validates_dense_ids():
    with pytest.raises(ValueError):
        BlockState(np.array([0, 2]), 2, "external")  # id 1 missing


def test_partition_file_roundtrip(tmp_path):
    p = tmp_path / "partition.txt"
    p.write_text("# node block\n0 7\n1 7\n2 9\n3 9\n")
    state = load_partition_file(p, 4)
    assert state.num_blocks == 2
    assert state.source == "external"
    assert list(state.assignment) == [0, 0, 1, 1]


def test_partition_file_missing_node_rejected(tmp_path):
    p = tmp_path / "partial.txt"
    p.write_text("0 0\n1 0\n")
    with pytest.raises(ValueError, match="lack"):
        load_partition_file(p, 3)


def test_get_detector_resolution():
    assert get_detector("louvain") is louvain
    with pytest.raises(NotImplementedError):
        get_detector("leiden")
    with pytest.raises(KeyError):
        get_detector("mystery")


def test_get_detector_external_partition(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text("0 0\n1 0\n2 1\n3 1\n4 1\n5 1\n")
    detector = get_detector("infomap", partition_file=p)
    state = detector(two_triangles(), seed=0)
    assert state.num_blocks == 2
    assert list(state.assignment) == [0, 0, 1, 1, 1, 1]
