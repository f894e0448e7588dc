import numpy as np
import pytest
from hypothesis import given, strategies as st

from regtrace.exceptions import DecorationMismatch, IllegalSimple, NonRegular, OddProduct
from regtrace.graph_model import (MagneticDecoration, WeightDecoration, build_graph,
                                  complete_bipartite_graph, complete_graph, disjoint_union,
                                  format_graph, is_bipartite, is_connected, parse_graph,
                                  petersen_graph, read_graph, write_graph)

from conftest import random_graph


def test_k4_basic_counts(k4):
    assert (k4.n_vertices, k4.n_edges, k4.n_directed, k4.degree) == (4, 6, 12, 3)
    assert np.all(k4.degrees == 3)


def test_directed_edge_layout(k4):
    for k, (i, j) in enumerate(k4.edges):
        assert (k4.origin[2 * k], k4.terminus[2 * k]) == (i, j)
        assert (k4.origin[2 * k + 1], k4.terminus[2 * k + 1]) == (j, i)
    assert np.array_equal(k4.reversal[k4.reversal], np.arange(12))
    assert np.all(k4.origin[k4.reversal] == k4.terminus)


def test_loop_rejected_in_simple_mode():
    with pytest.raises(IllegalSimple):
        build_graph([(0, 0), (0, 1)])


def test_parallel_edge_rejected_in_simple_mode():
    with pytest.raises(IllegalSimple):
        build_graph([(0, 1), (1, 0)])


def test_odd_product_rejected():
    with pytest.raises(OddProduct):
        build_graph([(0, 1), (1, 2), (2, 0)], n_vertices=3, degree=3)


def test_non_regular_rejected():
    with pytest.raises(NonRegular):
        build_graph([(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])


def test_simple_needs_degree_three():
    with pytest.raises(NonRegular):
        build_graph([(0, 1), (1, 2), (2, 0)])


def test_multigraph_loops_and_multiplicity():
    g = build_graph([(0, 0), (0, 1, 2), (1, 1)], mode="multigraph")
    assert g.degree == 4 and g.multigraph
    assert g.n_edges == 4


def test_irregular_graph_allowed_when_flagged():
    g = build_graph([(0, 1), (1, 2)], regular=False)
    assert g.degree is None and not g.is_regular


def test_connectivity_and_bipartiteness(k4, petersen):
    assert is_connected(k4) and not is_bipartite(k4)
    assert is_bipartite(complete_bipartite_graph(3))
    assert not is_connected(disjoint_union(k4, k4))
    assert not is_bipartite(petersen)


def test_file_round_trip(tmp_path, petersen):
    path = tmp_path / "p.graph"
    write_graph(petersen, path)
    assert read_graph(path) == petersen
    assert format_graph(parse_graph(format_graph(petersen))) == format_graph(petersen)


def test_decoration_bound_to_graph(k4, petersen):
    dec = MagneticDecoration(np.zeros(k4.n_edges), k4.fingerprint())
    dec.check(k4)
    with pytest.raises(DecorationMismatch):
        dec.check(petersen)
    with pytest.raises(ValueError):
        WeightDecoration([1.5] * k4.n_edges, k4.fingerprint())


@given(st.integers(0, 10_000), st.sampled_from([(8, 3), (10, 3), (9, 4), (12, 5)]))
def test_sampled_graphs_are_regular(seed, vd):
    V, d = vd
    g = random_graph(V, d, seed)
    assert np.all(g.degrees == d)
    assert len({tuple(sorted(e)) for e in g.edges}) == g.n_edges
