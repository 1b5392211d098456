import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import period_oracle, reachability_oracle
from markercoe.graph import (
    Graph,
    GraphError,
    all_paths,
    bipartite_double,
    classify,
    from_adjacency,
    higher_edge_graph,
    higman_thompson,
    is_primitive_matrix,
    is_strongly_connected,
    is_two_edge_connected,
    isomorphic_small,
    period,
    periodic_decomposition,
    remove_edge,
    require_sft,
    rose,
    shortest_path,
    subdivided_circle,
    theta,
)

matrices = st.integers(1, 3).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 2), min_size=n, max_size=n), min_size=n, max_size=n)
)


def test_rose_shape():
    g = rose(3)
    assert g.num_vertices == 1 and g.num_edges == 3
    assert g.format_word((0, 2, 1)) == "acb"
    assert g.parse_word("acb") == (0, 2, 1)


def test_theta_shape():
    g = theta()
    assert g.adjacency() == [[0, 2], [2, 0]]
    assert period(g) == 2


def test_higman_thompson_adjacency():
    assert higman_thompson(3, 2).adjacency() == [[0, 3], [1, 0]]
    assert higman_thompson(4, 1).adjacency() == [[4]]


def test_parse_word_errors():
    with pytest.raises(GraphError):
        rose(2).parse_word("z")
    with pytest.raises(GraphError):
        rose(2).parse_word("5")
    assert rose(2).parse_word("o") == ()
    assert rose(2).parse_word("0 1 1") == (0, 1, 1)


def test_invalid_graphs():
    with pytest.raises(GraphError):
        Graph(0, (), ())
    with pytest.raises(GraphError):
        Graph(1, (0,), (1,))
    with pytest.raises(GraphError):
        Graph(1, (0,), (0,), ("a", "b"))


def test_classification_of_circle_and_rose():
    c = classify(subdivided_circle(4))
    assert c.is_subdivided_circle == 4 and not c.sft_valid
    with pytest.raises(GraphError):
        require_sft(subdivided_circle(4))
    r = classify(rose(2))
    assert r.is_rose == 2 and r.sft_valid and r.two_edge_connected
    # a bare vertex is not irreducible
    assert not classify(from_adjacency([[0]])).sft_valid


def test_higher_edge_graph_counts_paths():
    g = theta()
    h, labels = higher_edge_graph(g, 3)
    assert h.num_edges == len(all_paths(g, 3)) == len(labels)
    assert h.num_vertices == len(all_paths(g, 2))


def test_periodic_decomposition_of_theta():
    classes, e0, paths = periodic_decomposition(theta())
    assert classes == [[0], [1]]
    assert e0.num_edges == 4 and all(len(p) == 2 for p in paths)


def test_misc_helpers():
    assert is_primitive_matrix([[1, 1], [1, 0]])
    assert not is_primitive_matrix([[0, 1], [1, 0]])
    assert isomorphic_small(rose(2), from_adjacency([[2]]))
    assert not isomorphic_small(rose(2), rose(3))
    assert bipartite_double(rose(2)).adjacency() == [[0, 2], [2, 0]]
    assert remove_edge(rose(2), 0).num_edges == 1
    assert shortest_path(theta(), 0, 0) == ()


@given(matrices)
@settings(max_examples=150, deadline=None)
def test_strong_connectivity_matches_closure(a):
    g = from_adjacency(a)
    reach = reachability_oracle(g)
    assert is_strongly_connected(g) == all(len(r) == g.num_vertices for r in reach)


@given(matrices)
@settings(max_examples=150, deadline=None)
def test_two_edge_connectivity_matches_removal(a):
    g = from_adjacency(a)
    if not is_strongly_connected(g) or not g.num_edges:
        return
    expect = all(all(len(r) == g.num_vertices for r in reachability_oracle(g, removed={e})) for e in g.edges)
    assert is_two_edge_connected(g) == expect


@given(matrices)
@settings(max_examples=100, deadline=None)
def test_period_matches_closed_walks(a):
    g = from_adjacency(a)
    if g.num_edges and is_strongly_connected(g):
        assert period(g) == period_oracle(g)


@given(matrices)
@settings(max_examples=100, deadline=None)
def test_json_and_adjacency_roundtrip(a):
    g = from_adjacency(a)
    assert g.adjacency() == [list(r) for r in a]
    assert Graph.from_json(json.dumps(g.to_json())) == g


@given(matrices, st.integers(0, 3))
@settings(max_examples=100, deadline=None)
def test_shortest_path_is_a_shortest_path(a, seed):
    g = from_adjacency(a)
    s, t = seed % g.num_vertices, (seed + 1) % g.num_vertices
    p = shortest_path(g, s, t)
    reachable = t in reachability_oracle(g)[s]
    assert (p is not None) == reachable
    if p:
        assert g.src[p[0]] == s and g.dst[p[-1]] == t
        assert all(g.dst[x] == g.src[y] for x, y in zip(p, p[1:]))
        shorter = [w for n in range(1, len(p)) for w in all_paths(g, n) if g.src[w[0]] == s and g.dst[w[-1]] == t]
        assert not shorter
