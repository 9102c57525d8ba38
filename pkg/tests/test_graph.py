import networkx as nx
import pytest
from hypothesis import given, strategies as st

from flipsim.errors import GraphFormatError
from flipsim.generators import GraphFamily, generate
from flipsim.graph import Graph, format_edge_list, graph_center, load_edge_list, parse_edge_list, save_edge_list


def test_parse_minimal_directed():
    g = parse_edge_list("directed 2\n0 1 1\n")
    assert g.directed and g.num_vertices == 2
    assert g.arcs == ((0, 1, 1),)


def test_undirected_path_expands_to_four_arcs():
    g = parse_edge_list("undirected 3\n0 1 1\n1 2 1\n")
    assert len(g.edges) == 2
    assert sorted(g.arcs) == [(0, 1, 1), (1, 0, 1), (1, 2, 1), (2, 1, 1)]


@pytest.mark.parametrize("text, line", [
    ("directed 3\n0 x 1\n", 2),
    ("directed 3\n0 1 1\n0 1 2\n", 3),
    ("directed 3\n0 5 1\n", 2),
    ("directed 3\n1 1 1\n", 2),
    ("directed 3\n0 1 0\n", 2),
    ("graph 3\n", 1),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(GraphFormatError) as exc:
        parse_edge_list(text)
    assert exc.value.line == line


def test_degrees():
    g = Graph.from_edges(True, 2, [(0, 1, 1)])
    assert g.degrees() == [(0, 1), (1, 0)]
    u = Graph.from_edges(False, 2, [(0, 1, 1)])
    assert u.degrees() == [(1, 1), (1, 1)]


def test_center_examples():
    path = Graph.from_edges(False, 3, [(0, 1, 1), (1, 2, 1)])
    assert graph_center(path) == 1
    star = Graph.from_edges(False, 5, [(0, i, 1) for i in range(1, 5)])
    assert graph_center(star) == 0


def _nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.num_vertices))
    h.add_edges_from((u, v) for u, v, _ in g.edges)
    return h


@pytest.mark.parametrize("family", ["tree", "srn", "lrn", "syn"])
@pytest.mark.parametrize("seed", range(3))
def test_center_matches_all_pairs_eccentricity(family, seed):
    g = generate(GraphFamily.parse(family), seed)
    ecc = nx.eccentricity(_nx(g))
    best = min(ecc.values())
    assert graph_center(g) == min(v for v, e in ecc.items() if e == best)


@given(st.integers(2, 12).flatmap(lambda n: st.tuples(
    st.just(n), st.booleans(),
    st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(1, 9)), max_size=30))))
def test_round_trip(args):
    n, directed, raw = args
    seen, edges = set(), []
    for u, v, w in raw:
        key = (u, v) if directed else (min(u, v), max(u, v))
        if u != v and key not in seen:
            seen.add(key)
            edges.append((u, v, w))
    g = Graph.from_edges(directed, n, edges)
    h = parse_edge_list(format_edge_list(g))
    assert (h.directed, h.num_vertices, sorted(h.arcs)) == (g.directed, g.num_vertices, sorted(g.arcs))


def test_save_load(tmp_path):
    g = generate(GraphFamily.parse("srn"), 4)
    save_edge_list(g, tmp_path / "g.el")
    h = load_edge_list(tmp_path / "g.el")
    assert sorted(h.arcs) == sorted(g.arcs) and h.num_vertices == g.num_vertices


def test_weak_components_and_symmetrized():
    g = Graph.from_edges(True, 4, [(0, 1, 1), (3, 2, 1)])
    assert g.weak_components() == [[0, 1], [2, 3]]
    assert not g.is_weakly_connected()
    s = g.symmetrized()
    assert sorted((u, v) for u, v, _ in s.arcs) == [(0, 1), (1, 0), (2, 3), (3, 2)]
