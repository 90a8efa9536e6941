import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphlay.graph import (
    DisconnectedGraphError, Graph, GraphFormatError, all_pairs_bfs, degree_stats,
    format_edge_list, format_graphml, is_connected, parse_edge_list, parse_graphml, read_graph,
)

from conftest import complete_graph, grid_graph, path_graph, random_connected, star_graph


def test_parse_edge_list_path():
    g = parse_edge_list(b"0 1\n1 2")
    assert g.num_nodes == 3
    assert g.edges == ((0, 1), (1, 2))
    assert g.adjacency == ((1,), (0, 2), (1,))
    assert g.degrees == (1, 2, 1)


def test_parse_edge_list_dedups():
    g = parse_edge_list("0 1\n0 1\n1 0\n")
    assert g.num_nodes == 2 and g.num_edges == 1


def test_parse_edge_list_comments_and_blank_lines():
    g = parse_edge_list("# header\n\n0 1\n  # indented comment\n1 2\n")
    assert g.num_edges == 2


def test_parse_edge_list_disconnected():
    with pytest.raises(DisconnectedGraphError) as err:
        parse_edge_list("0 1\n2 3")
    assert len(err.value.components) == 2
    assert "0, 1" in str(err.value) and "2, 3" in str(err.value)


@pytest.mark.parametrize("text, line", [
    ("0 1\n1 x\n", 2),
    ("0 1\n1\n", 2),
    ("0 1\n1 2 3\n", 2),
    ("0 0\n", 1),
    ("0 -1\n", 1),
])
def test_parse_edge_list_errors_carry_line(text, line):
    with pytest.raises(GraphFormatError) as err:
        parse_edge_list(text)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_parse_edge_list_empty():
    with pytest.raises(GraphFormatError):
        parse_edge_list("# nothing\n")


GRAPHML_P2 = b"""<?xml version="1.0"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns">
  <key id="d0" for="node" attr.name="label" attr.type="string"/>
  <graph id="G" edgedefault="undirected">
    <node id="n7"><data key="d0">ignored</data></node>
    <node id="n3"/>
    <edge source="n7" target="n3"/>
  </graph>
</graphml>"""


def test_parse_graphml_minimal():
    g = parse_graphml(GRAPHML_P2)
    assert g.num_nodes == 2 and g.edges == ((0, 1),)
    assert g.node_ids == ("n7", "n3")


def test_parse_graphml_undeclared_node():
    bad = GRAPHML_P2.replace(b'target="n3"', b'target="n9"')
    with pytest.raises(GraphFormatError, match="n9"):
        parse_graphml(bad)


def test_parse_graphml_malformed():
    with pytest.raises(GraphFormatError, match="malformed"):
        parse_graphml(b"<graphml><graph>")


def test_parse_graphml_disconnected():
    doc = b'<graphml><graph><node id="a"/><node id="b"/><node id="c"/><edge source="a" target="b"/></graph></graphml>'
    with pytest.raises(DisconnectedGraphError):
        parse_graphml(doc)


def test_read_graph_dispatch(tmp_path):
    (tmp_path / "g.graphml").write_bytes(GRAPHML_P2)
    (tmp_path / "g.edges").write_text("0 1\n1 2\n")
    assert read_graph(tmp_path / "g.graphml").num_nodes == 2
    assert read_graph(tmp_path / "g.edges").num_nodes == 3


def test_graph_rejects_bad_edges():
    with pytest.raises(ValueError):
        Graph(2, ((0, 0),))
    with pytest.raises(ValueError):
        Graph(2, ((0, 2),))


def test_all_pairs_small():
    d = all_pairs_bfs(path_graph(3))
    assert d[0, 2] == 2 and d[0, 1] == 1
    k4 = all_pairs_bfs(complete_graph(4))
    assert (k4[~np.eye(4, dtype=bool)] == 1).all()


def test_grid_corner_distance():
    d = all_pairs_bfs(grid_graph(5, 5))
    assert d[0, 24] == 8


def test_distance_matrix_is_read_only():
    d = all_pairs_bfs(path_graph(3))
    with pytest.raises(ValueError):
        d[0, 1] = 5


def test_connectivity_and_degrees():
    p3 = path_graph(3)
    assert is_connected(p3)
    assert degree_stats(p3) == (1, 2, 4 / 3)
    assert not is_connected(Graph(4, ((0, 1), (2, 3))))
    assert degree_stats(star_graph(3))[1] == 3


@st.composite
def connected_graphs(draw, max_n=14):
    n = draw(st.integers(2, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_connected(n, np.random.default_rng(seed), extra=draw(st.floats(0, 1.5)))


@given(connected_graphs())
def test_round_trip_edge_list(g):
    assert parse_edge_list(format_edge_list(g)) == g


@given(connected_graphs())
def test_round_trip_graphml(g):
    assert parse_graphml(format_graphml(g)) == g


@given(connected_graphs())
def test_distance_invariants(g):
    d = all_pairs_bfs(g)
    n = g.num_nodes
    assert (np.diag(d) == 0).all()
    assert (d == d.T).all()
    assert (d[~np.eye(n, dtype=bool)] >= 1).all()
    # triangle inequality over all triples
    assert (d[:, None, :] <= d[:, :, None] + d[None, :, :]).all()


@given(connected_graphs(), st.integers(0, 2**32 - 1))
def test_relabel_permutes_distances(g, seed):
    perm = np.random.default_rng(seed).permutation(g.num_nodes)
    d = all_pairs_bfs(g)
    dp = all_pairs_bfs(g.relabel(perm))
    assert (dp[np.ix_(perm, perm)] == d).all()
