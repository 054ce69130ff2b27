import numpy as np
import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from ldpclab import tanner
from ldpclab.tanner import AlistError

TOY_ALIST = """\
4 2
2 3
1 2 1 2
3 3
1
1 2
2
1 2
1 2 4
2 3 4
"""


def test_parse_alist_toy():
    g = tanner.parse_alist(TOY_ALIST)
    assert (g.n_vars, g.n_checks, g.n_edges) == (4, 2, 6)
    assert g.var_neighbors[1] == (0, 1)
    assert g.check_neighbors[0] == (0, 1, 3)


def test_parse_alist_zero_padding_ignored():
    padded = TOY_ALIST.replace("\n1\n", "\n1 0\n").replace("\n2\n", "\n2 0\n")
    g = tanner.parse_alist(padded)
    assert g.n_edges == 6


def test_ccsds_shape(ccsds):
    assert (ccsds.n_vars, ccsds.n_checks, ccsds.n_edges) == (128, 64, 512)
    vdeg = sorted(len(ns) for ns in ccsds.var_neighbors)
    assert vdeg[:64] == [3] * 64 and vdeg[64:] == [5] * 64
    assert all(len(vs) == 8 for vs in ccsds.check_neighbors)


def test_reg64_shape(reg64):
    assert (reg64.n_vars, reg64.n_checks, reg64.n_edges) == (64, 32, 192)


def test_edge_index_canonical_order(toy_graph):
    g = toy_graph
    edges = sorted(g.edge_index, key=g.edge_index.get)
    assert edges == sorted(edges)  # (var asc, check asc)
    assert len(edges) == g.n_edges
    for (n, m), e in g.edge_index.items():
        assert g.edge_var[e] == n and g.edge_check[e] == m


def test_roundtrip(toy_graph, ccsds):
    for g in (toy_graph, ccsds):
        g2 = tanner.parse_alist(tanner.to_alist(g))
        assert g2.var_neighbors == g.var_neighbors
        assert g2.check_neighbors == g.check_neighbors


@pytest.mark.parametrize("mutate,match", [
    (lambda s: s.replace("4 2\n", "4\n", 1), "header"),
    (lambda s: s.replace("\n1 2\n2\n", "\n1 2\n3\n", 1), "degree"),
    (lambda s: s.replace("\n1 2 4\n", "\n1 2 2\n", 1), "duplicate"),
    (lambda s: s.replace("\n1 2 4\n", "\n1 2 9\n", 1), "range"),
])
def test_parse_alist_errors(mutate, match):
    with pytest.raises(AlistError) as exc:
        tanner.parse_alist(mutate(TOY_ALIST))
    assert exc.value.line > 0


def test_parse_alist_view_mismatch():
    bad = TOY_ALIST.replace("\n2 3 4\n", "\n1 3 4\n")
    with pytest.raises(AlistError, match="disagrees|degree"):
        tanner.parse_alist(bad)


def test_syndrome_zero_word(toy_graph):
    assert not tanner.syndrome(toy_graph, np.zeros(4, dtype=np.uint8)).any()


def test_syndrome_single_column(toy_graph):
    s = tanner.syndrome(toy_graph, np.array([1, 0, 0, 0]))
    assert s.tolist() == [1, 0]


def test_syndrome_length_mismatch(toy_graph):
    with pytest.raises(ValueError):
        tanner.syndrome(toy_graph, np.zeros(5))


def test_syndrome_batched(ccsds, rng):
    bits = rng.integers(0, 2, size=(10, ccsds.n_vars))
    batch = tanner.syndrome(ccsds, bits)
    for i in range(10):
        assert (batch[i] == tanner.syndrome(ccsds, bits[i])).all()


@given(st.data())
@settings(max_examples=50, deadline=None)
def test_syndrome_linearity(data):
    m = data.draw(st.integers(2, 6))
    n = data.draw(st.integers(2, 10))
    h = data.draw(st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                           min_size=m, max_size=m))
    g = tanner.from_matrix(np.array(h, dtype=np.uint8))
    c1 = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n,
                                     max_size=n)), dtype=np.uint8)
    c2 = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n,
                                     max_size=n)), dtype=np.uint8)
    lhs = tanner.syndrome(g, c1 ^ c2)
    rhs = tanner.syndrome(g, c1) ^ tanner.syndrome(g, c2)
    assert (lhs == rhs).all()


def test_girth_four_cycle(four_cycle_graph):
    assert tanner.girth_and_multiplicity(four_cycle_graph) == (4, 1)


def test_girth_acyclic():
    g = tanner.from_matrix(np.array([[1, 1, 0], [0, 0, 1]]))
    assert tanner.girth_and_multiplicity(g) is None


def test_girth_ccsds(ccsds):
    assert tanner.girth_and_multiplicity(ccsds) == (6, 2336)


def test_girth_reg64(reg64):
    girth, mult = tanner.girth_and_multiplicity(reg64)
    assert girth == 6 and mult > 0


def _nx_cycle_count(g):
    gr = nx.Graph()
    for n in range(g.n_vars):
        for m in g.var_neighbors[n]:
            gr.add_edge(("v", n), ("c", m))
    try:
        girth = nx.girth(gr)
    except Exception:
        girth = None
    if girth is None or girth == float("inf"):
        return None
    count = sum(1 for cyc in nx.simple_cycles(gr, length_bound=girth)
                if len(cyc) == girth)
    return girth, count


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_girth_matches_networkx(data):
    m = data.draw(st.integers(2, 5))
    n = data.draw(st.integers(2, 8))
    rows = data.draw(st.lists(
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        min_size=m, max_size=m))
    g = tanner.from_matrix(np.array(rows, dtype=np.uint8))
    assert tanner.girth_and_multiplicity(g) == _nx_cycle_count(g)


def test_count_weights(toy_graph, ccsds, reg64):
    assert tanner.count_weights(toy_graph) == 12
    assert tanner.count_weights(ccsds) == 1024
    assert tanner.count_weights(reg64) == 384


def test_summary_row(four_cycle_graph):
    assert tanner.summary_row(four_cycle_graph) == "2,2,4,4,1"
