import itertools
import random

import networkx as nx
import numpy as np
import pydot
import pytest

from ckb import (
    InvalidDiagramError,
    NonNegIntMatrix,
    ZeroOneMatrix,
    build_edge_table,
    coupled_graph,
    is_primitive,
    is_strongly_connected,
    linked_pairs,
    path_words,
    to_dot,
    zero_one_reduction,
)
from ckb.diagram import strongly_connected_components

from conftest import fixture_path, random_primitive, table

A3 = [[1, 1, 0], [0, 1, 1], [1, 0, 1]]


def brute_pairs(E):
    return {(e, f) for e in range(len(E)) for f in range(len(E)) if E.range(e) == E.source(f)}


def test_edge_table_3x3_row_major(a3):
    got = [(e.name, e.source + 1, e.range + 1) for e in a3.edges]
    assert got == [("e1", 1, 1), ("e2", 1, 2), ("e3", 2, 2), ("e4", 2, 3), ("e5", 3, 1), ("e6", 3, 3)]


def test_edge_table_single_loop(a1):
    assert [(e.source, e.range) for e in a1.edges] == [(0, 0)]


def test_edge_table_custom_labels(b4):
    got = [(e.name, e.source + 1, e.range + 1) for e in b4.edges]
    assert got == [("e1", 1, 1), ("e2", 1, 3), ("e3", 1, 4), ("e4", 2, 4),
                   ("e5", 2, 2), ("e6", 3, 2), ("e7", 4, 3), ("e8", 4, 1)]


@pytest.mark.parametrize("rows", [
    [[0, 0], [1, 1]],          # zero row
    [[1, 0], [1, 0]],          # zero column
    [[1, 2], [1, 1]],          # not 0-1
    [[1, 1]],                  # not square
    [],
])
def test_invalid_matrices_rejected(rows):
    with pytest.raises(InvalidDiagramError):
        ZeroOneMatrix(rows)


def test_label_override_must_match_entries():
    with pytest.raises(InvalidDiagramError):
        build_edge_table(A3, [("x", 0, 0), ("y", 0, 2), ("z", 1, 1), ("u", 1, 2), ("v", 2, 0), ("w", 2, 2)])
    with pytest.raises(InvalidDiagramError):
        build_edge_table(A3, [("x", 0, 0)])


def test_linked_pairs_3x3(a3):
    L = linked_pairs(a3)
    e1, e3 = a3.ids("e1", "e3")
    assert (e1, e1) in L and (e1, e3) not in L
    assert len(L) == 12
    assert L == brute_pairs(a3)


def test_linked_pairs_single_loop(a1):
    assert linked_pairs(a1) == {(0, 0)}


EXPECTED_ARROWS = [("a_{1,1}", "a_{1,1}"), ("a_{2,2}", "a_{2,2}"), ("a_{3,3}", "a_{3,3}"),
        ("a_{1,1}", "a_{1,2}"), ("a_{1,2}", "a_{2,2}"), ("a_{1,2}", "a_{2,3}"),
        ("a_{2,2}", "a_{2,3}"), ("a_{2,3}", "a_{3,1}"), ("a_{2,3}", "a_{3,3}"),
        ("a_{3,3}", "a_{3,1}"), ("a_{3,1}", "a_{1,1}"), ("a_{3,1}", "a_{1,2}")]


def test_coupled_graph_matches_hand_listed_arrows(a3):
    G = coupled_graph(a3)
    arrows = {(a3.entry_label(e), a3.entry_label(f)) for e, f in G.arrows}
    assert len(G.vertices) == 6 and len(G.arrows) == 12
    assert arrows == set(EXPECTED_ARROWS)


def test_coupled_graph_adjacency_equals_pairs(a3):
    G = coupled_graph(a3)
    adj = np.array(G.adjacency)
    assert adj.sum() == 12
    assert {tuple(map(int, ij)) for ij in np.argwhere(adj)} == linked_pairs(a3)


def test_coupled_graph_single_loop(a1):
    G = coupled_graph(a1)
    assert list(G.vertices) == [0] and G.arrows == ((0, 0),)


def test_coupled_graph_against_networkx_line_graph():
    rng = random.Random(7)
    for _ in range(30):
        A = random_primitive(rng, rng.randint(1, 5))
        E = build_edge_table(A)
        D = nx.DiGraph()
        D.add_edges_from((e.source, e.range) for e in E.edges)
        L = nx.line_graph(D)
        expected = {(E.edge_between(*u), E.edge_between(*v)) for u, v in L.edges}
        assert set(coupled_graph(E).arrows) == expected


def brute_primitive_exponent(rows):
    n = len(rows)
    M = np.array(rows, dtype=object)
    P = M.copy()
    for k in range(1, n * n - 2 * n + 3):
        if all(P[i, j] > 0 for i in range(n) for j in range(n)):
            return k
        P = P.dot(M)
    return None


def test_primitive_3x3_exponent_two():
    A = ZeroOneMatrix(A3)
    res = is_primitive(A)
    assert res.primitive and res.exponent == 2
    square = np.array(A3) @ np.array(A3)
    assert square.tolist() == [[1, 2, 1], [1, 1, 2], [2, 1, 1]]


def test_swap_not_primitive_but_coupled_graph_strong():
    A = ZeroOneMatrix([[0, 1], [1, 0]])
    res = is_primitive(A)
    assert not res.primitive and res.irreducible and res.period == 2
    i, j = res.zero_entry
    assert np.linalg.matrix_power(np.array(A.rows), res.bound)[i, j] == 0
    assert is_strongly_connected(coupled_graph(A))


def test_single_loop_primitive(a1):
    res = is_primitive(a1.matrix)
    assert res.primitive and res.exponent == 1
    assert is_strongly_connected(coupled_graph(a1))


def test_reducible_matrix():
    res = is_primitive(ZeroOneMatrix([[1, 1], [0, 1]]))
    assert not res.primitive and not res.irreducible and res.period is None


def test_primitivity_against_brute_force():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(1, 5)
        rows = [[int(rng.random() < 0.4) for _ in range(n)] for _ in range(n)]
        try:
            A = ZeroOneMatrix(rows)
        except InvalidDiagramError:
            continue
        assert is_primitive(A).exponent == brute_primitive_exponent(rows)


def test_wielandt_matrix_needs_full_bound():
    # n-cycle plus one chord: the extremal case of the exponent bound
    n = 5
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][(i + 1) % n] = 1
    rows[n - 1][1] = 1
    res = is_primitive(ZeroOneMatrix(rows))
    assert res.primitive and res.exponent == n * n - 2 * n + 2


def test_tarjan_against_networkx():
    rng = random.Random(11)
    for _ in range(50):
        n = rng.randint(1, 9)
        succ = {v: [w for w in range(n) if rng.random() < 0.25] for v in range(n)}
        comps = strongly_connected_components(n, lambda v: succ[v])
        D = nx.DiGraph()
        D.add_nodes_from(range(n))
        D.add_edges_from((v, w) for v in succ for w in succ[v])
        assert {frozenset(c) for c in comps} == {frozenset(c) for c in nx.strongly_connected_components(D)}


def test_zero_one_reduction_of_double_edge():
    assert zero_one_reduction(NonNegIntMatrix([[2]])).rows == ((1, 1), (1, 1))


def test_zero_one_reduction_trivial():
    assert zero_one_reduction(NonNegIntMatrix([[1]])).rows == ((1,),)


def test_zero_one_reduction_of_01_matrix_is_coupled_adjacency(a3):
    assert zero_one_reduction(a3.matrix).rows == coupled_graph(a3).adjacency


def test_zero_one_reduction_multigraph_counts():
    F = NonNegIntMatrix([[1, 2], [1, 0]])
    R = zero_one_reduction(F)
    # edge e follows f iff range(e) = source(f): row sums are out-degrees of the range vertex
    assert R.n == 4
    assert [sum(r) for r in R.rows] == [3, 1, 1, 3]


def test_path_word_counts(a3):
    assert [len(path_words(a3, k)) for k in (1, 2, 3)] == [6, 12, 24]


def test_path_words_order_and_brute_force(a3):
    for k in range(1, 5):
        brute = [w for w in itertools.product(range(6), repeat=k) if a3.is_linked(w)]
        assert list(path_words(a3, k)) == brute


def test_path_words_count_matches_adjacency_powers():
    rng = random.Random(5)
    for _ in range(10):
        E = build_edge_table(random_primitive(rng, rng.randint(1, 4)))
        adj = np.array(coupled_graph(E).adjacency, dtype=object)
        for k in range(2, 9):
            assert len(path_words(E, k)) == np.linalg.matrix_power(adj, k - 1).sum()


def test_path_words_needs_positive_depth(a3):
    with pytest.raises(ValueError):
        path_words(a3, 0)


def test_dot_round_trips_through_pydot(a3):
    text = to_dot(coupled_graph(a3))
    (graph,) = pydot.graph_from_dot_data(text)
    nodes = {n.get_name().strip('"'): n.get("label").strip('"') for n in graph.get_nodes()}
    assert nodes == {e.name: a3.entry_label(i) for i, e in enumerate(a3.edges)}
    arrows = {(d.get_source().strip('"'), d.get_destination().strip('"')) for d in graph.get_edges()}
    assert arrows == {tuple(a3.names(a)) for a in coupled_graph(a3).arrows}


def test_dot_is_deterministic_and_matches_golden(a3):
    golden = fixture_path("coupled_graph_3x3.dot").read_text()
    assert to_dot(coupled_graph(a3)) == golden
    assert to_dot(coupled_graph(table("a3.json"))) == golden
