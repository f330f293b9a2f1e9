import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from ckb import (
    build_edge_table,
    ck_condition,
    coupled_graph,
    cylinder_measure,
    edge_sfs,
    find_admissible,
    invariant_as_markov,
    invariant_measure,
    is_admissible,
    level_consistency,
    path_words,
    refinement_check,
    stationary_compat,
    validate_spec,
    vertex_sfs,
)
from ckb.representation import ck_verify_edge, ck_verify_vertex, monic_from_measure, monic_operators

from conftest import example_p, random_markov, random_primitive, table

seeds = st.integers(min_value=0, max_value=2**32 - 1)
sizes = st.integers(min_value=1, max_value=4)
A3 = table("a3.json")


def diagram(seed, n):
    return build_edge_table(random_primitive(random.Random(seed), n))


@settings(max_examples=40, deadline=None)
@given(seeds, sizes, st.integers(min_value=1, max_value=3))
def test_ck_residual_vanishes_for_random_markov(seed, n, k):
    E = diagram(seed, n)
    m = random_markov(random.Random(seed + 1), E)
    assert ck_verify_edge(E, m, k).residual == 0
    assert ck_verify_vertex(E, m, k).residual == 0


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=5))
def test_ck_matrices_match_structure(seed, n):
    E = diagram(seed, n)
    assert ck_condition(edge_sfs(E)) == coupled_graph(E).adjacency
    assert ck_condition(vertex_sfs(E)) == E.matrix.rows


@settings(max_examples=40, deadline=None)
@given(seeds, sizes, st.integers(min_value=1, max_value=4))
def test_refinement_holds(seed, n, k):
    E = diagram(seed, n)
    assert refinement_check(edge_sfs(E), vertex_sfs(E), k) is None


@settings(max_examples=30, deadline=None)
@given(seeds, sizes)
def test_found_maps_and_inverses_are_admissible(seed, n):
    E = diagram(seed, n)
    maps = find_admissible(E, E)
    assert any(a.images == tuple(range(len(E))) for a in maps)
    for a in maps:
        assert is_admissible(E, E, a.inverse().images).ok


@settings(max_examples=40, deadline=None)
@given(seeds, sizes)
def test_markov_measures_normalised_and_consistent(seed, n):
    E = diagram(seed, n)
    m = random_markov(random.Random(seed), E)
    assert validate_spec(m) is None
    for k in range(1, 4):
        assert sum(cylinder_measure(m, w) for w in path_words(E, k)) == 1
        assert level_consistency(m, k) == 0


@settings(max_examples=30, deadline=None)
@given(seeds, sizes)
def test_invariant_as_markov_telescopes(seed, n):
    E = diagram(seed, n)
    mu = invariant_measure(E)
    m = invariant_as_markov(mu)
    for w in path_words(E, 3):
        a, b = cylinder_measure(m, w), cylinder_measure(mu, w)
        if mu.perron.exact:
            assert a == b
        else:
            assert abs(a - b) <= 1e-10 * b


@settings(max_examples=25, deadline=None)
@given(st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100), max_denominator=100))
def test_example_p_is_rotation_invariant(p):
    alpha = [a for a in find_admissible(A3, A3) if a.images != tuple(range(6))]
    m = example_p(A3, p)
    for al in alpha:
        assert stationary_compat(m, m, al) == (True, None)


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=3))
def test_monic_for_random_markov(seed, n):
    E = diagram(seed, n)
    ms = monic_from_measure(E, random_markov(random.Random(seed), E))
    rep = monic_operators(ms, 2)
    assert rep.verdict == "monic" and rep.coefficients_exact
