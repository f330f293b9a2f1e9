import itertools
import random
from fractions import Fraction

import pytest

from ckb import (
    AdmissibleMap,
    MarkovSequence,
    NotAdmissibleError,
    build_edge_table,
    find_admissible,
    invariant_compat,
    invariant_measure,
    is_admissible,
    markov_compat,
    path_words,
    stationary_compat,
)
from ckb.admissible import path_map

from conftest import alpha, example_p, random_primitive, spec, table


def brute_admissible(E, E2):
    """Every bijection of edge ids whose image preserves the linked relation."""
    m = len(E)
    linked = {(e, f) for e in range(m) for f in range(m) if E.range(e) == E.source(f)}
    linked2 = {(a, b) for a in range(m) for b in range(m) if E2.range(a) == E2.source(b)}
    if len(linked) != len(linked2):
        return []
    return [p for p in itertools.permutations(range(m))
            if all((p[e], p[f]) in linked2 for e, f in linked)]


def test_self_maps_3x3_match_brute_force(a3):
    found = [a.images for a in find_admissible(a3, a3)]
    assert found == brute_admissible(a3, a3)
    assert len(found) == 3
    assert tuple(range(6)) in found
    assert alpha("alpha_3x3.json", a3, a3).images in found


def test_self_maps_are_powers_of_alpha(a3):
    al = alpha("alpha_3x3.json", a3, a3)
    sq = tuple(al(al(e)) for e in range(6))
    assert {a.images for a in find_admissible(a3, a3)} == {tuple(range(6)), al.images, sq}
    assert tuple(al(sq[e]) for e in range(6)) == tuple(range(6))


def test_4x4_pair_matches_brute_force(b4, b4p):
    found = [a.images for a in find_admissible(b4, b4p)]
    assert found == brute_admissible(b4, b4p)
    assert found == [alpha("alpha_4x4.json", b4, b4p).images]


def test_find_first(a3):
    (only,) = find_admissible(a3, a3, first=True)
    assert only.images == tuple(range(6))


def test_different_sizes_give_nothing(a1, a3):
    assert find_admissible(a1, a3) == []


def test_swap_is_not_admissible(a3):
    images = list(range(6))
    images[0], images[1] = 1, 0     # exchange e1 and e2
    check = is_admissible(a3, a3, images)
    # (e1, e1) is linked, (e2, e2) is not
    assert not check.ok and check.witness == (0, 0)
    with pytest.raises(NotAdmissibleError):
        AdmissibleMap(a3, a3, tuple(images))


def test_size_and_bijection_errors(a1, a3):
    with pytest.raises(NotAdmissibleError):
        is_admissible(a1, a3, [0])
    with pytest.raises(NotAdmissibleError):
        is_admissible(a3, a3, [0, 0, 1, 2, 3, 4])


def test_inverse_is_admissible_and_inverts(b4, b4p):
    al = alpha("alpha_4x4.json", b4, b4p)
    inv = al.inverse()
    assert is_admissible(b4p, b4, inv.images).ok
    assert all(inv(al(e)) == e for e in range(8))
    assert inv.inverse() == al


def test_vertex_map(a3, b4, b4p):
    assert alpha("alpha_3x3.json", a3, a3).vertex_map() == (1, 2, 0)
    # a linked pair is mapped to a linked pair, so ranges follow the same vertex map
    al = alpha("alpha_4x4.json", b4, b4p)
    beta = al.vertex_map()
    assert all(b4p.range(al(e)) == beta[b4.range(e)] for e in range(8))


def test_json_roundtrip(b4, b4p):
    al = alpha("alpha_4x4.json", b4, b4p)
    assert AdmissibleMap.from_json(al.to_json(), b4, b4p) == al
    assert al.to_json()["map"]["e6"] == "e'8"


def test_path_map_preserves_links_and_is_bijective(a3):
    al = alpha("alpha_3x3.json", a3, a3)
    for k in range(1, 6):
        words = path_words(a3, k)
        images = [path_map(al, w) for w in words]
        assert all(a3.is_linked(x) for x in images)
        assert sorted(images) == sorted(words)


def test_path_map_commutes_with_shift(a3):
    al = alpha("alpha_3x3.json", a3, a3)
    for w in path_words(a3, 4):
        assert path_map(al, w)[1:] == path_map(al, w[1:])


def test_path_map_rejects_unlinked_word(a3):
    with pytest.raises(ValueError):
        path_map(alpha("alpha_3x3.json", a3, a3), a3.ids("e1", "e3"))


def test_invariant_compat(a3, b4, b4p):
    r = invariant_compat(alpha("alpha_3x3.json", a3, a3), 5)
    assert r.verdict == "equal" and r.max_defect == 0
    r4 = invariant_compat(alpha("alpha_4x4.json", b4, b4p), 4)
    # isomorphic coupled graphs share the Perron eigenvalue
    assert abs(r4.lam - r4.lam_target) < 1e-10


def test_stationary_compat_example_p(a3):
    al = alpha("alpha_3x3.json", a3, a3)
    m = example_p(a3, Fraction(2, 7))
    assert stationary_compat(m, m, al) == (True, None)
    assert stationary_compat(invariant_measure(a3), invariant_measure(a3), al) == (True, None)


def test_stationary_compat_perturbed(a3):
    al = alpha("alpha_3x3.json", a3, a3)
    m, bad = spec("measure_example_p.json", a3), spec("measure_example_p_perturbed.json", a3)
    ok, witness = stationary_compat(m, bad, al)
    # e5 and e6 are carried onto row 1, where the perturbation sits
    assert not ok and a3.name(witness) == "e5"


def test_relabelled_copy_separates_p_and_q(a3):
    A2 = table("a3_relabelled.json")
    p = Fraction(1, 4)
    m = example_p(a3, p)
    # same numbers on the relabelled row-major edges: e'6 carries p, e'5 carries q
    m2 = example_p(A2, p)
    maps = find_admissible(a3, A2)
    assert maps
    for al in maps:
        ok, witness = stationary_compat(m, m2, al)
        assert not ok and witness is not None
        P, P2 = m.P, m2.P
        assert P[a3.source(witness)][witness] != P2[A2.source(al(witness))][al(witness)]
    # with p = q the same maps pass
    half = Fraction(1, 2)
    assert all(stationary_compat(example_p(a3, half), example_p(A2, half), al)[0] for al in maps)


def test_markov_compat_reduces_to_stationary(a3):
    al = alpha("alpha_3x3.json", a3, a3)
    m = spec("measure_example_p.json", a3)
    assert markov_compat(m, m, al, 5).verdict == "equivalent"
    bad = spec("measure_example_p_perturbed.json", a3)
    assert markov_compat(m, bad, al, 5).verdict == "singular"


def test_markov_compat_sequences(a3):
    ident = find_admissible(a3, a3, first=True)[0]
    quasi, stat = spec("measure_quasi.json", a3), spec("measure_example_p.json", a3)
    assert markov_compat(quasi, stat, ident, 7).verdict == "equivalent"
    alt = spec("measure_alternating.json", a3)
    rep = markov_compat(alt, stat, ident, 6)
    assert rep.verdict == "singular" and rep.period == 2


def test_markov_compat_lifted_sequence_equals_stationary(a3):
    al = alpha("alpha_3x3.json", a3, a3)
    m = example_p(a3, Fraction(3, 5))
    lifted = MarkovSequence.lift(m)
    assert markov_compat(lifted, m, al, 4).verdict == "equivalent"


def test_random_permutation_admissibility_is_symmetric():
    rng = random.Random(21)
    for _ in range(30):
        E = build_edge_table(random_primitive(rng, rng.randint(1, 4)))
        images = list(range(len(E)))
        rng.shuffle(images)
        inv = [0] * len(images)
        for e, a in enumerate(images):
            inv[a] = e
        assert is_admissible(E, E, images).ok == is_admissible(E, E, inv).ok
