"""Admissible edge bijections and the measure-compatibility tests they support.

A bijection alpha: E -> E' is admissible when (e, f) is linked exactly when
(alpha(e), alpha(f)) is linked, i.e. alpha is an isomorphism of coupled
graphs.  Applied letterwise it carries linked words to linked words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .diagram import EdgeTable, _table, path_words
from .errors import NotAdmissibleError
from .exact import exact_eq, is_exact
from .measure import (
    InvariantMeasure,
    MarkovSequence,
    ProductReport,
    StationaryMarkov,
    cylinder_measure,
    invariant_as_markov,
    product_test,
)

LAMBDA_RTOL = 1e-10


class AdmissibilityCheck(NamedTuple):
    ok: bool
    witness: tuple[int, int] | None
    """First pair (e, f) whose linked status differs from that of its image."""


def _linked(E: EdgeTable, e: int, f: int) -> bool:
    return E.range(e) == E.source(f)


def is_admissible(E, E2, images) -> AdmissibilityCheck:
    E, E2 = _table(E), _table(E2)
    images = tuple(images)
    if len(E) != len(E2) or len(images) != len(E):
        raise NotAdmissibleError(
            f"size mismatch: |E| = {len(E)}, |E'| = {len(E2)}, map has {len(images)} entries")
    if sorted(images) != list(range(len(E2))):
        raise NotAdmissibleError("map is not a bijection onto the target edges")
    for e in range(len(E)):
        for f in range(len(E)):
            if _linked(E, e, f) != _linked(E2, images[e], images[f]):
                return AdmissibilityCheck(False, (e, f))
    return AdmissibilityCheck(True, None)


@dataclass(frozen=True)
class AdmissibleMap:
    source: EdgeTable
    target: EdgeTable
    images: tuple[int, ...]

    def __post_init__(self):
        check = is_admissible(self.source, self.target, self.images)
        if not check.ok:
            e, f = check.witness
            raise NotAdmissibleError(
                f"not admissible: ({self.source.name(e)},{self.source.name(f)}) and its image "
                f"({self.target.name(self.images[e])},{self.target.name(self.images[f])}) "
                f"differ in being linked")

    def __call__(self, e: int) -> int:
        return self.images[e]

    def inverse(self) -> "AdmissibleMap":
        inv = [0] * len(self.images)
        for e, a in enumerate(self.images):
            inv[a] = e
        return AdmissibleMap(self.target, self.source, tuple(inv))

    def vertex_map(self) -> tuple[int, ...]:
        """Induced vertex bijection: an edge leaving v is sent to an edge leaving beta(v)."""
        beta = [None] * self.source.n_vertices
        for e, a in enumerate(self.images):
            beta[self.source.source(e)] = self.target.source(a)
        return tuple(beta)

    def to_json(self) -> dict:
        return {"map": {self.source.name(e): self.target.name(a) for e, a in enumerate(self.images)}}

    @classmethod
    def from_json(cls, data: dict, source: EdgeTable, target: EdgeTable) -> "AdmissibleMap":
        mapping = data["map"] if "map" in data else data
        if set(mapping) != set(source.names(range(len(source)))):
            raise NotAdmissibleError("map must list every source edge exactly once")
        if len(source) != len(target):
            raise NotAdmissibleError(f"size mismatch: |E| = {len(source)}, |E'| = {len(target)}")
        return cls(source, target, tuple(target.id(mapping[source.name(e)]) for e in range(len(source))))


def _signature(E: EdgeTable, e: int) -> tuple[int, int, bool]:
    # in/out degree of e in the coupled graph, and whether e is a loop there
    return len(E.in_edges(E.source(e))), len(E.out_edges(E.range(e))), E.source(e) == E.range(e)


def find_admissible(A, A2, first: bool = False) -> list[AdmissibleMap]:
    """All admissible maps, in lexicographic order of the image tuple.

    Backtracking over edge ids; a candidate image must share the coupled-graph
    signature (in-degree, out-degree, loop) and agree on links with every
    edge already placed.
    """
    E, E2 = _table(A), _table(A2)
    m = len(E)
    if m != len(E2):
        return []
    sig2 = [_signature(E2, a) for a in range(m)]
    candidates = [[a for a in range(m) if sig2[a] == _signature(E, e)] for e in range(m)]
    images = [-1] * m
    used = [False] * m
    found: list[tuple[int, ...]] = []

    def fits(e: int, a: int) -> bool:
        for f in range(e):
            b = images[f]
            if _linked(E, e, f) != _linked(E2, a, b) or _linked(E, f, e) != _linked(E2, b, a):
                return False
        return True

    def place(e: int) -> bool:
        if e == m:
            found.append(tuple(images))
            return first
        for a in candidates[e]:
            if not used[a] and fits(e, a):
                images[e], used[a] = a, True
                if place(e + 1):
                    return True
                used[a] = False
        images[e] = -1
        return False

    place(0)
    return [AdmissibleMap(E, E2, imgs) for imgs in found]


def path_map(alpha: AdmissibleMap, word) -> tuple[int, ...]:
    word = tuple(word)
    if not alpha.source.is_linked(word):
        raise ValueError(f"word {alpha.source.names(word)} is not linked")
    return tuple(alpha.images[e] for e in word)


def _same(a, b, rtol: float) -> bool:
    if is_exact(a) and is_exact(b):
        return exact_eq(a, b)
    return abs(float(a) - float(b)) <= rtol * max(abs(float(a)), abs(float(b)))


@dataclass(frozen=True)
class InvariantCompat:
    verdict: str
    """``equal`` when mu' o alpha = mu on every checked cylinder, else ``singular``."""
    lam: object
    lam_target: object
    max_defect: object
    witness: tuple | None


def invariant_compat(alpha: AdmissibleMap, k: int, tol: float = LAMBDA_RTOL) -> InvariantCompat:
    """Compare the invariant measures of both diagrams through alpha.

    Distinct Perron eigenvalues mean the ergodic invariant measures are
    singular; equal ones are followed by a direct cylinder comparison at
    depths 1..k rather than trusting that they must agree.
    """
    mu = InvariantMeasure.of(alpha.source)
    mu2 = InvariantMeasure.of(alpha.target)
    lam, lam2 = mu.perron.lam, mu2.perron.lam
    if not _same(lam, lam2, tol):
        return InvariantCompat("singular", lam, lam2, None, None)
    worst, witness = 0, None
    for depth in range(1, k + 1):
        for w in path_words(alpha.source, depth):
            d = abs(cylinder_measure(mu2, path_map(alpha, w)) - cylinder_measure(mu, w))
            if d > worst:
                worst, witness = d, w
    exact = mu.perron.exact and mu2.perron.exact
    ok = worst == 0 if exact else float(worst) <= tol
    return InvariantCompat("equal" if ok else "singular", lam, lam2, worst, None if ok else witness)


def _as_stationary(spec) -> StationaryMarkov:
    if isinstance(spec, InvariantMeasure):
        return invariant_as_markov(spec)
    if isinstance(spec, StationaryMarkov):
        return spec
    raise TypeError("stationary_compat needs stationary specs; use markov_compat for sequences")


def stationary_compat(m, m2, alpha: AdmissibleMap, tol: float = 1e-12) -> tuple[bool, int | None]:
    """alpha-invariance of transition probabilities: p'(alpha(e)) = p(e) for every edge."""
    P, P2 = _as_stationary(m).P, _as_stationary(m2).P
    E, E2 = alpha.source, alpha.target
    for e in range(len(E)):
        a = alpha(e)
        p, p2 = P[E.source(e)][e], P2[E2.source(a)][a]
        if is_exact(p) and is_exact(p2):
            same = exact_eq(p, p2)
        else:
            same = abs(float(p) - float(p2)) <= tol
        if not same:
            return False, e
    return True, None


def markov_compat(m, m2, alpha: AdmissibleMap, k: int) -> ProductReport:
    """Is m' o alpha equivalent to m?

    That happens iff prod_i p'_i(alpha(x_i)) / p_i(x_i) converges for almost
    every path x.  Both sequences are eventually periodic, so the factors
    repeat; a convergent product needs its factors to tend to 1, and a
    factor that is not 1 in the periodic tail recurs on almost every path.
    The verdict is therefore "equivalent" iff all tail factors equal 1.
    """
    s, s2 = MarkovSequence.lift(m), MarkovSequence.lift(m2)
    a0, ad = s.eventual_period()
    b0, bd = s2.eventual_period()
    start, period = max(a0, b0), ad * bd // math.gcd(ad, bd)
    return product_test(
        alpha.source,
        lambda i, e: s2.transition(i, alpha(e)) / s.transition(i, e),
        start, period, k, ok="equivalent", bad="singular")
