"""Prepend-type semibranching function systems on cylinder words.

Two systems live on one diagram.  The edge system acts on linked edge words
(index set E): ``D_e = {w : s(w_1) = r(e)}``, ``R_e = {w : w_1 = e}`` and
``sigma_e`` prepends ``e``.  The vertex system acts on admissible vertex words
of the Markov shift X_A (index set V): ``D_i = {x : a[i][x_1] = 1}``,
``R_i = {x : x_1 = i}`` and ``sigma_i`` prepends ``i``.  Both code back by
dropping the first letter.

Every set involved is a finite union of depth-1 or depth-2 cylinders, so a
set identity that holds on all words of a fixed depth >= 2 holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .diagram import EdgeTable, _table, path_words
from .errors import CKDecompositionError, NotInDomainError, NotLinkedError, NotSaturatedError
from .measure import Vertex

Word = tuple


@dataclass(frozen=True)
class SemibranchingSystem:
    """Finite description of a prepend-type system.

    ``domain(i, w)`` and ``range(i, w)`` are membership tests for words of
    ``space(k)``; ``branch(i, w)`` is the partial injection ``sigma_i``.
    Fields are plain callables so a test can swap one out with
    :func:`dataclasses.replace` to build a deliberately broken system.
    """

    table: EdgeTable
    kind: str
    labels: tuple
    space: Callable[[int], tuple]
    domain: Callable[[int, Word], bool]
    range: Callable[[int, Word], bool]
    prepend: Callable[[int, Word], Word]

    @property
    def size(self) -> int:
        return len(self.labels)

    def branch(self, i: int, w: Word) -> Word:
        if not self.domain(i, w):
            raise NotInDomainError(f"{self._show(w)} is not in the domain of sigma_{self.labels[i]}")
        return self.prepend(i, w)

    @staticmethod
    def coding(w: Word) -> Word:
        return tuple(w[1:])

    def _show(self, w: Word) -> str:
        if self.kind == "edge":
            return "(" + ",".join(self.table.names(w)) + ")"
        return "(" + ",".join(str(v + 1) for v in w) + ")"

    def show(self, w: Word) -> list:
        """JSON-friendly display form of a word (edge names or 1-based vertices)."""
        if self.kind == "edge":
            return list(self.table.names(w))
        return [v + 1 for v in w]


def edge_sfs(A) -> SemibranchingSystem:
    E = _table(A)
    return SemibranchingSystem(
        table=E,
        kind="edge",
        labels=E.names(range(len(E))),
        space=lambda k: path_words(E, k),
        domain=lambda e, w: E.source(w[0]) == E.range(e),
        range=lambda e, w: w[0] == e,
        prepend=lambda e, w: (e,) + tuple(w),
    )


@lru_cache(maxsize=None)
def _vertex_words(E: EdgeTable, length: int) -> tuple:
    if length < 1:
        raise ValueError("vertex words have length >= 1")
    if length == 1:
        return tuple((v,) for v in range(E.n_vertices))
    return tuple(sorted(edge_to_vertex(E, w) for w in path_words(E, length - 1)))


def vertex_words(A, length: int) -> tuple:
    """Admissible vertex words (x_1..x_L), a[x_j][x_{j+1}] = 1, in lexicographic order."""
    return _vertex_words(_table(A), length)


def vertex_sfs(A) -> SemibranchingSystem:
    E = _table(A)
    M = E.matrix
    return SemibranchingSystem(
        table=E,
        kind="vertex",
        labels=tuple(str(v + 1) for v in range(E.n_vertices)),
        space=lambda k: vertex_words(E, k),
        domain=lambda i, x: M[i, x[0]] == 1,
        range=lambda i, x: x[0] == i,
        prepend=lambda i, x: (i,) + tuple(x),
    )


def edge_to_vertex(E: EdgeTable, word) -> tuple:
    """Edge word of depth k -> vertex word of length k+1 (depth 0 is a Vertex)."""
    if isinstance(word, Vertex):
        return (word.index,)
    word = tuple(word)
    if not word:
        raise ValueError("empty edge word; use Vertex(v) for depth 0")
    for a, b in zip(word, word[1:]):
        if E.range(a) != E.source(b):
            raise NotLinkedError(f"edge word {E.names(word)} is not linked")
    return (E.source(word[0]),) + tuple(E.range(e) for e in word)


def vertex_to_edge(E: EdgeTable, word) -> tuple | Vertex:
    word = tuple(word)
    if not word:
        raise ValueError("empty vertex word")
    if len(word) == 1:
        return Vertex(word[0])
    out = []
    for i, j in zip(word, word[1:]):
        e = E.edge_between(i, j)
        if e is None:
            raise NotLinkedError(
                f"vertex word {tuple(v + 1 for v in word)} is not admissible: a_{{{i + 1},{j + 1}}} = 0")
        out.append(e)
    return tuple(out)


def word_translate(A, direction: str, word):
    """Translate between X_A vertex words and X_B edge words (``"vertex->edge"`` or ``"edge->vertex"``)."""
    E = _table(A)
    if direction == "vertex->edge":
        return vertex_to_edge(E, word)
    if direction == "edge->vertex":
        return edge_to_vertex(E, word)
    raise ValueError(f"unknown direction {direction!r}")


def saturation_check(s: SemibranchingSystem, k: int):
    """First depth-k word outside every domain, or None if the domains cover the space."""
    for w in s.space(k):
        if not any(s.domain(i, w) for i in range(s.size)):
            return w
    return None


def range_partition_check(s: SemibranchingSystem, k: int):
    """First depth-k word lying in zero or in several ranges, or None."""
    for w in s.space(k):
        if sum(1 for i in range(s.size) if s.range(i, w)) != 1:
            return w
    return None


def ck_condition(s: SemibranchingSystem, depth: int = 2) -> tuple:
    """0-1 matrix c with c[i][j] = 1 iff R_j is one of the ranges tiling D_i.

    Raises :class:`NotSaturatedError` when some word lies in no domain, and
    :class:`CKDecompositionError` when a domain is not a union of ranges.
    """
    words = s.space(depth)
    hole = saturation_check(s, depth)
    if hole is not None:
        raise NotSaturatedError(f"not saturated: {s._show(hole)} lies in no domain", hole)
    range_of = {}
    for w in words:
        owners = [j for j in range(s.size) if s.range(j, w)]
        if len(owners) != 1:
            raise CKDecompositionError(
                f"ranges do not partition the space at {s._show(w)} (owners {owners})", w)
        range_of[w] = owners[0]
    rows = []
    for i in range(s.size):
        inside = {w for w in words if s.domain(i, w)}
        row = [0] * s.size
        for j in range(s.size):
            members = [w for w in words if range_of[w] == j]
            if members and all(w in inside for w in members):
                row[j] = 1
        covered = {w for w in words if row[range_of[w]]}
        stray = sorted(inside - covered)
        if stray:
            raise CKDecompositionError(
                f"D_{s.labels[i]} is not a union of ranges: {s._show(stray[0])} lies in it "
                f"but its range R_{s.labels[range_of[stray[0]]]} is only partly inside", stray[0])
        rows.append(tuple(row))
    return tuple(rows)


@dataclass(frozen=True)
class RefinementFailure:
    condition: str
    index: str
    word: tuple


def refinement_check(edge: SemibranchingSystem, vertex: SemibranchingSystem, k: int):
    """Check that the edge system refines the vertex system on depth-k edge words.

    Under translation of words: R_i is the union of R_e over s(e) = i, D_i is
    the union of D_e over s(e) = i, sigma_i agrees with sigma_e on D_e when
    s(e) = i, and the coding maps agree.  Returns None or the first failure.
    """
    E = edge.table
    if vertex.table.matrix != E.matrix:
        raise ValueError("the two systems come from different matrices")
    for w in edge.space(k):
        x = edge_to_vertex(E, w)
        for i in range(vertex.size):
            out = E.out_edges(i)
            if vertex.range(i, x) != any(edge.range(e, w) for e in out):
                return RefinementFailure("range", vertex.labels[i], w)
            if vertex.domain(i, x) != any(edge.domain(e, w) for e in out):
                return RefinementFailure("domain", vertex.labels[i], w)
            for e in out:
                if edge.domain(e, w) and edge_to_vertex(E, edge.branch(e, w)) != vertex.branch(i, x):
                    return RefinementFailure("branch", edge.labels[e], w)
        if k >= 2 and edge_to_vertex(E, edge.coding(w)) != vertex.coding(x):
            return RefinementFailure("coding", "sigma", w)
    return None


def sfs_report(s: SemibranchingSystem, depth: int = 2) -> dict:
    hole = saturation_check(s, depth)
    if hole is not None:
        return {"saturated": False, "ck_matrix": None, "witness": s.show(hole)}
    try:
        matrix = ck_condition(s, depth)
    except CKDecompositionError as exc:
        return {"saturated": True, "ck_matrix": None, "witness": s.show(exc.witness)}
    return {"saturated": True, "ck_matrix": [list(r) for r in matrix], "witness": None}
