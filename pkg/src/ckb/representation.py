"""Finite-level matrices for the Cuntz-Krieger operators of a measure.

H_k is the span of the normalised cylinder indicators ``b_w = chi_w / sqrt(m(w))``
over the depth-k words w.  The operators act between consecutive levels:
``T_e : H_k -> H_{k+1}`` sends ``b_w`` to ``b_{e.w}`` (the Radon-Nikodym
weight cancels the normalisation, so the coefficient is 1), and every
relation then becomes an exact identity between finite sparse matrices.

Vertex-word spaces on the Markov shift X_A are indexed by word length; the
empty word spans the constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .admissible import AdmissibleMap, invariant_compat, markov_compat, stationary_compat
from .diagram import EdgeTable, _table
from .errors import InvalidMeasureError
from .exact import exact_eq, format_number, is_exact, nullspace, sqrt
from .measure import (
    InvariantMeasure,
    StationaryMarkov,
    Vertex,
    cylinder_measure,
    words_at,
)
from .sfs import vertex_to_edge, vertex_words

FLOAT_TOL = 1e-10


class LevelSpace:
    """Ordered orthonormal cylinder basis at one level.

    ``kind`` is ``"edge"`` (level = depth of edge words, depth 0 = vertices)
    or ``"vertex"`` (level = length of vertex words, length 0 = empty word).
    """

    def __init__(self, table: EdgeTable, spec, level: int, kind: str = "edge"):
        if level < 0:
            raise ValueError("levels start at 0")
        self.table, self.spec, self.level, self.kind = table, spec, level, kind
        if kind == "edge":
            self.words = words_at(table, level)
            masses = [cylinder_measure(spec, w) for w in self.words]
        elif kind == "vertex":
            self.words = ((),) if level == 0 else vertex_words(table, level)
            masses = [Fraction(1) if not w else cylinder_measure(spec, vertex_to_edge(table, w))
                      for w in self.words]
        else:
            raise ValueError(f"unknown space kind {kind!r}")
        for w, m in zip(self.words, masses):
            if not m > 0:
                raise InvalidMeasureError(f"cylinder {self.show(w)} has measure {m}; full support is required")
        self.masses = tuple(masses)
        self.index = {w: i for i, w in enumerate(self.words)}
        self._key = (kind, level, table, spec)

    @property
    def dim(self) -> int:
        return len(self.words)

    @property
    def weights(self) -> tuple:
        return tuple(sqrt(m) for m in self.masses)

    def mass(self, w):
        return self.masses[self.index[w]]

    def show(self, w) -> str:
        if isinstance(w, Vertex):
            return f"v{w.index + 1}"
        if self.kind == "edge":
            return "(" + ",".join(self.table.names(w)) + ")"
        return "(" + ",".join(str(v + 1) for v in w) + ")"

    def __eq__(self, other):
        return isinstance(other, LevelSpace) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"LevelSpace({self.kind}, level={self.level}, dim={self.dim})"


@lru_cache(maxsize=512)
def level_space(table: EdgeTable, spec, k: int, kind: str = "edge") -> LevelSpace:
    return LevelSpace(table, spec, k, kind)


def _zero(a) -> bool:
    return exact_eq(a, 0) if is_exact(a) else abs(a) <= FLOAT_TOL


class LevelOperator:
    """Sparse matrix from ``source`` to ``target``: ``rows[i][j]`` is the b_i component of the image of b_j."""

    __slots__ = ("source", "target", "rows")

    def __init__(self, source: LevelSpace, target: LevelSpace, rows: dict | None = None):
        self.source, self.target = source, target
        self.rows: dict[int, dict[int, object]] = rows if rows is not None else {}

    @classmethod
    def identity(cls, space: LevelSpace) -> "LevelOperator":
        return cls(space, space, {i: {i: Fraction(1)} for i in range(space.dim)})

    @classmethod
    def diagonal(cls, space: LevelSpace, keep: Callable) -> "LevelOperator":
        return cls(space, space, {i: {i: Fraction(1)} for i, w in enumerate(space.words) if keep(w)})

    def set(self, i: int, j: int, value) -> None:
        self.rows.setdefault(i, {})[j] = value

    def entry(self, i: int, j: int):
        return self.rows.get(i, {}).get(j, Fraction(0))

    def entries(self):
        """Nonzero-pattern triplets (row, col, value), sorted."""
        for i in sorted(self.rows):
            for j in sorted(self.rows[i]):
                yield i, j, self.rows[i][j]

    def __matmul__(self, other: "LevelOperator") -> "LevelOperator":
        if other.target != self.source:
            raise ValueError(f"cannot compose {self!r} after {other!r}")
        out: dict[int, dict[int, object]] = {}
        for i, row in self.rows.items():
            acc: dict[int, object] = {}
            for k, a in row.items():
                for j, b in other.rows.get(k, {}).items():
                    acc[j] = acc[j] + a * b if j in acc else a * b
            if acc:
                out[i] = acc
        return LevelOperator(other.source, self.target, out)

    def adjoint(self) -> "LevelOperator":
        out: dict[int, dict[int, object]] = {}
        for i, row in self.rows.items():
            for j, v in row.items():
                out.setdefault(j, {})[i] = v
        return LevelOperator(self.target, self.source, out)

    def _combine(self, other: "LevelOperator", sign: int) -> "LevelOperator":
        if other.source != self.source or other.target != self.target:
            raise ValueError("operators act between different spaces")
        out = {i: dict(row) for i, row in self.rows.items()}
        for i, row in other.rows.items():
            tgt = out.setdefault(i, {})
            for j, v in row.items():
                tgt[j] = tgt[j] + sign * v if j in tgt else sign * v
        return LevelOperator(self.source, self.target, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def max_abs(self):
        best = Fraction(0)
        for row in self.rows.values():
            for v in row.values():
                if abs(v) > best:
                    best = abs(v)
        return best

    def is_zero(self) -> bool:
        return all(_zero(v) for row in self.rows.values() for v in row.values())

    def is_diagonal_01(self) -> bool:
        """Diagonal with every entry 0 or 1, i.e. a coordinate projection."""
        for i, row in self.rows.items():
            for j, v in row.items():
                if i != j and not _zero(v):
                    return False
                if i == j and not (_zero(v) or _zero(v - 1)):
                    return False
        return True

    def diagonal_support(self) -> frozenset:
        return frozenset(self.source.words[i] for i, row in self.rows.items()
                         if i in row and not _zero(row[i]))

    def to_dense(self) -> list[list]:
        out = [[Fraction(0)] * self.source.dim for _ in range(self.target.dim)]
        for i, j, v in self.entries():
            out[i][j] = v
        return out

    def to_json(self) -> dict:
        tgt, src = self.target, self.source
        return {
            "rows": [tgt.show(w) for w in tgt.words],
            "cols": [src.show(w) for w in src.words],
            "entries": [[i, j, format_number(v)] for i, j, v in self.entries() if not _zero(v)],
        }

    def __repr__(self):
        return f"LevelOperator({self.source!r} -> {self.target!r}, nnz={sum(map(len, self.rows.values()))})"


def _residual(op: LevelOperator):
    return op.max_abs()


def _prepend(E: EdgeTable, e: int, w):
    """e.w when w lies in the domain of sigma_e, else None."""
    if isinstance(w, Vertex):
        return (e,) if E.range(e) == w.index else None
    return (e,) + w if E.source(w[0]) == E.range(e) else None


def edge_operator(table, spec, e: int, k: int) -> tuple[LevelOperator, LevelOperator]:
    """T_e : H_k -> H_{k+1} and its adjoint."""
    E = _table(table)
    src, tgt = level_space(E, spec, k), level_space(E, spec, k + 1)
    T = LevelOperator(src, tgt)
    for j, w in enumerate(src.words):
        ew = _prepend(E, e, w)
        if ew is not None:
            T.set(tgt.index[ew], j, Fraction(1))
    return T, T.adjoint()


def vertex_operator(table, spec, i: int, k: int) -> LevelOperator:
    """T_i = sum of T_e over the edges leaving vertex i, H_k -> H_{k+1}."""
    E = _table(table)
    ops = [edge_operator(E, spec, e, k)[0] for e in E.out_edges(i)]
    total = ops[0]
    for op in ops[1:]:
        total = total + op
    return total


@dataclass(frozen=True)
class CKResidual:
    """Largest entry of the two Cuntz-Krieger defects at one depth."""

    residual: object
    range_sum: object
    """max |sum_i T_i T_i^* - 1| on H_{k+1}."""
    domain: object
    """max |T_i^* T_i - sum_j a_ij T_j T_j^*| on H_k, over i."""


def _ck_check(family_k, family_prev, matrix, space_next) -> CKResidual:
    total = None
    for T, Ts in family_k:
        P = T @ Ts
        total = P if total is None else total + P
    range_sum = _residual(total - LevelOperator.identity(space_next))
    domain = Fraction(0)
    for i, (T, Ts) in enumerate(family_k):
        rhs = None
        for j, (S, Ss) in enumerate(family_prev):
            if matrix[i][j]:
                P = S @ Ss
                rhs = P if rhs is None else rhs + P
        lhs = Ts @ T
        d = _residual(lhs - rhs) if rhs is not None else _residual(lhs)
        if d > domain:
            domain = d
    return CKResidual(max(range_sum, domain), range_sum, domain)


def ck_verify_edge(table, spec, k: int) -> CKResidual:
    """Relations for the edge operators with the coupled-graph matrix, on H_{k-1}, H_k, H_{k+1}."""
    if k < 1:
        raise ValueError("depth must be >= 1")
    E = _table(table)
    adj = [[1 if E.range(e) == E.source(f) else 0 for f in range(len(E))] for e in range(len(E))]
    fam = [edge_operator(E, spec, e, k) for e in range(len(E))]
    prev = [edge_operator(E, spec, e, k - 1) for e in range(len(E))]
    return _ck_check(fam, prev, adj, level_space(E, spec, k + 1))


def ck_verify_vertex(table, spec, k: int) -> CKResidual:
    """Relations for T_i = sum_{s(e)=i} T_e with the matrix A itself."""
    if k < 1:
        raise ValueError("depth must be >= 1")
    E = _table(table)
    n = E.n_vertices

    def family(level):
        out = []
        for i in range(n):
            T = vertex_operator(E, spec, i, level)
            out.append((T, T.adjoint()))
        return out

    return _ck_check(family(k), family(k - 1), E.matrix.rows, level_space(E, spec, k + 1))


def cross_terms_vanish(table, spec, k: int):
    """max entry of T_e T_f^* over distinct edges e, f with the same source (should be 0)."""
    E = _table(table)
    worst = Fraction(0)
    for v in range(E.n_vertices):
        out = E.out_edges(v)
        for e in out:
            Te, _ = edge_operator(E, spec, e, k)
            for f in out:
                if f != e:
                    _, Tf_star = edge_operator(E, spec, f, k)
                    worst = max(worst, _residual(Te @ Tf_star))
    return worst


def _children(E: EdgeTable, w):
    end = w.index if isinstance(w, Vertex) else E.range(w[-1])
    for f in E.out_edges(end):
        yield f, ((f,) if isinstance(w, Vertex) else w + (f,))


def inclusion(table, spec, k: int) -> LevelOperator:
    """Isometric embedding H_k -> H_{k+1}: b_w = sum_f sqrt(m(w f) / m(w)) b_{w f}."""
    E = _table(table)
    src, tgt = level_space(E, spec, k), level_space(E, spec, k + 1)
    I = LevelOperator(src, tgt)
    for j, w in enumerate(src.words):
        for _, wf in _children(E, w):
            I.set(tgt.index[wf], j, sqrt(tgt.mass(wf) / src.masses[j]))
    return I


def operator_consistency(table, spec, e: int, k: int) -> LevelOperator:
    """T_e I_k - I_{k+1} T_e on H_k -> H_{k+2}; zero iff conditionals do not depend on the prefix e."""
    E = _table(table)
    T_k, _ = edge_operator(E, spec, e, k)
    T_k1, _ = edge_operator(E, spec, e, k + 1)
    return T_k1 @ inclusion(E, spec, k) - inclusion(E, spec, k + 1) @ T_k


def consistency_closed_form(table, spec, e: int, k: int) -> dict:
    """Entries of :func:`operator_consistency` from the formula sqrt(m(wf)/m(w)) - sqrt(m(ewf)/m(ew))."""
    E = _table(table)
    out = {}
    for w in words_at(E, k):
        ew = _prepend(E, e, w)
        if ew is None:
            continue
        for _, wf in _children(E, w):
            ewf = _prepend(E, e, wf)
            out[(ewf, w)] = (sqrt(cylinder_measure(spec, wf) / cylinder_measure(spec, w))
                             - sqrt(cylinder_measure(spec, ewf) / cylinder_measure(spec, ew)))
    return out


@dataclass(frozen=True)
class IntertwinerReport:
    U: LevelOperator
    unitary: bool
    intertwines: bool
    intertwine_witness: int | None
    """First edge e with U T'_{alpha(e)} != T_e U."""
    inclusion_commutes: bool
    inclusion_witness: tuple | None
    """A depth-k word w' where U I'_k and I_k U differ."""
    predicate: str
    predicate_holds: bool
    predicate_witness: object

    @property
    def agrees(self) -> bool:
        return self.inclusion_commutes == self.predicate_holds

    @property
    def ok(self) -> bool:
        return self.unitary and self.intertwines and self.inclusion_commutes


def _unitary_at(alpha: AdmissibleMap, spec, spec2, k: int) -> LevelOperator:
    E, E2 = alpha.source, alpha.target
    src, tgt = level_space(E2, spec2, k), level_space(E, spec, k)
    inv = alpha.inverse()
    U = LevelOperator(src, tgt)
    for j, w in enumerate(src.words):
        if isinstance(w, Vertex):
            raise ValueError("the intertwiner is built at depth >= 1")
        U.set(tgt.index[tuple(inv(a) for a in w)], j, Fraction(1))
    return U


def _compat_predicate(alpha, spec, spec2, k):
    stationary = (InvariantMeasure, StationaryMarkov)
    if isinstance(spec, InvariantMeasure) and isinstance(spec2, InvariantMeasure):
        res = invariant_compat(alpha, k)
        return "invariant", res.verdict == "equal", res.witness
    if isinstance(spec, stationary) and isinstance(spec2, stationary):
        ok, e = stationary_compat(spec, spec2, alpha)
        return "stationary", ok, e
    res = markov_compat(spec, spec2, alpha, k)
    return "markov", res.verdict == "equivalent", res.witness


def intertwiner(alpha: AdmissibleMap, spec, spec2, k: int) -> IntertwinerReport:
    """U : H'_k -> H_k, b'_{w'} -> b_{alpha^{-1}(w')}, and the three checks on it.

    (1) U is unitary; (2) U T'_{alpha(e)} = T_e U for every edge; (3) U
    commutes with the level inclusions, compared against the measure
    compatibility predicate that applies to the two specs.
    """
    if k < 1:
        raise ValueError("depth must be >= 1")
    E, E2 = alpha.source, alpha.target
    U, U1 = _unitary_at(alpha, spec, spec2, k), _unitary_at(alpha, spec, spec2, k + 1)
    unitary = ((U.adjoint() @ U) - LevelOperator.identity(U.source)).is_zero() and \
              ((U @ U.adjoint()) - LevelOperator.identity(U.target)).is_zero()

    witness = None
    for e in range(len(E)):
        T, _ = edge_operator(E, spec, e, k)
        T2, _ = edge_operator(E2, spec2, alpha(e), k)
        if not (U1 @ T2 - T @ U).is_zero():
            witness = e
            break

    D = U1 @ inclusion(E2, spec2, k) - inclusion(E, spec, k) @ U
    bad_cols = sorted(j for row in D.rows.values() for j, v in row.items() if not _zero(v))
    inc_witness = U.source.words[bad_cols[0]] if bad_cols else None

    name, holds, pwit = _compat_predicate(alpha, spec, spec2, k)
    return IntertwinerReport(U, unitary, witness is None, witness, not bad_cols, inc_witness,
                             name, holds, pwit)


# ---------------------------------------------------------------- monic systems

@dataclass(frozen=True)
class MonicSystem:
    """Inherent monic system of a measure on X_A.

    ``f(i, C)`` is the value of f_i on the vertex cylinder C, namely
    sqrt(m(sigma C) / m(C)) on R_i and 0 elsewhere; ``g = f / |f|^2``.
    """

    table: EdgeTable
    spec: object
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def mass(self, word) -> object:
        word = tuple(word)
        if not word:
            return Fraction(1)
        return cylinder_measure(self.spec, vertex_to_edge(self.table, word))

    def domain_mass(self, i: int):
        """m(D_i): mass of the vertex words that may follow i."""
        row = self.table.matrix.rows[i]
        return sum((self.mass((j,)) for j in range(len(row)) if row[j]), Fraction(0))

    def f(self, i: int, C) -> object:
        C = tuple(C)
        if not C or C[0] != i:
            return Fraction(0)
        key = ("f", C)
        if key not in self._cache:
            image = self.domain_mass(i) if len(C) == 1 else self.mass(C[1:])
            self._cache[key] = sqrt(image / self.mass(C))
        return self._cache[key]

    def g(self, i: int, C) -> object:
        v = self.f(i, C)
        return v / (v * v) if not _zero(v) else Fraction(0)


def monic_from_measure(table, spec) -> MonicSystem:
    return MonicSystem(_table(table), spec)


def monic_shift(ms: MonicSystem, i: int, length: int) -> LevelOperator:
    """T_i between vertex-word spaces of the given length and the next.

    On words of length >= 1 the coefficient is f_i(i x) sqrt(m(i x) / m(x)),
    which the defining identity of f makes exactly 1.  On the constants the
    same coefficient 1 is adopted as the finite-level definition.
    """
    E, spec = ms.table, ms.spec
    src, tgt = level_space(E, spec, length, "vertex"), level_space(E, spec, length + 1, "vertex")
    T = LevelOperator(src, tgt)
    for j, x in enumerate(src.words):
        if x and not E.matrix[i, x[0]]:
            continue
        ix = (i,) + x
        if x:
            coeff = ms.f(i, ix) * sqrt(tgt.mass(ix)) / sqrt(src.masses[j])
        else:
            coeff = Fraction(1)
        T.set(tgt.index[ix], j, coeff)
    return T


def _word_operator(ms: MonicSystem, I: tuple, length: int) -> LevelOperator:
    """T_I = T_{i_1} ... T_{i_n} landing on vertex words of the given length."""
    op = None
    for pos, i in enumerate(reversed(I)):
        step = monic_shift(ms, i, length - len(I) + pos)
        op = step if op is None else step @ op
    return op


def _rank(rows: list[list[int]]) -> int:
    if not rows:
        return 0
    return len(rows[0]) - len(nullspace(rows))


@dataclass(frozen=True)
class MonicReport:
    verdict: str
    dimension: int
    span_dimension: int
    projections_ok: bool
    projection_witness: tuple | None
    coefficients_exact: bool
    """Every T_i coefficient derived from f equals 1 on words of length >= 1."""


def monic_operators(ms: MonicSystem, k: int) -> MonicReport:
    """Monic test at depth k on the vertex words of length k+1.

    For every vertex word I with 1 <= |I| <= k+1, T_I T_I^* must be the
    coordinate projection onto the words extending I; the vectors
    T_I T_I^* 1 must then span the level space for the constant function 1
    to be cyclic at this depth.
    """
    if k < 1:
        raise ValueError("depth must be >= 1")
    E = ms.table
    L = k + 1
    space = level_space(E, ms.spec, L, "vertex")
    coeff_ok = True
    for length in range(1, L):
        for i in range(E.n_vertices):
            T = monic_shift(ms, i, length)
            if any(not _zero(v - 1) for _, _, v in T.entries()):
                coeff_ok = False
    proj_ok, proj_witness = True, None
    vectors = []
    for n in range(1, L + 1):
        for I in vertex_words(E, n):
            T = _word_operator(ms, I, L)
            P = T @ T.adjoint()
            expected = frozenset(w for w in space.words if w[:n] == I)
            if not P.is_diagonal_01() or P.diagonal_support() != expected:
                if proj_ok:
                    proj_ok, proj_witness = False, I
                continue
            # P applied to 1 = sum_w sqrt(m(w)) b_w keeps the coordinates in
            # `expected`; scaling columns by sqrt(m(w)) > 0 does not change rank
            vectors.append([1 if w in expected else 0 for w in space.words])
    span = _rank(vectors)
    verdict = "monic" if proj_ok and span == space.dim else "not monic"
    return MonicReport(verdict, space.dim, span, proj_ok, proj_witness, coeff_ok)


def vertex_edge_agreement(table, spec, k: int):
    """max |T_i - sum_{s(e)=i} T_e| after translating vertex words of length k+1 to edge words of depth k."""
    E = _table(table)
    ms = monic_from_measure(E, spec)
    worst = Fraction(0)
    for i in range(E.n_vertices):
        Tv = monic_shift(ms, i, k + 1)
        Te = vertex_operator(E, spec, i, k)
        mapped = {}
        for r, c, v in Tv.entries():
            rw = vertex_to_edge(E, Tv.target.words[r])
            cw = vertex_to_edge(E, Tv.source.words[c])
            mapped[(Te.target.index[rw], Te.source.index[cw])] = v
        for r, c, v in Te.entries():
            mapped[(r, c)] = mapped.get((r, c), Fraction(0)) - v
        for v in mapped.values():
            worst = max(worst, abs(v))
    return worst


@dataclass(frozen=True)
class MonicEquivalence:
    verdict: str
    h: dict
    """h(C) = sqrt(m'(C) / m(C)) on the vertex words of length k+1."""
    refinement_witness: tuple | None
    """A word of length k+2 on which h differs from h on its parent."""
    identity_witness: tuple | None
    """A word C of length k+2 with f'_i(C) != h(sigma C) f_i(C) / h(C)."""
    singular_witness: tuple | None


def monic_equivalence(ms: MonicSystem, ms2: MonicSystem, k: int) -> MonicEquivalence:
    """Is m' = |h|^2 m with h a depth-k cylinder function intertwining f and f'?"""
    E = ms.table
    if ms2.table.matrix != E.matrix:
        raise ValueError("monic systems over different matrices")
    L = k + 1
    h = {}
    for n in range(1, L + 2):
        for C in vertex_words(E, n):
            m, m2 = ms.mass(C), ms2.mass(C)
            if _zero(m) != _zero(m2):
                return MonicEquivalence("singular", h, None, None, C)
    for C in vertex_words(E, L):
        h[C] = sqrt(ms2.mass(C) / ms.mass(C))

    def h_at(C):
        # h is a function of the first L letters; shorter words average over their extensions
        if len(C) >= L:
            return h[C[:L]]
        return sqrt(ms2.mass(C) / ms.mass(C))

    refine = None
    for D in vertex_words(E, L + 1):
        if not _zero(sqrt(ms2.mass(D) / ms.mass(D)) - h[D[:L]]):
            refine = D
            break
    ident = None
    for C in vertex_words(E, L + 1):
        i = C[0]
        lhs = ms2.f(i, C)
        rhs = h_at(C[1:]) * ms.f(i, C) / h_at(C)
        if not _zero(lhs - rhs):
            ident = C
            break
    verdict = "equivalent" if refine is None and ident is None else "not equivalent"
    return MonicEquivalence(verdict, h, refine, ident, None)
