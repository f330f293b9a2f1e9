"""Perron data, invariant and Markov measures on cylinder words.

A depth-k cylinder is a linked word of k edge ids; the top edge from the root
is implicit, so a depth-0 cylinder is just a vertex (:class:`Vertex`).  With
that convention the tail-invariant measure of a depth-k word w is
``x[r(w_k)] / lam**k`` and a Markov measure is
``pi[s(w_1)] * prod_i P_i[s(w_i)][w_i]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

import numpy as np

from .diagram import EdgeTable, build_edge_table, is_primitive, path_words
from .errors import InvalidMeasureError, NotInDomainError, NotLinkedError, NotPrimitiveError
from .exact import exact_eq, is_exact, nullspace

FLOAT_TOL = 1e-12
TAIL_RULES = ("repeat-last", "explicit-stationary-tail", "periodic")


class Vertex(NamedTuple):
    """Depth-0 cylinder: all paths through the given vertex at level 1."""

    index: int


@dataclass(frozen=True)
class PerronData:
    lam: Union[Fraction, float]
    x: tuple
    exact: bool


def _residual(A: np.ndarray, x: np.ndarray, lam: float) -> float:
    return float(np.max(np.abs(A @ x - lam * x)))


def perron_data(A, *, max_iter: int = 200_000, tol: float = 1e-14) -> PerronData:
    """Perron eigenvalue and right eigenvector of a primitive 0-1 matrix.

    Power iteration on A + I (same eigenvector, no periodic oscillation),
    normalised so that x sums to 1.  When the eigenvalue is an integer the
    eigenvector is recomputed exactly over the rationals.
    """
    if isinstance(A, EdgeTable):
        A = A.matrix
    prim = is_primitive(A)
    if not prim.primitive:
        detail = "reducible" if not prim.irreducible else f"irreducible with period {prim.period}"
        raise NotPrimitiveError(f"matrix is not primitive ({detail}); no Perron data")
    M = A.to_numpy().astype(float)
    shifted = M + np.eye(A.n)
    x = np.full(A.n, 1.0 / A.n)
    lam = float(np.sum(M @ x))
    for _ in range(max_iter):
        if _residual(M, x, lam) <= tol * np.max(np.abs(x)):
            break
        y = shifted @ x
        x = y / y.sum()
        lam = float(np.sum(M @ x))
    if _residual(M, x, lam) > FLOAT_TOL * np.max(np.abs(x)):
        raise ArithmeticError(f"power iteration did not converge (residual {_residual(M, x, lam):.3e})")

    # a rational eigenvalue of an integer matrix is an integer
    guess = round(lam)
    if abs(lam - guess) < 1e-9:
        rows = [[Fraction(A[i, j] - (guess if i == j else 0)) for j in range(A.n)] for i in range(A.n)]
        basis = nullspace(rows)
        if len(basis) == 1:
            v = basis[0]
            total = sum(v)
            xs = tuple(c / total for c in v)
            if all(c > 0 for c in xs):
                return PerronData(Fraction(guess), xs, True)
    return PerronData(lam, tuple(float(c) for c in x), False)


def _check_matrix_shape(table: EdgeTable, P, what: str):
    if len(P) != table.n_vertices or any(len(row) != len(table) for row in P):
        raise InvalidMeasureError(
            f"{what} must be {table.n_vertices}x{len(table)} (vertices x edges)")
    return tuple(tuple(row) for row in P)


@dataclass(frozen=True)
class InvariantMeasure:
    """The tail-invariant probability measure, determined by Perron data."""

    table: EdgeTable
    perron: PerronData
    kind = "invariant"

    @classmethod
    def of(cls, table: EdgeTable) -> "InvariantMeasure":
        return cls(table, perron_data(table.matrix))

    def initial(self, v: int):
        return self.perron.x[v]

    def transition(self, level: int, e: int):
        x, lam = self.perron.x, self.perron.lam
        return x[self.table.range(e)] / (lam * x[self.table.source(e)])

    def matrix(self, level: int):
        return tuple(tuple(self.transition(level, e) if self.table.source(e) == v else 0
                           for e in range(len(self.table)))
                     for v in range(self.table.n_vertices))

    def eventual_period(self) -> tuple[int, int]:
        return 1, 1


@dataclass(frozen=True)
class StationaryMarkov:
    """Markov measure with one transition matrix P (rows: vertices, columns: edges)."""

    table: EdgeTable
    pi: tuple
    P: tuple
    kind = "stationary"

    def __post_init__(self):
        if len(self.pi) != self.table.n_vertices:
            raise InvalidMeasureError(f"pi must have {self.table.n_vertices} entries")
        object.__setattr__(self, "pi", tuple(self.pi))
        object.__setattr__(self, "P", _check_matrix_shape(self.table, self.P, "P"))

    def initial(self, v: int):
        return self.pi[v]

    def transition(self, level: int, e: int):
        return self.P[self.table.source(e)][e]

    def matrix(self, level: int):
        return self.P

    def eventual_period(self) -> tuple[int, int]:
        return 1, 1


@dataclass(frozen=True)
class MarkovSequence:
    """Markov measure with transition matrices P_1..P_N and a rule for levels > N.

    ``repeat-last`` uses P_N forever, ``explicit-stationary-tail`` switches to
    ``tail_matrix`` after level N, ``periodic`` cycles through P_1..P_N.
    """

    table: EdgeTable
    pi: tuple
    matrices: tuple
    tail: str = "repeat-last"
    tail_matrix: tuple | None = None
    kind = "sequence"

    def __post_init__(self):
        if len(self.pi) != self.table.n_vertices:
            raise InvalidMeasureError(f"pi must have {self.table.n_vertices} entries")
        if not self.matrices:
            raise InvalidMeasureError("a sequence needs at least one matrix")
        if self.tail not in TAIL_RULES:
            raise InvalidMeasureError(f"unknown tail rule {self.tail!r}; expected one of {TAIL_RULES}")
        if (self.tail == "explicit-stationary-tail") != (self.tail_matrix is not None):
            raise InvalidMeasureError("tail_matrix is required exactly for the explicit-stationary-tail rule")
        object.__setattr__(self, "pi", tuple(self.pi))
        object.__setattr__(self, "matrices", tuple(
            _check_matrix_shape(self.table, P, f"P_{i + 1}") for i, P in enumerate(self.matrices)))
        if self.tail_matrix is not None:
            object.__setattr__(self, "tail_matrix", _check_matrix_shape(self.table, self.tail_matrix, "tail"))

    @classmethod
    def lift(cls, spec) -> "MarkovSequence":
        """View any measure spec as a sequence (stationary ones repeat one matrix)."""
        if isinstance(spec, MarkovSequence):
            return spec
        pi = tuple(spec.initial(v) for v in range(spec.table.n_vertices))
        return cls(spec.table, pi, (spec.matrix(1),), "repeat-last")

    def initial(self, v: int):
        return self.pi[v]

    def matrix(self, level: int):
        if level < 1:
            raise ValueError("transition levels start at 1")
        N = len(self.matrices)
        if level <= N:
            return self.matrices[level - 1]
        if self.tail == "repeat-last":
            return self.matrices[-1]
        if self.tail == "explicit-stationary-tail":
            return self.tail_matrix
        return self.matrices[(level - 1) % N]

    def transition(self, level: int, e: int):
        return self.matrix(level)[self.table.source(e)][e]

    def eventual_period(self) -> tuple[int, int]:
        """(start, period) with P_{i+period} = P_i for every level i >= start."""
        N = len(self.matrices)
        if self.tail == "repeat-last":
            return N, 1
        if self.tail == "explicit-stationary-tail":
            return N + 1, 1
        return 1, N


MeasureSpec = Union[InvariantMeasure, StationaryMarkov, MarkovSequence]


def invariant_measure(A) -> InvariantMeasure:
    table = A if isinstance(A, EdgeTable) else build_edge_table(A)
    return InvariantMeasure.of(table)


def _check_word(table: EdgeTable, word) -> None:
    for a, b in zip(word, word[1:]):
        if table.range(a) != table.source(b):
            raise NotLinkedError(
                f"word {table.names(word)} is not linked: r({table.name(a)}) != s({table.name(b)})")


def cylinder_measure(spec: MeasureSpec, word):
    """Measure of a cylinder: a linked edge word, or a :class:`Vertex` for depth 0."""
    if isinstance(word, Vertex):
        return spec.initial(word.index)
    word = tuple(word)
    if not word:
        raise ValueError("empty word; use Vertex(v) for depth-0 cylinders")
    table = spec.table
    _check_word(table, word)
    if isinstance(spec, InvariantMeasure):
        return spec.perron.x[table.range(word[-1])] / spec.perron.lam ** len(word)
    value = spec.initial(table.source(word[0]))
    for i, e in enumerate(word, start=1):
        value = value * spec.transition(i, e)
    return value


def _close(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return exact_eq(a, b)
    return abs(float(a) - float(b)) <= FLOAT_TOL * max(1.0, abs(float(a)), abs(float(b)))


@dataclass(frozen=True)
class Violation:
    matrix_index: int | None
    """1-based level of the offending matrix, 0 for the tail matrix, None for pi."""
    row: int | None
    condition: str
    detail: str


def _spec_matrices(spec) -> list[tuple[int, tuple]]:
    if isinstance(spec, MarkovSequence):
        out = [(i + 1, P) for i, P in enumerate(spec.matrices)]
        if spec.tail_matrix is not None:
            out.append((0, spec.tail_matrix))
        return out
    return [(1, spec.matrix(1))]


def validate_spec(spec: MeasureSpec) -> Violation | None:
    """First violation of: (a) p[v][e] > 0 iff s(e) = v, (b) rows sum to 1, pi > 0 summing to 1."""
    table = spec.table
    for level, P in _spec_matrices(spec):
        for v, row in enumerate(P):
            for e, p in enumerate(row):
                if (p > 0) != (table.source(e) == v) or p < 0:
                    return Violation(level, v, "a", f"entry ({v + 1}, {table.name(e)}) = {p} "
                                     f"but s({table.name(e)}) = {table.source(e) + 1}")
            total = sum(row)
            if not _close(total, 1):
                return Violation(level, v, "b", f"row {v + 1} sums to {total}")
    pi = [spec.initial(v) for v in range(table.n_vertices)]
    for v, p in enumerate(pi):
        if not p > 0:
            return Violation(None, v, "pi", f"pi[{v + 1}] = {p} is not positive")
    if not _close(sum(pi), 1):
        return Violation(None, None, "pi", f"pi sums to {sum(pi)}")
    return None


def require_valid(spec: MeasureSpec) -> MeasureSpec:
    bad = validate_spec(spec)
    if bad is not None:
        raise InvalidMeasureError(f"invalid measure ({bad.condition}): {bad.detail}")
    return spec


def words_at(table: EdgeTable, k: int):
    """Cylinders of depth k, depth 0 included."""
    if k == 0:
        return tuple(Vertex(v) for v in range(table.n_vertices))
    return path_words(table, k)


def extend(table: EdgeTable, word, f: int):
    """Append edge f to a cylinder (depth-0 cylinders are vertices)."""
    if isinstance(word, Vertex):
        if table.source(f) != word.index:
            raise NotLinkedError(f"{table.name(f)} does not start at vertex {word.index + 1}")
        return (f,)
    if table.range(word[-1]) != table.source(f):
        raise NotLinkedError(f"{table.name(f)} does not follow {table.name(word[-1])}")
    return tuple(word) + (f,)


def children(table: EdgeTable, word) -> tuple[int, ...]:
    end = word.index if isinstance(word, Vertex) else table.range(word[-1])
    return table.out_edges(end)


def level_consistency(spec: MeasureSpec, k: int):
    """max over depth-k cylinders w of |m(w) - sum_f m(w f)|."""
    table = spec.table
    worst = Fraction(0)
    for w in words_at(table, k):
        total = sum((cylinder_measure(spec, extend(table, w, f)) for f in children(table, w)), Fraction(0))
        d = abs(cylinder_measure(spec, w) - total)
        if d > worst:
            worst = d
    return worst


def invariant_as_markov(source) -> StationaryMarkov:
    """Stationary Markov form of the invariant measure: p[v][e] = x[r(e)] / (lam x[v])."""
    inv = source if isinstance(source, InvariantMeasure) else invariant_measure(source)
    pi = inv.perron.x
    return StationaryMarkov(inv.table, pi, inv.matrix(1))


def q_vectors(spec: MeasureSpec, k: int) -> tuple:
    """Distribution over vertices at level k: q0 = pi, q_k(v) = sum_{r(e)=v} q_{k-1}(s(e)) p_k(e)."""
    table = spec.table
    q = tuple(spec.initial(v) for v in range(table.n_vertices))
    for level in range(1, k + 1):
        q = tuple(sum((q[table.source(e)] * spec.transition(level, e) for e in table.in_edges(v)), Fraction(0))
                  for v in range(table.n_vertices))
    return q


@dataclass(frozen=True)
class RNDerivative:
    """m(e.w) / m(w) at the depth of w, split as prefactor * prod of level ratios."""

    ratio: object
    prefactor: object
    trace: tuple
    """Partial products prod_{i<=j} p_{i+1}(w_i) / p_i(w_i), j = 1..depth."""


def _partial_products(factors):
    out, acc = [], Fraction(1)
    for f in factors:
        acc = acc * f
        out.append(acc)
    return tuple(out)


def rn_sigma_e(spec: MeasureSpec, e: int, word) -> RNDerivative:
    table = spec.table
    word = tuple(word)
    _check_word(table, word)
    if not word or table.source(word[0]) != table.range(e):
        raise NotInDomainError(
            f"word {table.names(word)} is not in the domain of {table.name(e)} (needs s(w_1) = r(e))")
    ratio = cylinder_measure(spec, (e,) + word) / cylinder_measure(spec, word)
    prefactor = (spec.initial(table.source(e)) * spec.transition(1, e)
                 / spec.initial(table.range(e)))
    trace = _partial_products(spec.transition(i + 1, w) / spec.transition(i, w)
                              for i, w in enumerate(word, start=1))
    return RNDerivative(ratio, prefactor, trace)


def _is_one(x) -> bool:
    return exact_eq(x, 1) if is_exact(x) else abs(float(x) - 1.0) <= FLOAT_TOL


def _log_size(x) -> float:
    return abs(math.log(float(x)))


@dataclass(frozen=True)
class ProductReport:
    """Outcome of an infinite-product convergence test along paths."""

    verdict: str
    witness: tuple | None
    """First depth-k word (lexicographic) hitting a non-unit ratio in the periodic tail."""
    failing: tuple[int, int] | None
    """(edge id, level) of a non-unit ratio inside the periodic tail, if any."""
    worst_word: tuple | None
    worst_trace: tuple
    start: int
    period: int


def product_test(table: EdgeTable, ratio, start: int, period: int, k: int,
                 ok: str = "pass", bad: str = "fail") -> ProductReport:
    """Decide convergence of prod_i ratio(i, x_i) along every path.

    ``ratio(i, e)`` must be periodic in i with the given period from level
    ``start`` on, so it takes finitely many values; the product then
    converges in (0, inf) on every path iff the tail ratios are all 1.
    """
    failing = None
    for level in range(start, start + period):
        for e in range(len(table)):
            if not _is_one(ratio(level, e)):
                failing = (e, level)
                break
        if failing:
            break
    witness = None
    worst_word, worst_trace, worst_size = None, (), -1.0
    for w in path_words(table, k):
        factors = [ratio(i, x) for i, x in enumerate(w, start=1)]
        trace = _partial_products(factors)
        if witness is None and failing is not None:
            if any(i >= start and not _is_one(f) for i, f in enumerate(factors, start=1)):
                witness = w
        size = _log_size(trace[-1])
        if size > worst_size:
            worst_word, worst_trace, worst_size = w, trace, size
    return ProductReport(bad if failing else ok, witness, failing, worst_word, worst_trace, start, period)


def quasi_stationarity_check(spec: MeasureSpec, k: int) -> ProductReport:
    """Does prod_i p_{i+1}(x_i) / p_i(x_i) converge on every path?"""
    seq = MarkovSequence.lift(spec)
    start, period = seq.eventual_period()
    return product_test(seq.table, lambda i, e: seq.transition(i + 1, e) / seq.transition(i, e),
                        start, period, k)


def reweight(spec: MeasureSpec, density: Sequence) -> MeasureSpec:
    """Multiply the measure by a function of the first vertex and renormalise."""
    if isinstance(spec, InvariantMeasure):
        spec = invariant_as_markov(spec)
    pi = [spec.initial(v) * density[v] for v in range(spec.table.n_vertices)]
    total = sum(pi)
    pi = tuple(p / total for p in pi)
    if isinstance(spec, StationaryMarkov):
        return StationaryMarkov(spec.table, pi, spec.P)
    return MarkovSequence(spec.table, pi, spec.matrices, spec.tail, spec.tail_matrix)


def to_float(spec: MeasureSpec) -> MeasureSpec:
    """Same measure with every number converted to float."""
    fl = lambda P: tuple(tuple(float(v) for v in row) for row in P)
    if isinstance(spec, InvariantMeasure):
        pd = spec.perron
        return InvariantMeasure(spec.table, PerronData(float(pd.lam), tuple(map(float, pd.x)), False))
    if isinstance(spec, StationaryMarkov):
        return StationaryMarkov(spec.table, tuple(map(float, spec.pi)), fl(spec.P))
    return MarkovSequence(spec.table, tuple(map(float, spec.pi)), tuple(fl(P) for P in spec.matrices),
                          spec.tail, fl(spec.tail_matrix) if spec.tail_matrix is not None else None)
