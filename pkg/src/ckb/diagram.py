"""Incidence matrices of stationary diagrams, their edge tables and coupled graphs.

Vertices are 0-based ints internally.  Display names (``e1``, ``a_{1,2}``)
and the JSON formats use the 1-based numbering of the literature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidDiagramError


def _as_rows(rows, allowed=None) -> tuple[tuple[int, ...], ...]:
    try:
        out = tuple(tuple(int(v) for v in row) for row in rows)
    except (TypeError, ValueError) as exc:
        raise InvalidDiagramError(f"matrix rows must be integer sequences: {exc}") from None
    n = len(out)
    if n == 0:
        raise InvalidDiagramError("matrix is empty")
    for i, row in enumerate(out):
        if len(row) != n:
            raise InvalidDiagramError(f"row {i + 1} has length {len(row)}, expected {n}")
        for v in row:
            if v < 0 or (allowed is not None and v not in allowed):
                raise InvalidDiagramError(f"row {i + 1} has an invalid entry {v}")
    for i in range(n):
        if not any(out[i]):
            raise InvalidDiagramError(f"row {i + 1} is zero")
        if not any(out[j][i] for j in range(n)):
            raise InvalidDiagramError(f"column {i + 1} is zero")
    return out


@dataclass(frozen=True)
class NonNegIntMatrix:
    """Square nonnegative integer matrix; entry (v, w) counts edges v -> w."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", _as_rows(self.rows))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def to_numpy(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)


@dataclass(frozen=True)
class ZeroOneMatrix(NonNegIntMatrix):
    """The working matrix A: a_{i,j} = 1 iff there is an edge with s = i, r = j."""

    def __post_init__(self):
        object.__setattr__(self, "rows", _as_rows(self.rows, allowed=(0, 1)))


class Edge(NamedTuple):
    name: str
    source: int
    range: int


@dataclass(frozen=True)
class EdgeTable:
    """Edges of a 0-1 diagram, one per nonzero entry of the matrix.

    Edge ids are positions in ``edges``; words of edges are ordered
    lexicographically by id.
    """

    matrix: ZeroOneMatrix
    edges: tuple[Edge, ...]

    def __post_init__(self):
        A = self.matrix
        seen = set()
        names = set()
        for e in self.edges:
            if not (0 <= e.source < A.n and 0 <= e.range < A.n):
                raise InvalidDiagramError(f"edge {e.name} has a vertex outside 1..{A.n}")
            if A[e.source, e.range] != 1:
                raise InvalidDiagramError(
                    f"edge {e.name} = ({e.source + 1},{e.range + 1}) is not a nonzero entry")
            if (e.source, e.range) in seen:
                raise InvalidDiagramError(f"two edges share entry ({e.source + 1},{e.range + 1})")
            if e.name in names:
                raise InvalidDiagramError(f"duplicate edge label {e.name}")
            seen.add((e.source, e.range))
            names.add(e.name)
        nonzero = sum(map(sum, A.rows))
        if len(seen) != nonzero:
            raise InvalidDiagramError(
                f"{len(seen)} edges given for {nonzero} nonzero matrix entries")

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def n_vertices(self) -> int:
        return self.matrix.n

    def source(self, e: int) -> int:
        return self.edges[e].source

    def range(self, e: int) -> int:
        return self.edges[e].range

    def name(self, e: int) -> str:
        return self.edges[e].name

    def names(self, word: Iterable[int]) -> list[str]:
        return [self.edges[e].name for e in word]

    @cached_property
    def _by_name(self) -> dict[str, int]:
        return {e.name: i for i, e in enumerate(self.edges)}

    @cached_property
    def _by_entry(self) -> dict[tuple[int, int], int]:
        return {(e.source, e.range): i for i, e in enumerate(self.edges)}

    @cached_property
    def _out(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(i for i, e in enumerate(self.edges) if e.source == v)
                     for v in range(self.n_vertices))

    @cached_property
    def _in(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(i for i, e in enumerate(self.edges) if e.range == v)
                     for v in range(self.n_vertices))

    def id(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown edge label {name!r}") from None

    def ids(self, *names: str) -> tuple[int, ...]:
        return tuple(self.id(n) for n in names)

    def edge_between(self, i: int, j: int) -> int | None:
        return self._by_entry.get((i, j))

    def out_edges(self, v: int) -> tuple[int, ...]:
        """Edge ids with source v, in id order."""
        return self._out[v]

    def in_edges(self, v: int) -> tuple[int, ...]:
        return self._in[v]

    def is_linked(self, word: Sequence[int]) -> bool:
        return all(self.range(a) == self.source(b) for a, b in zip(word, word[1:]))

    def entry_label(self, e: int) -> str:
        edge = self.edges[e]
        return f"a_{{{edge.source + 1},{edge.range + 1}}}"


def build_edge_table(A: ZeroOneMatrix, labels: Sequence[tuple[str, int, int]] | None = None) -> EdgeTable:
    """Enumerate the edges of A.

    By default edges are numbered row-major over the nonzero entries
    (``e1`` is the first nonzero of row 1).  ``labels`` overrides this with
    explicit ``(name, source, range)`` triples (0-based vertices); their
    order fixes the edge ids.
    """
    if not isinstance(A, ZeroOneMatrix):
        A = ZeroOneMatrix(A)
    if labels is None:
        entries = [(i, j) for i in range(A.n) for j in range(A.n) if A[i, j]]
        edges = tuple(Edge(f"e{k + 1}", i, j) for k, (i, j) in enumerate(entries))
    else:
        edges = tuple(Edge(str(name), int(s), int(r)) for name, s, r in labels)
    return EdgeTable(A, edges)


def _table(obj) -> EdgeTable:
    if isinstance(obj, EdgeTable):
        return obj
    return build_edge_table(obj)


def linked_pairs(E: EdgeTable) -> frozenset[tuple[int, int]]:
    return frozenset((e, f) for e in range(len(E)) for f in E.out_edges(E.range(e)))


@dataclass(frozen=True)
class CoupledGraph:
    """Directed graph on the edge set: an arrow e -> f whenever r(e) = s(f)."""

    table: EdgeTable
    arrows: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def vertices(self) -> range:
        return range(len(self.table))

    def successors(self, e: int) -> tuple[int, ...]:
        return self.table.out_edges(self.table.range(e))

    def predecessors(self, f: int) -> tuple[int, ...]:
        return self.table.in_edges(self.table.source(f))

    def adjacency_matrix(self) -> ZeroOneMatrix:
        return ZeroOneMatrix(self.adjacency)


def coupled_graph(A) -> CoupledGraph:
    """Coupled graph of a 0-1 matrix (or of an already labelled edge table)."""
    E = _table(A)
    arrows = tuple(sorted(linked_pairs(E)))
    m = len(E)
    adj = [[0] * m for _ in range(m)]
    for e, f in arrows:
        adj[e][f] = 1
    return CoupledGraph(E, arrows, tuple(map(tuple, adj)))


def strongly_connected_components(n: int, successors) -> list[list[int]]:
    """Tarjan's algorithm, iterative.  Components come out in reverse topological order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(sorted(comp))
    return comps


def is_strongly_connected(G: CoupledGraph) -> bool:
    return len(strongly_connected_components(len(G.table), G.successors)) == 1


@dataclass(frozen=True)
class Primitivity:
    primitive: bool
    exponent: int | None
    bound: int
    irreducible: bool
    period: int | None
    zero_entry: tuple[int, int] | None = None
    """An entry (0-based) that is still zero in A**bound when not primitive."""


def wielandt_bound(n: int) -> int:
    return n * n - 2 * n + 2


def _period(A: ZeroOneMatrix) -> int:
    # gcd of level differences over all edges of a BFS tree; A irreducible
    level = {0: 0}
    queue = [0]
    for v in queue:
        for w in range(A.n):
            if A[v, w] and w not in level:
                level[w] = level[v] + 1
                queue.append(w)
    g = 0
    for v in range(A.n):
        for w in range(A.n):
            if A[v, w]:
                g = math.gcd(g, level[v] + 1 - level[w])
    return g


def is_primitive(A: ZeroOneMatrix) -> Primitivity:
    """Smallest k <= n^2 - 2n + 2 with A**k entrywise positive, if any."""
    if isinstance(A, EdgeTable):
        A = A.matrix
    pattern = A.to_numpy() > 0
    bound = wielandt_bound(A.n)
    power = pattern.copy()
    for k in range(1, bound + 1):
        if power.all():
            return Primitivity(True, k, bound, True, 1)
        if k < bound:
            power = (power.astype(np.int64) @ pattern.astype(np.int64)) > 0
    comps = strongly_connected_components(A.n, lambda v: [w for w in range(A.n) if A[v, w]])
    irreducible = len(comps) == 1
    i, j = map(int, np.argwhere(~power)[0])
    return Primitivity(False, None, bound, irreducible,
                       _period(A) if irreducible else None, (i, j))


def reduction_edges(F: NonNegIntMatrix) -> list[tuple[int, int, int]]:
    """Edges ``(source, range, copy)`` of the multigraph of F, row-major."""
    if not isinstance(F, NonNegIntMatrix):
        F = NonNegIntMatrix(F)
    return [(v, w, c) for v in range(F.n) for w in range(F.n) for c in range(F[v, w])]


def zero_one_reduction(F: NonNegIntMatrix) -> ZeroOneMatrix:
    """0-1 matrix on the edges of F: edge e precedes edge f iff range(e) = source(f)."""
    edges = reduction_edges(F)
    return ZeroOneMatrix(tuple(tuple(int(e[1] == f[0]) for f in edges) for e in edges))


@lru_cache(maxsize=256)
def _words(E: EdgeTable, k: int) -> tuple[tuple[int, ...], ...]:
    if k == 1:
        return tuple((e,) for e in range(len(E)))
    return tuple(w + (f,) for w in _words(E, k - 1) for f in E.out_edges(E.range(w[-1])))


def path_words(E, k: int) -> tuple[tuple[int, ...], ...]:
    """All linked edge words of length k, lexicographic by edge id."""
    if k < 1:
        raise ValueError("depth must be >= 1")
    return _words(_table(E), k)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(G: CoupledGraph, name: str = "coupled") -> str:
    E = G.table
    lines = [f"digraph {name} {{"]
    for e in G.vertices:
        lines.append(f"  {_quote(E.name(e))} [label={_quote(E.entry_label(e))}];")
    for e, f in G.arrows:
        lines.append(f"  {_quote(E.name(e))} -> {_quote(E.name(f))};")
    lines.append("}")
    return "\n".join(lines) + "\n"
