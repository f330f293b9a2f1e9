"""JSON formats for matrices, measures and edge maps.

Vertices are 1-based in files.  Numbers are strings: ``"p/q"`` rationals or
decimals, both read exactly unless float mode is asked for.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .admissible import AdmissibleMap
from .diagram import EdgeTable, NonNegIntMatrix, ZeroOneMatrix, build_edge_table
from .errors import InputParseError
from .exact import format_number, to_number
from .measure import InvariantMeasure, MarkovSequence, StationaryMarkov, invariant_measure, require_valid, to_float


def load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputParseError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise InputParseError(f"{path}: expected a JSON object")
    return data


def _field(data: dict, key: str, kind, where: str):
    if key not in data:
        raise InputParseError(f"{where}: missing field {key!r}")
    value = data[key]
    if not isinstance(value, kind):
        raise InputParseError(f"{where}: field {key!r} has the wrong type")
    return value


def _int_rows(data: dict, where: str) -> list[list[int]]:
    rows = _field(data, "rows", list, where)
    for row in rows:
        if not isinstance(row, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in row):
            raise InputParseError(f"{where}: rows must be lists of integers")
    if "n" in data and data["n"] != len(rows):
        raise InputParseError(f"{where}: n = {data['n']} but {len(rows)} rows given")
    return rows


def parse_matrix(data: dict, where: str = "matrix") -> EdgeTable:
    """Edge table of a 0-1 matrix file, honouring optional ``edge_labels``."""
    A = ZeroOneMatrix(_int_rows(data, where))
    labels = data.get("edge_labels")
    if labels is None:
        return build_edge_table(A)
    if not isinstance(labels, list):
        raise InputParseError(f"{where}: edge_labels must be a list")
    triples = []
    for item in labels:
        if not isinstance(item, dict) or not {"id", "s", "r"} <= set(item):
            raise InputParseError(f"{where}: each edge label needs id, s and r")
        triples.append((item["id"], int(item["s"]) - 1, int(item["r"]) - 1))
    return build_edge_table(A, triples)


def parse_int_matrix(data: dict, where: str = "matrix") -> NonNegIntMatrix:
    return NonNegIntMatrix(_int_rows(data, where))


def matrix_to_json(A, table: EdgeTable | None = None) -> dict:
    out = {"n": A.n, "rows": [list(r) for r in A.rows]}
    if table is not None:
        out["edge_labels"] = [{"id": e.name, "s": e.source + 1, "r": e.range + 1} for e in table.edges]
    return out


def _numbers(values, exact: bool, where: str) -> tuple:
    if not isinstance(values, list):
        raise InputParseError(f"{where}: expected a list of numbers")
    try:
        return tuple(to_number(v, exact) for v in values)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InputParseError(f"{where}: bad number ({exc})") from None


def _matrix(rows, exact: bool, where: str) -> tuple:
    if not isinstance(rows, list):
        raise InputParseError(f"{where}: expected a matrix")
    return tuple(_numbers(r, exact, where) for r in rows)


def parse_measure(data: dict, table: EdgeTable, exact: bool = True):
    """Measure spec from JSON; the spec is validated before it is returned."""
    kind = _field(data, "type", str, "measure")
    if kind == "invariant":
        spec = invariant_measure(table)
        return to_float(spec) if not exact else spec
    pi = _numbers(_field(data, "pi", list, "measure"), exact, "measure.pi")
    if kind == "stationary":
        spec = StationaryMarkov(table, pi, _matrix(_field(data, "P", list, "measure"), exact, "measure.P"))
    elif kind == "sequence":
        Ps = tuple(_matrix(P, exact, "measure.Ps") for P in _field(data, "Ps", list, "measure"))
        tail_matrix = data.get("tail_matrix")
        spec = MarkovSequence(table, pi, Ps, data.get("tail", "repeat-last"),
                              _matrix(tail_matrix, exact, "measure.tail_matrix") if tail_matrix is not None else None)
    else:
        raise InputParseError(f"measure: unknown type {kind!r}")
    return require_valid(spec)


def measure_to_json(spec) -> dict:
    fmt = lambda P: [[format_number(v) for v in row] for row in P]
    if isinstance(spec, InvariantMeasure):
        return {"type": "invariant"}
    pi = [format_number(v) for v in spec.pi]
    if isinstance(spec, StationaryMarkov):
        return {"type": "stationary", "pi": pi, "P": fmt(spec.P)}
    out = {"type": "sequence", "pi": pi, "Ps": [fmt(P) for P in spec.matrices], "tail": spec.tail}
    if spec.tail_matrix is not None:
        out["tail_matrix"] = fmt(spec.tail_matrix)
    return out


def parse_map(data: dict, source: EdgeTable, target: EdgeTable) -> AdmissibleMap:
    mapping = _field(data, "map", dict, "map")
    try:
        return AdmissibleMap.from_json({"map": mapping}, source, target)
    except KeyError as exc:
        raise InputParseError(f"map: {exc.args[0]}") from None


def stationary_from_rows(table: EdgeTable, pi, P) -> StationaryMarkov:
    """Convenience for tests and fixtures: rationals given as strings or numbers."""
    return require_valid(StationaryMarkov(
        table, tuple(Fraction(v) for v in pi), tuple(tuple(Fraction(v) for v in row) for row in P)))
