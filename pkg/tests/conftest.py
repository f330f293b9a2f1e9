import random
from fractions import Fraction
from pathlib import Path

import pytest

from ckb import InvalidDiagramError, StationaryMarkov, ZeroOneMatrix, is_primitive
from ckb.jsonio import load_json, parse_map, parse_matrix, parse_measure

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def table(name: str):
    return parse_matrix(load_json(fixture_path(name)), name)


def spec(name: str, E):
    return parse_measure(load_json(fixture_path(name)), E)


def alpha(name: str, E, E2):
    return parse_map(load_json(fixture_path(name)), E, E2)


def example_p(E, p, pi=None):
    """Transition matrix of the 3x3 example: rows (p, q), (p, q), (q, p) on e1..e6."""
    p = Fraction(p)
    q = 1 - p
    P = [[p, q, 0, 0, 0, 0], [0, 0, p, q, 0, 0], [0, 0, 0, 0, q, p]]
    pi = pi or (Fraction(1, 3),) * 3
    return StationaryMarkov(E, tuple(pi), P)


def random_primitive(rng: random.Random, n: int, density: float = 0.5) -> ZeroOneMatrix:
    while True:
        rows = [[1 if rng.random() < density else 0 for _ in range(n)] for _ in range(n)]
        try:
            A = ZeroOneMatrix(rows)
        except InvalidDiagramError:
            continue
        if is_primitive(A).primitive:
            return A


def random_markov(rng: random.Random, E) -> StationaryMarkov:
    P = [[Fraction(0)] * len(E) for _ in range(E.n_vertices)]
    for v in range(E.n_vertices):
        out = E.out_edges(v)
        w = [rng.randint(1, 9) for _ in out]
        for e, x in zip(out, w):
            P[v][e] = Fraction(x, sum(w))
    pw = [rng.randint(1, 9) for _ in range(E.n_vertices)]
    return StationaryMarkov(E, tuple(Fraction(x, sum(pw)) for x in pw), P)


@pytest.fixture
def a3():
    return table("a3.json")


@pytest.fixture
def a1():
    return table("a1.json")


@pytest.fixture
def b4():
    return table("b4.json")


@pytest.fixture
def b4p():
    return table("b4prime.json")


# -- one PASS/FAIL line per acceptance criterion at the end of the run

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_ac" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda s: int(s.split("_")[1][2:])):
        number = int(name.split("_")[1][2:])
        label = name.split("_", 2)[2].replace("_", " ")
        terminalreporter.write_line(f"AC{number:<3} {_acceptance[name]}  {label}")
