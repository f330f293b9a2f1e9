import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ckb.exact import Surd, exact_eq, format_number, nullspace, sqrt, to_number

rationals = st.fractions(min_value=Fraction(1, 200), max_value=1000, max_denominator=200)


def test_square_roots_of_squares_are_rational():
    assert sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert isinstance(sqrt(Fraction(9, 4)), Fraction)


def test_products_collapse():
    assert sqrt(Fraction(1, 2)) * sqrt(2) == 1
    assert sqrt(6) * sqrt(Fraction(2, 3)) == 2
    assert sqrt(8) == 2 * sqrt(2)


def test_independent_radicands_do_not_cancel():
    x = sqrt(2) + sqrt(3)
    assert x != 0 and not exact_eq(x, sqrt(5))
    assert exact_eq(x - sqrt(3), sqrt(2))


def test_formatting():
    assert str(sqrt(Fraction(1, 2))) == "1/2*sqrt(2)"
    assert format_number(Fraction(1, 3)) == "1/3"
    assert format_number(0.5) == "0.5"


def test_parse_numbers():
    assert to_number("1/3") == Fraction(1, 3)
    assert to_number("0.1") == Fraction(1, 10)
    assert to_number("0.1", exact=False) == 0.1
    with pytest.raises(ValueError):
        to_number("abc")


def test_nested_radicals_refused():
    with pytest.raises(TypeError):
        sqrt(sqrt(2))


@given(rationals, rationals)
def test_sqrt_multiplicative(a, b):
    assert exact_eq(sqrt(a) * sqrt(b), sqrt(a * b))


@given(rationals)
def test_sqrt_squares_back(a):
    r = sqrt(a)
    assert exact_eq(r * r, a)
    assert math.isclose(float(r), math.sqrt(a))


@given(rationals, rationals)
def test_division_inverts_multiplication(a, b):
    assert exact_eq(sqrt(a) / sqrt(b) * sqrt(b), sqrt(a))


def test_mixing_with_float_degrades():
    assert isinstance(sqrt(2) * 1.5, float)


def test_nullspace_of_cycle_minus_two():
    rows = [[Fraction(v) for v in r] for r in [[-1, 1, 0], [0, -1, 1], [1, 0, -1]]]
    assert nullspace(rows) == [[1, 1, 1]]


def test_surd_is_hashable_and_ordered():
    assert hash(sqrt(2)) == hash(sqrt(8) / 2)
    assert sqrt(2) < Fraction(3, 2) < sqrt(3)
    assert isinstance(Surd.sqrt(3), Surd)
