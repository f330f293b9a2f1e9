"""Exact scalars: rationals and finite sums of square roots of rationals.

Cylinder weights sqrt(m(w)) and conditional ratios sqrt(m(wf)/m(w)) are
irrational in general, but every identity checked by this package only
multiplies, adds and compares such quantities.  :class:`Surd` keeps them
exact; anything that meets a float degrades to float.
"""

from __future__ import annotations

import math
from fractions import Fraction

_SMALL_PRIMES = [p for p in range(2, 1000) if all(p % q for q in range(2, int(p ** 0.5) + 1))]


def _square_free(n: int) -> tuple[int, int]:
    """Split a positive int as ``outer**2 * inner``, stripping small prime squares."""
    outer = 1
    for p in _SMALL_PRIMES:
        pp = p * p
        if pp > n:
            break
        while n % pp == 0:
            n //= pp
            outer *= p
    r = math.isqrt(n)
    if r * r == n:
        return outer * r, 1
    return outer, n


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


class Surd:
    """Exact value ``sum(c * sqrt(r))`` with rational ``c`` and integer ``r > 1``.

    Terms are kept pairwise independent over Q (no ratio of radicands is a
    square), so a value is zero iff it has no terms.  Arithmetic that lands on
    a rational returns a :class:`~fractions.Fraction` instead.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[int, Fraction]):
        self._terms = terms

    @staticmethod
    def _make(terms: dict[int, Fraction]):
        terms = {r: c for r, c in terms.items() if c != 0}
        if not terms:
            return Fraction(0)
        if list(terms) == [1]:
            return terms[1]
        return Surd(terms)

    @staticmethod
    def _add_term(terms: dict[int, Fraction], radicand: int, coeff: Fraction) -> None:
        if coeff == 0:
            return
        if radicand in terms:
            terms[radicand] += coeff
            return
        for r in terms:
            prod = r * radicand
            if _is_square(prod):
                # sqrt(radicand) = sqrt(r * radicand) / sqrt(r) = s / r * sqrt(r)
                terms[r] += coeff * Fraction(math.isqrt(prod), r)
                return
        terms[radicand] = coeff

    @classmethod
    def sqrt(cls, value) -> "Surd | Fraction":
        """Exact square root of a nonnegative rational."""
        q = Fraction(value)
        if q < 0:
            raise ValueError(f"square root of negative rational {q}")
        if q == 0:
            return Fraction(0)
        # sqrt(a/b) = sqrt(a*b) / b
        outer, inner = _square_free(q.numerator * q.denominator)
        return cls._make({inner: Fraction(outer, q.denominator)})

    @staticmethod
    def _terms_of(x) -> dict[int, Fraction] | None:
        if isinstance(x, Surd):
            return x._terms
        if isinstance(x, (int, Fraction)):
            return {1: Fraction(x)} if x != 0 else {}
        return None

    def _combine(self, other, sign: int):
        ot = Surd._terms_of(other)
        if ot is None:
            return float(self) + sign * float(other)
        terms = dict(self._terms)
        for r, c in ot.items():
            Surd._add_term(terms, r, sign * c)
        return Surd._make(terms)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return (-self)._combine(other, 1)

    def __neg__(self):
        return Surd._make({r: -c for r, c in self._terms.items()})

    def __pos__(self):
        return self

    def __mul__(self, other):
        ot = Surd._terms_of(other)
        if ot is None:
            return float(self) * float(other)
        terms: dict[int, Fraction] = {}
        for r1, c1 in self._terms.items():
            for r2, c2 in ot.items():
                g = math.gcd(r1, r2)
                outer, inner = _square_free((r1 // g) * (r2 // g))
                Surd._add_term(terms, inner, c1 * c2 * g * outer)
        return Surd._make(terms)

    __rmul__ = __mul__

    def _inverse(self):
        if len(self._terms) != 1:
            raise ZeroDivisionError("only single-term surds can be inverted exactly")
        (r, c), = self._terms.items()
        # 1 / (c sqrt r) = sqrt(r) / (c r)
        return Surd._make({r: 1 / (c * r)})

    def __truediv__(self, other):
        if isinstance(other, Surd):
            return self * other._inverse()
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return float(self) / float(other)

    def __rtruediv__(self, other):
        return self._inverse() * other

    def __float__(self):
        return float(sum(float(c) * math.sqrt(r) for r, c in self._terms.items()))

    def __abs__(self):
        return -self if float(self) < 0 else self

    def __eq__(self, other):
        ot = Surd._terms_of(other)
        if ot is None:
            return float(self) == other
        diff = self._combine(other, -1)
        # a Surd instance always carries an irrational term, hence is nonzero
        return not isinstance(diff, Surd) and diff == 0

    def __hash__(self):
        return hash(tuple(sorted(self._terms.items())))

    def __lt__(self, other):
        return float(self - other) < 0 if Surd._terms_of(other) is not None else float(self) < other

    def __le__(self, other):
        return self == other or self < other

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"Surd({self})"

    def __str__(self):
        parts = []
        for r, c in sorted(self._terms.items()):
            if r == 1:
                parts.append(str(c))
            else:
                parts.append(f"sqrt({r})" if c == 1 else f"{c}*sqrt({r})")
        return " + ".join(parts)

    def __gt__(self, other):
        return not self <= other

    def __ge__(self, other):
        return not self < other


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, Surd))


def exact_eq(a, b) -> bool:
    """Equality through the difference, so a Fraction never meets a Surd via float."""
    return (a - b) == 0


def sqrt(x):
    """Square root that stays exact for rationals and falls back to ``math.sqrt``."""
    if isinstance(x, (int, Fraction)):
        return Surd.sqrt(x)
    if isinstance(x, Surd):
        raise TypeError("nested radicals are not supported")
    return math.sqrt(x)


def to_number(text, exact: bool = True):
    """Parse ``"p/q"``, integer or decimal strings (or plain numbers)."""
    if isinstance(text, bool):
        raise ValueError(f"not a number: {text!r}")
    if exact:
        if isinstance(text, float):
            return Fraction(str(text))
        return Fraction(text)
    return float(Fraction(text)) if isinstance(text, str) else float(text)


def format_number(x) -> str:
    """Inverse of :func:`to_number`: rationals as ``p/q``, floats as repr decimals."""
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, (Fraction, Surd)):
        return str(x)
    return repr(float(x))


def nullspace(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of the right nullspace of a rational matrix (Gauss-Jordan)."""
    m = [[Fraction(v) for v in row] for row in rows]
    if not m:
        return []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        basis.append(v)
    return basis
