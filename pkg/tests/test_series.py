from fractions import Fraction

import sympy
from hypothesis import given, settings, strategies as st

from primform.series import TPoly, monomials

ORDER = 4
coef = st.fractions(min_value=-3, max_value=3, max_denominator=3)
mono = st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(lambda a: sum(a) <= ORDER)
polys = st.dictionaries(mono, coef, max_size=6).map(lambda c: TPoly(c, 2, ORDER))

t1, t2 = sympy.symbols("t1 t2")


def to_sympy(p):
    return sum(sympy.Rational(x.numerator, x.denominator) * t1 ** a[0] * t2 ** a[1]
               for a, x in p.c.items())


def truncate_sympy(expr, order):
    poly = sympy.Poly(sympy.expand(expr), t1, t2)
    return sum(c * t1 ** i * t2 ** j for (i, j), c in poly.terms() if i + j <= order)


@settings(max_examples=80, deadline=None)
@given(polys, polys)
def test_product_matches_sympy(p, q):
    want = truncate_sympy(to_sympy(p) * to_sympy(q), ORDER)
    assert sympy.expand(to_sympy(p * q) - want) == 0


@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p * q == q * p


@given(polys)
def test_inverse(p):
    p = p + 1 - p.const_term()      # make it a unit
    assert p * p.inverse() == TPoly.const(1, 2, ORDER)


@given(polys)
def test_derivative_matches_sympy(p):
    for i, t in enumerate((t1, t2)):
        want = truncate_sympy(sympy.diff(to_sympy(p), t), ORDER)
        assert sympy.expand(to_sympy(p.derivative(i)) - want) == 0


def test_subs_inverts_a_coordinate_change():
    x = TPoly.var(0, 2, ORDER)
    y = TPoly.var(1, 2, ORDER)
    tau = [x - y * y * Fraction(1, 2), y]
    back = [x + y * y * Fraction(1, 2), y]
    assert [c.subs(back) for c in tau] == [x, y]


def test_monomials_count():
    # monomials of total degree <= 4 in two variables
    assert len(list(monomials(2, 4))) == 15


def test_pretty():
    x = TPoly.var(0, 2, ORDER)
    y = TPoly.var(1, 2, ORDER)
    p = x * x * y * Fraction(1, 2) - y * y * y * y * Fraction(1, 24)
    assert p.pretty() == "1/2*t1^2*t2 - 1/24*t2^4"
    assert TPoly({}, 2, ORDER).pretty() == "0"
    assert (-x).pretty() == "-t1"
