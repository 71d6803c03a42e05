"""Primitive forms and the Frobenius manifold, checked against a classical oracle.

For f = x^n / n with unfolding F = x^n / n + t1 + t2 x + ... + t_{n-1} x^{n-2}
the metric is the residue pairing Res(dF_i dF_j dx / F') and the product is
multiplication in Q[t][x] / (F').  Both are recomputed here with sympy and
compared with what the package builds from its Hochschild data.
"""

from fractions import Fraction
from itertools import product

import pytest
import sympy

from primform.pipeline import run_pipeline
from primform.polynomial import polynomial_cy, polynomial_package

ORDER = 4
x = sympy.Symbol("x")


def _syms(l, name="t"):
    return sympy.symbols(f"{name}1:{l + 1}")


def to_sympy(p, ts):
    return sum((sympy.Rational(c.numerator, c.denominator) * sympy.Mul(*(t ** a for t, a in zip(ts, al)))
                for al, c in p.c.items()), sympy.Integer(0))


def truncate(expr, ts, order=ORDER):
    expr = sympy.expand(expr)
    if expr == 0:
        return expr
    poly = sympy.Poly(expr, *ts)
    return sum((c * sympy.Mul(*(t ** a for t, a in zip(ts, al)))
                for al, c in poly.terms() if sum(al) <= order), sympy.Integer(0))


class Oracle:
    """Residue pairing and Jacobian product of the unfolding of x^n / n."""

    def __init__(self, n):
        self.n = n
        self.t = _syms(n - 1)
        self.F = x ** n / n + sum(t * x ** i for i, t in enumerate(self.t))
        self.Fp = sympy.diff(self.F, x)
        self.phi = [sympy.diff(self.F, t) for t in self.t]

    def res(self, g):
        # sum of the finite residues of g dx / F'; F' is monic of degree n - 1
        r = sympy.rem(sympy.expand(g), self.Fp, x)
        return sympy.expand(sympy.Poly(r, x).coeff_monomial(x ** (self.n - 2)))

    def eta(self, i, j):
        return self.res(self.phi[i] * self.phi[j])

    def product(self, i, j):
        """Coefficients of phi_i phi_j in the basis phi, modulo F'."""
        r = sympy.Poly(sympy.rem(sympy.expand(self.phi[i] * self.phi[j]), self.Fp, x), x)
        return [sympy.expand(r.coeff_monomial(x ** k)) for k in range(self.n - 1)]


@pytest.fixture(scope="module")
def models(a2, a3):
    return {3: a2, 4: a3}


@pytest.mark.criterion(9, "primitive form: P1-P5, zeta(0) = zeta_1, uniqueness at every order through N")
@pytest.mark.parametrize("model", ["a2", "a3", "trivial"])
def test_primitive_form_certificates(model, request):
    run = request.getfixturevalue(model)
    pf = run.pf
    for name, cert in pf.certificates.items():
        assert cert["pass"], name
    names = " ".join(pf.certificates)
    for p in ("P1", "P2", "P3", "P4", "P5"):
        assert p in names
    assert pf.certificates["zeta(0) = zeta_1"]["pass"]
    assert pf.r == 0


@pytest.mark.criterion(9, "primitive form: P1-P5, zeta(0) = zeta_1, uniqueness at every order through N")
@pytest.mark.parametrize("model", ["a2", "a3", "trivial"])
def test_primitive_form_is_unique_order_by_order(model, request):
    run = request.getfixturevalue(model)
    orders = {u["t_order"]: u for u in run.pf.uniqueness}
    assert set(range(ORDER + 1)) <= set(orders)
    assert all(orders[k]["rank"] == "full" for k in range(ORDER + 1))


@pytest.mark.criterion(9, "primitive form: P1-P5, zeta(0) = zeta_1, uniqueness at every order through N")
@pytest.mark.parametrize("model", ["a2", "a3"])
def test_primitive_form_of_an_is_the_volume_form(model, request):
    run = request.getfixturevalue(model)
    dx = run.P.O.index("x^0.dx")
    assert run.pf.zeta == {(0,) * run.jac.l: {(0, dx): 1}}


@pytest.mark.criterion(10, "Frobenius manifold: WDVV, Lie_E laws, d^3 F = c_abc, classical A2/A3 oracle")
@pytest.mark.parametrize("model", ["a2", "a3", "trivial"])
def test_frobenius_report(model, request):
    run = request.getfixturevalue(model)
    rep = run.fr.report
    flags = {k: v for k, v in rep.items() if isinstance(v, bool)}
    assert all(flags.values()), [k for k, v in flags.items() if not v]
    for key in ("WDVV", "Lie_E(o) = o", "Lie_E(eta) = (2 - w) eta", "d^3 F = c_abc",
                "eta constant in flat coordinates"):
        assert rep[key] is True
    assert rep["truncation"] == f"mod t^{ORDER + 1}"


@pytest.mark.criterion(10, "Frobenius manifold: WDVV, Lie_E laws, d^3 F = c_abc, classical A2/A3 oracle")
@pytest.mark.parametrize("n", [3, 4])
def test_metric_and_product_match_the_residue_oracle(n, models):
    fr = models[n].fr
    o = Oracle(n)
    l = n - 1
    for i, j in product(range(l), repeat=2):
        assert sympy.expand(to_sympy(fr.eta[i][j], o.t) - truncate(o.eta(i, j), o.t)) == 0, (i, j)
        want = o.product(i, j)
        got = [to_sympy(c, o.t) for c in fr.C[(i, j)]]
        assert [sympy.expand(g - truncate(w, o.t)) for g, w in zip(got, want)] == [0] * l, (i, j)


@pytest.mark.criterion(10, "Frobenius manifold: WDVV, Lie_E laws, d^3 F = c_abc, classical A2/A3 oracle")
@pytest.mark.parametrize("n", [3, 4])
def test_flat_coordinates_flatten_the_oracle_metric(n, models):
    fr = models[n].fr
    o = Oracle(n)
    l = n - 1
    tau = _syms(l, "s")
    t_of_tau = [to_sympy(p, tau) for p in fr.inverse_flat]
    sub = dict(zip(o.t, t_of_tau))
    # d F / d tau_a by the chain rule through the package's t(tau)
    dF = [sum((sympy.diff(t_of_tau[k], tau[a]) * o.phi[k] for k in range(l)), sympy.Integer(0))
          for a in range(l)]
    F = to_sympy(fr.potential, tau)
    for a, b in product(range(l), repeat=2):
        g = truncate(o.res(dF[a] * dF[b]).subs(sub), tau)
        assert g == sympy.Rational(fr.eta_flat[a][b].numerator, fr.eta_flat[a][b].denominator)
    for a, b, d in product(range(l), repeat=3):
        c = truncate(o.res(dF[a] * dF[b] * dF[d]).subs(sub), tau)
        assert sympy.expand(truncate(sympy.diff(F, tau[a], tau[b], tau[d]), tau) - c) == 0, (a, b, d)


@pytest.mark.criterion(10, "Frobenius manifold: WDVV, Lie_E laws, d^3 F = c_abc, classical A2/A3 oracle")
def test_a2_potential(a2):
    t1, t2 = _syms(2)
    F = to_sympy(a2.fr.potential, (t1, t2))
    assert sympy.expand(F - (t1 ** 2 * t2 / 2 - t2 ** 4 / 24)) == 0
    assert a2.report["frobenius"]["potential_text"] == "1/2*t1^2*t2 - 1/24*t2^4"
    assert a2.fr.eta_flat == [[0, 1], [1, 0]]
    assert [p.pretty() for p in a2.fr.flat] == ["t1", "t2"]


def test_a3_potential(a3):
    assert a3.fr.potential.pretty() == "1/2*t1^2*t3 + 1/2*t1*t2^2 - 1/4*t2^2*t3^2 + 1/60*t3^5"
    assert [p.pretty() for p in a3.fr.flat] == ["t1 - 1/2*t3^2", "t2", "t3"]


@pytest.mark.criterion(10, "Frobenius manifold: WDVV, Lie_E laws, d^3 F = c_abc, classical A2/A3 oracle")
def test_trivial_algebra_potential(trivial):
    fr = trivial.fr
    c = fr.eta_flat[0][0]
    assert fr.potential.c == {(3,): Fraction(c, 6)}
    assert fr.report["normalization"]["eta(e, e) at t = 0"] == str(c)


def test_rescaling_v1_rescales_the_potential(a2):
    P = polynomial_package(3, Fraction(8))
    cy = polynomial_cy(P).rescaled(2)
    stages = {}
    _, fr = run_pipeline(P, cy, ORDER, validation=False, stages=stages)
    assert fr.potential.c == {al: 4 * v for al, v in a2.fr.potential.c.items()}
    assert [p.pretty() for p in fr.flat] == [p.pretty() for p in a2.fr.flat]
    dx = P.O.index("x^0.dx")
    assert stages["pf"].zeta == {(0, 0): {(0, dx): 2}}
