from fractions import Fraction

import pytest

from primform.deformation import (bv_operator, deformed_gm_connection, evaluate_mc_residual,
                                  solve_maurer_cartan, ts_add, ts_truncate)
from primform.series import monomials


def _all_pass(checks):
    return {k: v for k, v in checks.items() if isinstance(v, dict) and not v.get("pass", True)}


@pytest.mark.parametrize("model", ["a2", "a3", "trivial"])
def test_bv_operator(model, request):
    run = request.getfixturevalue(model)
    checks = run.delta.checks
    assert not _all_pass(checks)
    assert checks["Delta^2 = 0"]["checked"] > 0


def test_bv_operator_ignores_the_scale_of_v1(a2):
    P = a2.P
    assert bv_operator(P, a2.cy.rescaled(Fraction(-5, 2))).table == a2.delta.table


@pytest.mark.criterion(7, "Maurer-Cartan residual zero through t-order 4, independent raw-table evaluator")
@pytest.mark.parametrize("model", ["a2", "a3"])
def test_maurer_cartan_residual_independent(model, request):
    run = request.getfixturevalue(model)
    P, mc = run.P, run.mc
    gamma = {al: v for al, v in mc.gamma.items() if sum(al) <= 4}
    res = evaluate_mc_residual(P.d_T, P.bracket, gamma, 4)
    assert {al: v for al, v in res.items() if sum(al) <= 4} == {}
    assert all(mc.residuals[:5])


@pytest.mark.criterion(7, "Maurer-Cartan residual zero through t-order 4, independent raw-table evaluator")
def test_residual_evaluator_sees_a_wrong_gamma(a2):
    P, mc = a2.P, a2.mc
    gamma = dict(mc.gamma)
    # add a bracket-unbalanced second-order term: t1 t2 times x theta
    X = {P.T.index("x^1.th"): Fraction(1)}
    gamma[(1, 1)] = X
    res = evaluate_mc_residual(P.d_T, P.bracket, gamma, 4)
    assert res


def test_maurer_cartan_is_linear_for_polynomial_models(a2):
    assert all(sum(al) == 1 for al in a2.mc.gamma)
    assert a2.mc.homogeneity["pass"]
    assert all(a2.mc.delta_closed)


def test_grading_of_the_deformation_space(a2):
    sp = a2.mc.space
    assert sp.t_degrees == [2, Fraction(4, 3)]
    assert sp.t_weights == [1, Fraction(2, 3)]


def test_maurer_cartan_at_a_lower_order(a2):
    mc = solve_maurer_cartan(a2.P, a2.delta, a2.jac, 2)
    assert mc.order == 2
    assert {al: v for al, v in a2.mc.gamma.items() if sum(al) <= 2} == mc.gamma


@pytest.mark.parametrize("model", ["a2", "a3", "trivial"])
def test_deformed_structure_checks(model, request):
    run = request.getfixturevalue(model)
    checks = run.ds.checks
    assert not _all_pass(checks)
    assert checks["d_gamma^2 = 0 on T"]["checked"] > 0


@pytest.mark.criterion(3, "Euler identities f = [deg, f], dX = [f, X] and deformed F = E F + [deg, F]")
@pytest.mark.parametrize("model", ["a2", "a3", "trivial"])
def test_deformed_euler_identity(model, request):
    run = request.getfixturevalue(model)
    c = run.ds.checks["F = E F + [deg, F]"]
    assert c["pass"] and c["order"] >= 5


def test_jacobian_ring_of_the_deformation(a2):
    ds = a2.ds
    # d2 o d2 = -t2 d1 for F = x^3/3 + t1 + t2 x
    C22 = ds.product[(1, 1)]
    assert C22[0].c == {(0, 1): -1}
    assert not C22[1].c
    assert [e.c for e in ds.e] == [{(0, 0): 1}, {}]
    assert [e.c for e in ds.E] == [{(1, 0): 1}, {(0, 1): Fraction(2, 3)}]


@pytest.mark.parametrize("model", ["a2", "a3"])
def test_deformed_lattice(model, request):
    run = request.getfixturevalue(model)
    assert not _all_pass(run.lattice.checks)
    assert all(r["rank"] == run.jac.l for r in run.lattice.checks["rank per t-order"]["rows"])


@pytest.mark.criterion(6, "Gauss-Manin: [nabla_{u d/du}, d+uB] = d+uB, decomposition, deformed flatness at N = 3")
def test_deformed_flatness_at_order_three(a2):
    # order 4 certifies commutators mod t^4, i.e. t-order 3
    _, checks = deformed_gm_connection(a2.ds, order=4)
    for name, c in checks.items():
        assert c["pass"], name
        assert c["checked"] > 0, name


@pytest.mark.criterion(6, "Gauss-Manin: [nabla_{u d/du}, d+uB] = d+uB, decomposition, deformed flatness at N = 3")
def test_pipeline_deformed_gm_report(a2):
    gm = a2.report["deformed_gauss_manin"]
    assert all(c["pass"] for c in gm.values())


def test_ts_helpers():
    a = {(0, 0): {0: Fraction(1)}, (1, 0): {1: Fraction(2)}}
    b = {(1, 0): {1: Fraction(-2)}, (0, 3): {0: Fraction(1)}}
    assert ts_add(a, b) == {(0, 0): {0: 1}, (0, 3): {0: 1}}
    assert ts_truncate(ts_add(a, b), 2) == {(0, 0): {0: 1}}
    assert len(list(monomials(2, 2))) == 6
