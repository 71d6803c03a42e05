from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from primform.derham import (GMConnection, HigherResiduePairing, Trivialized, VeryGoodSection,
                             build_filtered_derham, check_gm_identities, lp_mul, lp_negate_u)
from primform.errors import DegenerationFails
from primform.polynomial import polynomial_package


@pytest.mark.criterion(4, "Hodge-to-de-Rham degeneration: rank H0/uH0 = dim Omega_f = l, Im B meets Omega_f trivially")
@pytest.mark.parametrize("model", ["a2", "a3", "trivial"])
def test_degeneration_on_accepted_instances(model, request):
    run = request.getfixturevalue(model)
    deg = run.report["degeneration"]
    assert deg["rank_H0_mod_u"] == deg["dim_omega_f"] == run.jac.l
    assert all(b["u_injective"] and b["dim_H0"] == b["expected_free"] for b in deg["blocks"])
    assert run.H.report["im_B_meets_omega_f"] is False


@pytest.mark.criterion(4, "Hodge-to-de-Rham degeneration: rank H0/uH0 = dim Omega_f = l, Im B meets Omega_f trivially")
def test_degeneration_failure_is_detected():
    P = polynomial_package(3, Fraction(3), f_coeff=0)
    with pytest.raises(DegenerationFails) as exc:
        build_filtered_derham(P)
    assert exc.value.exit_code == 2
    assert exc.value.stage == "build_filtered_derham"
    assert exc.value.anchor == "prop:Hodge to de Rham"


@pytest.mark.criterion(6, "Gauss-Manin: [nabla_{u d/du}, d+uB] = d+uB, decomposition, deformed flatness at N = 3")
@pytest.mark.parametrize("model", ["a2", "a3"])
def test_gm_operator_identities(model, request):
    run = request.getfixturevalue(model)
    checks = check_gm_identities(run.H)
    for name in ("[nabla, d+uB] = d+uB", "decomposition"):
        assert checks[name]["pass"] and checks[name]["checked"] > 0


@pytest.mark.criterion(8, "very good section and K: eigen-equation, K = J u^w, K(S,S) bound, sesquilinearity")
@pytest.mark.parametrize("model", ["a2", "a3", "trivial"])
def test_very_good_section(model, request):
    run = request.getfixturevalue(model)
    sec = run.section
    assert sec.exponents == run.hodge.exponents
    for cert, q in zip(sec.certificates, sec.exponents):
        assert cert["nabla_zeta_minus_q_zeta_is_D_exact"]
        assert cert["q"] == str(q)
    # the eigen-equation again, through an independent coordinate solve
    nab = GMConnection(run.H)
    triv = Trivialized(run.H, sec)
    for i, z in enumerate(sec.zetas):
        assert triv.coords(nab(z)) == ({i: {0: sec.exponents[i]}} if sec.exponents[i] else {})


@pytest.mark.criterion(8, "very good section and K: eigen-equation, K = J u^w, K(S,S) bound, sesquilinearity")
@pytest.mark.parametrize("model", ["a2", "a3", "trivial"])
def test_higher_residue_pairing(model, request):
    run = request.getfixturevalue(model)
    K, J, w = run.K, run.J, run.cy.w
    for i in range(run.jac.l):
        for j in range(run.jac.l):
            want = {w: Fraction(J[i][j])} if J[i][j] else {}
            assert K.on_coords({i: {0: 1}}, {j: {0: 1}}) == want
    checks = run.report["K_checks"]
    assert checks["sesquilinearity"] and checks["u d/du derivation rule"]
    opp = run.report["opposite_module"]
    assert all(c["pass"] for c in opp.values())


@pytest.mark.criterion(8, "very good section and K: eigen-equation, K = J u^w, K(S,S) bound, sesquilinearity")
def test_k_on_opposite_module_is_bounded(a2):
    K, w = a2.K, a2.cy.w
    for k in range(1, 4):
        for m in range(1, 4):
            for i in range(2):
                for j in range(2):
                    val = K.on_coords({i: {-k: 1}}, {j: {-m: 1}})
                    assert all(e <= w - 2 for e in val)


laurent = st.dictionaries(st.integers(-3, 3).map(Fraction), st.integers(-3, 3).filter(bool), max_size=4)


@settings(max_examples=60, deadline=None)
@given(laurent, laurent)
def test_k_sesquilinear_in_u(a, b):
    # K(u a, b) = K(a, -u b) = u K(a, b) on coefficient series
    sec = VeryGoodSection([{}], [{}], [Fraction(0)], [Fraction(0)], Fraction(0), 0)
    K = HigherResiduePairing(sec, [[Fraction(1)]])
    A = {0: {int(e): c for e, c in a.items()}}
    B = {0: {int(e): c for e, c in b.items()}}
    uA = {0: {int(e) + 1: c for e, c in a.items()}}
    minus_uB = {0: {int(e) + 1: -c for e, c in b.items()}}
    base = K.on_coords(A, B)
    shifted = {e + 1: c for e, c in base.items()}
    assert K.on_coords(uA, B) == shifted
    assert K.on_coords(A, minus_uB) == shifted


def test_laurent_helpers():
    a = {Fraction(0): 1, Fraction(1): 2}
    assert lp_negate_u(a) == {0: 1, 1: -2}
    assert lp_mul(a, a) == {0: 1, 1: 4, 2: 4}
