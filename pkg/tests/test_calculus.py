import copy
from fractions import Fraction

import pytest

from primform.calculus import (CARTAN, CYData, contraction_iso_check, eta_pairing, hodge_data,
                               j_pairing, jacobian_ring, validate_package)
from primform.errors import Degenerate, HodgePropertyViolated, NotQuasiIso
from primform.pipeline import classical_data
from primform.polynomial import polynomial_cy, polynomial_package


@pytest.mark.criterion(2, "Cartan calculus: seven identities plus [d, i_X] and [d, L_X], exhaustive at L <= 4")
def test_every_identity_on_every_small_package(small_packages):
    for name, P in small_packages.items():
        rep = validate_package(P)
        assert rep.passed, (name, rep.failed())
        for identity in CARTAN:
            r = rep.result(identity)
            assert r.passed
            assert r.checked > 0 or P.T.dim == 1, (name, identity)


@pytest.mark.criterion(2, "Cartan calculus: seven identities plus [d, i_X] and [d, L_X], exhaustive at L <= 4")
def test_cartan_on_the_a2_pipeline_package(a2):
    entries = {e["identity"]: e for e in a2.report["validation"]["identities"]}
    for identity in CARTAN:
        assert entries[identity]["pass"] and entries[identity]["checked"] > 0


@pytest.mark.criterion(3, "Euler identities f = [deg, f], dX = [f, X] and deformed F = E F + [deg, F]")
def test_euler_identities_on_classes(small_packages):
    for name, P in small_packages.items():
        rep = validate_package(P, identities={"Euler f = [deg, f]", "d = [f, -]"})
        assert rep.passed, name
        r = rep.result("d = [f, -]")
        assert r.checked > 0 or P.T.dim == 1
        assert r.checked + r.skipped == P.T.dim


def test_validation_catches_a_corrupted_table():
    P = polynomial_package(3, Fraction(3))
    Q = copy.deepcopy(P)
    # flip the sign of one contraction entry
    key = next(k for k, v in sorted(Q.i_table.items()) if v)
    Q.i_table[key] = {a: -x for a, x in Q.i_table[key].items()}
    rep = validate_package(Q)
    assert not rep.passed
    assert rep.failed()


def test_milnor_number_of_x_cubed():
    P = polynomial_package(3, Fraction(3))
    assert jacobian_ring(P).l == 2


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_milnor_number_of_an(n):
    P = polynomial_package(n, Fraction(3))
    assert jacobian_ring(P).l == n - 1


def test_contraction_is_an_isomorphism_on_a2():
    P = polynomial_package(3, Fraction(3))
    cert = contraction_iso_check(P, polynomial_cy(P))
    assert cert.iso and cert.chain_map


def test_contraction_rejects_a_bad_v1():
    P = polynomial_package(3, Fraction(3))
    cy = polynomial_cy(P)
    # x dx does not generate Omega_f as a Jac-module
    bad = CYData(cy.w, {P.O.index("x^1.dx"): 1}, cy.trace, cy.w_parity)
    with pytest.raises(NotQuasiIso):
        contraction_iso_check(P, bad)


def test_eta_and_j_on_a2():
    P = polynomial_package(3, Fraction(3))
    cy = polynomial_cy(P)
    H, jac, iso, hd, eta, J = classical_data(P, cy)
    assert eta == [[0, 1], [1, 0]]
    assert J == eta          # both Jacobian classes are even
    assert [str(q) for q in hd.exponents] == ["0", "1/3"]


def test_eta_scales_with_v1():
    P = polynomial_package(3, Fraction(3))
    cy = polynomial_cy(P)
    jac = jacobian_ring(P)
    e1 = eta_pairing(P, jac, cy)
    e2 = eta_pairing(P, jac, cy.rescaled(3))
    assert e2 == [[9 * x for x in r] for r in e1]   # trace and v1 both scale


def test_degenerate_trace_is_rejected():
    P = polynomial_package(3, Fraction(3))
    cy = polynomial_cy(P)
    zero = CYData(cy.w, cy.v1, {}, cy.w_parity)
    with pytest.raises(Degenerate):
        eta_pairing(P, jacobian_ring(P), zero)


def test_strict_mode_rejects_fractional_exponents():
    P = polynomial_package(3, Fraction(3))
    cy = polynomial_cy(P)
    jac = jacobian_ring(P)
    iso = contraction_iso_check(P, cy, jac)
    with pytest.raises(HodgePropertyViolated):
        hodge_data(P, cy, jac, iso, strict=True)


def _hodge_properties(hd, w):
    hn = hd.hodge_numbers
    assert all(p >= 0 and q >= 0 for p, q in hn)
    assert hn.get((w, 0)) == 1
    for p, q in list(hn):
        assert hn.get((w - p, q), 0) == hn.get((p, w - q), 0)
    assert sorted(hd.exponents) == sorted(w - q for q in hd.exponents)


@pytest.mark.criterion(5, "Hodge numbers: vanishing, h^{w,0} = 1, symmetry, exponent duality")
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_hodge_numbers_of_an(n):
    P = polynomial_package(n, Fraction(3))
    cy = polynomial_cy(P)
    _, jac, _, hd, _, J = classical_data(P, cy)
    _hodge_properties(hd, cy.w)
    assert hd.exponents == [Fraction(k, n) for k in range(n - 1)]
    assert cy.w == Fraction(n - 2, n)


@pytest.mark.criterion(5, "Hodge numbers: vanishing, h^{w,0} = 1, symmetry, exponent duality")
def test_hodge_numbers_of_the_trivial_algebra(trivial):
    hd = trivial.hodge
    _hodge_properties(hd, trivial.cy.w)
    assert hd.exponents == [0]
    assert trivial.report["hodge_checks"] == {"duality": True, "exponent_duality": True,
                                              "h_negative_vanish": True, "h_w0_is_1": True}


def test_j_pairing_pairs_dual_pieces():
    P = polynomial_package(4, Fraction(3))
    cy = polynomial_cy(P)
    _, jac, _, hd, eta, _ = classical_data(P, cy)
    J = j_pairing(jac, eta, cy, hd)
    for i in range(jac.l):
        for j in range(jac.l):
            if J[i][j]:
                assert hd.exponents[i] + hd.exponents[j] == cy.w
