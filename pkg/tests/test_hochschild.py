from fractions import Fraction

import pytest

from primform.corpus import ALGEBRAS, exterior_algebra
from primform.errors import ValidationError
from primform.hochschild import (ChainComplex, CochainComplex, DgAlgebraSpec,
                                 compute_tpoly_and_omega, cup, gerstenhaber, mm_bracket_vanishes,
                                 special_cochains)

VALID = ["trivial", "exterior1", "exterior2", "dgex"]
CORRUPT = {"corrupt_d2": "d_squared_zero", "corrupt_leibniz": "leibniz",
           "corrupt_assoc": "associativity"}


@pytest.mark.parametrize("name", VALID)
def test_valid_algebras_pass_axioms(name):
    ax = ALGEBRAS[name]().check_axioms()
    assert all(w is None for w in ax.values()), ax


@pytest.mark.parametrize("name,axiom", sorted(CORRUPT.items()))
def test_each_corruption_breaks_exactly_one_axiom(name, axiom):
    ax = ALGEBRAS[name]().check_axioms()
    broken = [k for k, w in ax.items() if w is not None]
    assert broken == [axiom]


def test_associativity_witness_names_a_triple():
    w = ALGEBRAS["corrupt_assoc"]().check_axioms()["associativity"]
    assert len(w["triple"]) == 3


@pytest.mark.criterion(1, "axiom equivalence: [m,m]_G = 0 iff d^2 = 0, Leibniz, associativity")
@pytest.mark.parametrize("name", VALID + sorted(CORRUPT))
def test_mm_bracket_equivalence(name):
    A = ALGEBRAS[name]()
    ax = A.check_axioms()
    axioms = all(ax[k] is None for k in ("d_squared_zero", "leibniz", "associativity"))
    zero, _ = mm_bracket_vanishes(A, 3)
    assert zero == axioms
    assert zero == (name in VALID)


@pytest.mark.parametrize("name", ["exterior1", "exterior2", "dgex"])
def test_complexes_square_to_zero(name):
    A = ALGEBRAS[name]()
    for C in (CochainComplex(A, 3), ChainComplex(A, 3)):
        d, delta = C.operator("d"), C.operator("delta")
        assert d.compose(d).is_zero()
        assert delta.compose(delta).is_zero()
        assert (d.compose(delta) + delta.compose(d)).is_zero()


@pytest.mark.parametrize("name", ["exterior1", "dgex"])
def test_cup_unit(name):
    A = ALGEBRAS[name]()
    L = 3
    sc = special_cochains(A, L)
    for g in (sc["deg"], sc["m2"]):
        assert cup(A, sc["unit"], g) == g


def test_bracket_antisymmetry_on_cochains():
    A = exterior_algebra(1)
    sc = special_cochains(A, 3)
    f, g = sc["deg"], sc["m1"]      # shifted degrees 0 and 1
    lhs = gerstenhaber(A, f, g)
    rhs = gerstenhaber(A, g, f)
    short = lambda c: {w: v for w, v in c.comps.items() if len(w) <= 1}
    neg = {w: {k: -c for k, c in v.items()} for w, v in short(rhs).items()}
    assert short(lhs) == neg


@pytest.mark.parametrize("name", ["exterior1", "exterior2", "dgex"])
def test_truncation_blocks_stabilize(name):
    A = ALGEBRAS[name]()
    P3, P4 = compute_tpoly_and_omega(A, 3), compute_tpoly_and_omega(A, 4)
    for sp in ("T", "O"):
        b3 = {k: len(v) for k, v in getattr(P3, sp).blocks().items()}
        b4 = {k: len(v) for k, v in getattr(P4, sp).blocks().items()}
        assert all(b4.get(k) == n for k, n in b3.items())


def test_exterior1_ranks():
    P = compute_tpoly_and_omega(exterior_algebra(1), 4)
    cert = P.certificate
    assert cert["stable"]
    assert [cert["T_ranks_by_arity"][m] for m in range(4)] == [2, 2, 2, 2]
    assert [cert["O_ranks_by_length"][n] for n in range(4)] == [2, 2, 2, 2]


def test_truncation_length_must_be_two_or_more():
    with pytest.raises(ValidationError):
        compute_tpoly_and_omega(exterior_algebra(1), 1)


def test_special_classes():
    P = compute_tpoly_and_omega(exterior_algebra(1), 4)
    assert P.unit_class and P.deg_class
    # with d = 0 the product part of m is delta-exact, so the class of f vanishes
    assert P.f_class == {}
    Q = compute_tpoly_and_omega(ALGEBRAS["dgex"](), 4)
    assert Q.f_class


def test_spec_accepts_fractions_in_tables():
    A = DgAlgebraSpec(["1", "x"], [0, 2], {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}},
                      {}, name="k[x]/x^2")
    assert all(w is None for w in A.check_axioms().values())
    assert mm_bracket_vanishes(A, 3)[0]
    assert A.mul({1: Fraction(1, 2)}, {0: Fraction(2)}) == {1: 1}
