from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from primform.errors import NotAComplex, ValidationError
from primform.graded import GradedBasisSpace, LinMap, koszul_sign, sign, vadd, vscale
from primform.homology import Echelon, homology, inverse_matrix, kernel, matrix_rank, rank, solve_linear

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=4)
sparse = st.dictionaries(st.integers(0, 5), rationals.filter(bool), max_size=6)


@given(sparse, sparse, rationals)
def test_vadd_is_linear(a, b, c):
    s = vadd(a, b, c)
    for k in range(6):
        assert s.get(k, 0) == a.get(k, 0) + c * b.get(k, 0)
    assert all(s.values())


@given(sparse, rationals)
def test_vscale_drops_zeros(a, c):
    v = vscale(a, c)
    assert all(v.values())
    if c == 0:
        assert v == {}


def test_sign():
    assert sign(0) == 1 and sign(3) == -1 and sign(-2) == 1


@given(st.permutations(range(4)), st.lists(st.integers(0, 3), min_size=4, max_size=4))
def test_koszul_sign_multiplicative(perm, degs):
    # applying a permutation and then its inverse gives back the original order
    inv = [perm.index(i) for i in range(4)]
    moved = [degs[p] for p in perm]
    assert koszul_sign(perm, degs) * koszul_sign(inv, moved) == 1


def test_koszul_transposition_of_odds():
    assert koszul_sign([1, 0], [1, 1]) == -1
    assert koszul_sign([1, 0], [1, 2]) == 1


def test_space_rejects_duplicate_names():
    with pytest.raises(ValidationError):
        GradedBasisSpace([("a", 0, 0), ("a", 1, 0)])


def test_space_blocks_and_parity():
    V = GradedBasisSpace([("a", 0, 0), ("b", 1, 0), ("c", Fraction(2, 3), 1, 0)])
    assert V.parity(1) == 1
    assert V.parity(2) == 0
    assert V.blocks()[(Fraction(1), Fraction(0))] == [1]
    assert V.dimension(0, 0) == 1


def test_linmap_homogeneity_is_enforced():
    V = GradedBasisSpace([("a", 0, 0), ("b", 1, 0)])
    LinMap(V, V, {0: {1: 1}}, degree=1)
    with pytest.raises(ValidationError):
        LinMap(V, V, {0: {1: 1}}, degree=0)


def test_linmap_compose():
    V = GradedBasisSpace([("a", 0, 0), ("b", 1, 0), ("c", 2, 0)])
    d = LinMap(V, V, {0: {1: 2}, 1: {2: 3}}, degree=1)
    assert d.compose(d).cols == {0: {2: 6}}


# -- elimination against sympy --------------------------------------------------

matrices = st.integers(1, 5).flatmap(
    lambda m: st.integers(1, 5).flatmap(
        lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n),
                           min_size=m, max_size=m)))


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rank_matches_sympy(rows):
    # rows are fed unnormalized; the oracle is sympy's rank over Q
    vecs = [{j: Fraction(x) for j, x in enumerate(r) if x} for r in rows]
    assert rank(vecs) == sympy.Matrix(rows).rank()
    assert matrix_rank([[Fraction(x) for x in r] for r in rows]) == sympy.Matrix(rows).rank()


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_kernel_is_kernel(rows):
    n = len(rows[0])
    cols = lambda j: {i: Fraction(rows[i][j]) for i in range(len(rows)) if rows[i][j]}
    ker = kernel(n, cols)
    assert len(ker) == n - sympy.Matrix(rows).rank()
    for v in ker:
        image = {}
        for j, c in v.items():
            image = vadd(image, cols(j), c)
        assert image == {}


@settings(max_examples=40, deadline=None)
@given(matrices)
def test_echelon_solve(rows):
    e = Echelon()
    for i, r in enumerate(rows):
        e.add({j: Fraction(x) for j, x in enumerate(r) if x}, tag=i)
    target = {}
    for i, r in enumerate(rows):
        target = vadd(target, {j: Fraction(x) for j, x in enumerate(r) if x}, i + 1)
    combo = e.solve(target)
    assert combo is not None
    back = {}
    for i, c in combo.items():
        back = vadd(back, {j: Fraction(x) for j, x in enumerate(rows[i]) if x}, c)
    assert back == target


def test_inverse_matrix_matches_sympy():
    M = [[2, 1, 0], [1, 3, 1], [0, 1, 4]]
    inv = inverse_matrix([[Fraction(x) for x in r] for r in M])
    assert sympy.Matrix(inv) == sympy.Matrix(M).inv()


def test_solve_linear():
    cols = [{0: Fraction(1)}, {0: Fraction(1), 1: Fraction(1)}]
    assert solve_linear(cols, {0: Fraction(3), 1: Fraction(1)}) == {0: 2, 1: 1}


def test_homology_of_a_small_complex():
    # a -> b -> 0 with d(a) = b, plus a lonely cycle c: homology is spanned by c
    V = GradedBasisSpace([("a", 0, 0), ("b", 1, 0), ("c", 1, 0)])
    d = LinMap(V, V, {0: {1: 1}}, degree=1)
    h = homology(d)
    assert h.dim == 1
    assert h.is_boundary({1: Fraction(1)})
    assert h.project({2: Fraction(1)}) == {0: 1}


def test_homology_rejects_non_complex():
    V = GradedBasisSpace([("a", 0, 0), ("b", 1, 0), ("c", 2, 0)])
    d = LinMap(V, V, {0: {1: 1}, 1: {2: 1}}, degree=1)
    with pytest.raises(NotAComplex):
        homology(d)
