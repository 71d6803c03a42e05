import json
from fractions import Fraction

import pytest

from primform.corpus import ALGEBRAS, CORPUS_DIR, build_all
from primform.errors import ParseError
from primform.hochschild import compute_tpoly_and_omega
from primform.polynomial import polynomial_cy, polynomial_package
from primform.serialize import (algebra_from_json, algebra_to_json, cy_to_json, dumps, input_kind,
                                load_json, package_from_json, package_to_json, polynomial_from_json,
                                polynomial_to_json, vec_from_json)


@pytest.mark.parametrize("name", sorted(ALGEBRAS))
def test_algebra_round_trip(name):
    A = ALGEBRAS[name]()
    obj = algebra_to_json(A)
    B = algebra_from_json(json.loads(dumps(obj)))
    assert algebra_to_json(B) == obj
    assert B.mult == A.mult and B.diff == A.diff and B.deg == A.deg


def test_polynomial_package_round_trip():
    P = polynomial_package(3, Fraction(3))
    cy = polynomial_cy(P)
    obj = package_to_json(P, cy)
    Q, cy2 = package_from_json(json.loads(dumps(obj)))
    assert package_to_json(Q, cy2) == obj
    assert Q.i_table == P.i_table and Q.bracket == P.bracket
    assert cy2.w == cy.w and cy2.v1 == cy.v1 and cy2.trace == cy.trace


def test_truncated_entries_survive_a_round_trip():
    P = polynomial_package(3, Fraction(1))
    assert any(v is None for v in P.prod.values())
    Q, _ = package_from_json(json.loads(dumps(package_to_json(P))))
    assert {k for k, v in Q.prod.items() if v is None} == {k for k, v in P.prod.items() if v is None}


def test_hochschild_package_round_trip():
    P = compute_tpoly_and_omega(ALGEBRAS["exterior1"](), 3)
    Q, cy = package_from_json(json.loads(dumps(package_to_json(P))))
    assert cy is None
    assert package_to_json(Q) == package_to_json(P)


def test_polynomial_model_entry():
    P, cy = polynomial_from_json(polynomial_to_json(4, weight_cap=3))
    assert P.T.index("x^2.th") is not None
    assert cy.w == Fraction(1, 2)
    assert cy_to_json(P, cy)["v1"] == {"x^0.dx": "1"}
    with pytest.raises(ParseError):
        polynomial_from_json({"format": "x", "n": "three"})


def test_vectors_by_name_or_index():
    P = polynomial_package(3, Fraction(3))
    i = P.T.index("x^1.th")
    assert vec_from_json(P.T, {"x^1.th": "1/2"}, "v") == {i: Fraction(1, 2)}
    assert vec_from_json(P.T, {str(i): "2", "x^0": "0"}, "v") == {i: 2}
    with pytest.raises(ParseError) as exc:
        vec_from_json(P.T, {"y": 1}, "cy.v1")
    assert exc.value.witness["location"] == "cy.v1"
    with pytest.raises(ParseError):
        vec_from_json(P.T, {"999": 1}, "v")
    with pytest.raises(ParseError):
        vec_from_json(P.T, {"x^0": "one"}, "v")


def test_parse_errors_carry_a_location(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": \n  oops}')
    with pytest.raises(ParseError) as exc:
        load_json(bad)
    assert exc.value.witness["location"].startswith(f"{bad}:2:")
    assert exc.value.exit_code == 1
    with pytest.raises(ParseError):
        load_json(tmp_path / "missing.json")
    obj = algebra_to_json(ALGEBRAS["exterior1"]())
    obj["product"][0] = ["1", "z", {"1": "1"}]
    with pytest.raises(ParseError) as exc:
        algebra_from_json(obj)
    assert exc.value.witness["location"] == "product[0]"
    with pytest.raises(ParseError):
        input_kind({"format": "nonsense"})


def test_bundled_corpus_is_current():
    built = build_all()
    files = sorted(p.stem for p in CORPUS_DIR.glob("*.json"))
    assert files == sorted(built)
    for name, obj in built.items():
        assert (CORPUS_DIR / f"{name}.json").read_text() == dumps(obj), name


def test_dumps_is_canonical():
    a = dumps({"b": 1, "a": [1, {"d": 2, "c": 3}]})
    assert a == dumps(json.loads(a))
    assert a.index('"a"') < a.index('"b"')
