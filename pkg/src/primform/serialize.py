"""JSON input and output.

Rationals are always written as strings ("3", "-1/2").  Three input formats
are understood, told apart by the "format" field:

* ``primform/dg-algebra``: a finite dg algebra by basis, product and
  differential, optionally with Calabi-Yau data.
* ``primform/calculus-package``: explicit tables of a calculus package.
* ``primform/polynomial-model``: the weight-graded model of x^n/n, built on
  load with the requested weight cap.
"""

import json
from fractions import Fraction
from pathlib import Path

from .calculus import CalculusPackage, CYData
from .errors import ParseError
from .graded import GradedBasisSpace, Q
from .hochschild import DgAlgebraSpec
from .polynomial import polynomial_cy, polynomial_package

DG_FORMAT = "primform/dg-algebra"
PACKAGE_FORMAT = "primform/calculus-package"
POLY_FORMAT = "primform/polynomial-model"


def fstr(x):
    return str(Fraction(x))


def _q(x, where):
    try:
        return Q(x)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {x!r}", stage="parse",
                         witness={"location": where}) from exc


def dumps(obj):
    """Deterministic JSON text."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", stage="parse",
                         witness={"location": str(path)}) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", stage="parse",
                         witness={"location": f"{path}:{exc.lineno}:{exc.colno}"}) from exc


# -- vectors by name ------------------------------------------------------------

def vec_to_json(space, v):
    return {space.name(i): fstr(c) for i, c in sorted(v.items()) if c}


def vec_from_json(space, obj, where):
    if not isinstance(obj, dict):
        raise ParseError("expected an object {basis name: coefficient}", stage="parse",
                         witness={"location": where})
    out = {}
    for name, c in obj.items():
        if name in space._index:
            i = space.index(name)
        else:
            try:
                i = int(name)
            except ValueError:
                raise ParseError(f"unknown basis element {name!r}", stage="parse",
                                 witness={"location": where}) from None
            if not 0 <= i < space.dim:
                raise ParseError(f"basis index {i} out of range", stage="parse",
                                 witness={"location": where})
        x = _q(c, f"{where}.{name}")
        if x:
            out[i] = x
    return out


# -- dg algebras ----------------------------------------------------------------

def algebra_to_json(A):
    names = [A.space.name(i) for i in range(A.n)]
    obj = {"format": DG_FORMAT, "name": A.name,
           "basis": [{"name": names[i], "degree": A.deg[i]} for i in range(A.n)],
           "unit": names[A.unit],
           "product": [[names[i], names[j], {names[k]: fstr(c) for k, c in sorted(v.items())}]
                       for (i, j), v in sorted(A.mult.items())],
           "differential": {names[i]: {names[k]: fstr(c) for k, c in sorted(v.items())}
                            for i, v in sorted(A.diff.items())}}
    if A.cy_dimension is not None:
        obj["cy_dimension"] = A.cy_dimension
    if A.cy is not None:
        obj["cy"] = {k: ({str(a): fstr(b) for a, b in v.items()} if isinstance(v, dict) else fstr(v))
                     for k, v in A.cy.items()}
    return obj


def algebra_from_json(obj):
    where = "algebra"
    try:
        basis = obj["basis"]
        names = [b["name"] for b in basis]
        degrees = [b["degree"] for b in basis]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing field {exc}", stage="parse", witness={"location": where}) from exc
    idx = {n: i for i, n in enumerate(names)}

    def ix(n, loc):
        if n not in idx:
            raise ParseError(f"unknown basis element {n!r}", stage="parse", witness={"location": loc})
        return idx[n]

    mult = {}
    for k, entry in enumerate(obj.get("product", [])):
        loc = f"product[{k}]"
        if not (isinstance(entry, list) and len(entry) == 3):
            raise ParseError("product entries are [a, b, {c: coeff}]", stage="parse",
                             witness={"location": loc})
        a, b, v = entry
        mult[(ix(a, loc), ix(b, loc))] = {ix(c, loc): _q(x, loc) for c, x in v.items()}
    diff = {}
    for a, v in obj.get("differential", {}).items():
        loc = f"differential.{a}"
        diff[ix(a, loc)] = {ix(c, loc): _q(x, loc) for c, x in v.items()}
    unit = ix(obj.get("unit", names[0]), "unit")
    return DgAlgebraSpec(names, degrees, mult, diff, unit, obj.get("cy_dimension"),
                         obj.get("connected", True), obj.get("name", "algebra"), obj.get("cy"))


def cy_from_json(P, obj, where="cy"):
    if obj is None:
        return None
    try:
        w = _q(obj["w"], f"{where}.w")
        v1 = vec_from_json(P.O, obj["v1"], f"{where}.v1")
        trace = vec_from_json(P.O, obj["trace"], f"{where}.trace")
    except KeyError as exc:
        raise ParseError(f"missing field {exc}", stage="parse", witness={"location": where}) from exc
    return CYData(w, v1, trace, obj.get("w_parity"))


def cy_to_json(P, cy):
    return {"w": fstr(cy.w), "w_parity": cy.w_parity,
            "v1": vec_to_json(P.O, cy.v1), "trace": vec_to_json(P.O, cy.trace)}


# -- calculus packages ----------------------------------------------------------

def _space_to_json(V):
    return [[e.name, fstr(e.deg), fstr(e.wt), e.parity] for e in V.basis]


def _space_from_json(obj, where):
    try:
        return GradedBasisSpace([(n, _q(d, where), _q(w, where), p) for n, d, w, p in obj])
    except (TypeError, ValueError) as exc:
        raise ParseError("basis entries are [name, degree, weight, parity]", stage="parse",
                         witness={"location": where}) from exc


def _lin_to_json(src, dst, table):
    return {src.name(j): (None if v is None else vec_to_json(dst, v))
            for j, v in sorted(table.items())}


def _lin_from_json(src, dst, obj, where):
    out = {}
    for name, v in obj.items():
        j = src.index(name) if name in src._index else None
        if j is None:
            raise ParseError(f"unknown basis element {name!r}", stage="parse",
                             witness={"location": where})
        out[j] = None if v is None else vec_from_json(dst, v, f"{where}.{name}")
    return out


def _bil_to_json(A, B, C, table):
    return [[A.name(i), B.name(j), None if v is None else vec_to_json(C, v)]
            for (i, j), v in sorted(table.items())]


def _bil_from_json(A, B, C, obj, where):
    out = {}
    for k, entry in enumerate(obj):
        loc = f"{where}[{k}]"
        try:
            a, b, v = entry
            key = (A.index(a), B.index(b))
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError("table entries are [a, b, vector or null]", stage="parse",
                             witness={"location": loc}) from exc
        out[key] = None if v is None else vec_from_json(C, v, loc)
    return out


def package_to_json(P, cy=None):
    T, O = P.T, P.O
    meta = {k: (fstr(v) if isinstance(v, Fraction) or (k == "omega_weight_complete" and v is not None)
                else v)
            for k, v in P.meta.items()}
    obj = {"format": PACKAGE_FORMAT, "name": P.name, "sigma": fstr(P.sigma),
           "T": _space_to_json(T), "O": _space_to_json(O),
           "d_T": _lin_to_json(T, T, P.d_T), "d_O": _lin_to_json(O, O, P.d_O),
           "B": _lin_to_json(O, O, P.B),
           "product": _bil_to_json(T, T, T, P.prod), "bracket": _bil_to_json(T, T, T, P.bracket),
           "contraction": _bil_to_json(T, O, O, P.i_table),
           "lie": _bil_to_json(T, O, O, P.L_table),
           "f": vec_to_json(T, P.f_class), "deg": vec_to_json(T, P.deg_class),
           "unit": vec_to_json(T, P.unit_class), "meta": meta}
    if cy is not None:
        obj["cy"] = cy_to_json(P, cy)
    return obj


def package_from_json(obj):
    try:
        T = _space_from_json(obj["T"], "T")
        O = _space_from_json(obj["O"], "O")
        P = CalculusPackage(
            T=T, O=O,
            d_T=_lin_from_json(T, T, obj["d_T"], "d_T"),
            d_O=_lin_from_json(O, O, obj["d_O"], "d_O"),
            prod=_bil_from_json(T, T, T, obj["product"], "product"),
            bracket=_bil_from_json(T, T, T, obj["bracket"], "bracket"),
            B=_lin_from_json(O, O, obj["B"], "B"),
            i_table=_bil_from_json(T, O, O, obj["contraction"], "contraction"),
            L_table=_bil_from_json(T, O, O, obj["lie"], "lie"),
            f_class=vec_from_json(T, obj["f"], "f"),
            deg_class=vec_from_json(T, obj["deg"], "deg"),
            unit_class=vec_from_json(T, obj["unit"], "unit"),
            sigma=_q(obj.get("sigma", "0"), "sigma"),
            name=obj.get("name", "package"), meta=dict(obj.get("meta", {})))
    except KeyError as exc:
        raise ParseError(f"missing field {exc}", stage="parse",
                         witness={"location": "calculus-package"}) from exc
    wc = P.meta.get("omega_weight_complete")
    if wc is not None:
        P.meta["omega_weight_complete"] = _q(wc, "meta.omega_weight_complete")
    return P, cy_from_json(P, obj.get("cy"))


def polynomial_from_json(obj, weight_cap=None):
    """(package, cy); ``weight_cap`` overrides the file's cap when given."""
    try:
        n = int(obj["n"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError("polynomial model needs an integer n", stage="parse",
                         witness={"location": "n"}) from exc
    W = weight_cap if weight_cap is not None else obj.get("weight_cap")
    W = None if W in (None, "auto") else _q(W, "weight_cap")
    P = polynomial_package(n, W, _q(obj.get("f_coeff", "1"), "f_coeff"), obj.get("name"))
    cy = cy_from_json(P, obj["cy"]) if "cy" in obj else polynomial_cy(P)
    return P, cy


def polynomial_to_json(n, weight_cap="auto", f_coeff=1, name=None):
    obj = {"format": POLY_FORMAT, "n": n, "weight_cap": weight_cap if weight_cap == "auto"
           else fstr(weight_cap), "f_coeff": fstr(f_coeff)}
    if name:
        obj["name"] = name
    return obj


def input_kind(obj):
    fmt = obj.get("format") if isinstance(obj, dict) else None
    if fmt in (DG_FORMAT, PACKAGE_FORMAT, POLY_FORMAT):
        return fmt
    raise ParseError(f"unknown input format {fmt!r}", stage="parse",
                     witness={"location": "format",
                              "expected": [DG_FORMAT, PACKAGE_FORMAT, POLY_FORMAT]})


# -- output helpers -------------------------------------------------------------

def matrix_to_json(m):
    return [[fstr(x) for x in row] for row in m]


def jsonable(x):
    """Recursively turn Fractions and tuples into JSON-friendly values."""
    if isinstance(x, Fraction):
        return fstr(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    return str(x)
