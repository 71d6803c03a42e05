"""Bundled example inputs.

The JSON files under ``corpus/`` are generated from the builders here
(``python -m primform.corpus`` rewrites them); the test-suite checks that the
shipped files and the builders agree.
"""

from itertools import combinations
from pathlib import Path

from .hochschild import DgAlgebraSpec

CORPUS_DIR = Path(__file__).with_name("corpus")


def _sort_sign(seq):
    s = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                s = -s
    return s


def trivial_algebra():
    """The ground field k."""
    return DgAlgebraSpec(["1"], [0], {(0, 0): {0: 1}}, {}, cy_dimension=0, name="trivial",
                         cy={"w": 0, "v1": {"0": 1}, "trace": {"0": 1}})


def exterior_algebra(k):
    """Lambda[x_1..x_k] with all generators in degree 1 and d = 0."""
    gens = "xyzuvw"[:k]
    subsets = [()]
    for r in range(1, k + 1):
        subsets += list(combinations(range(k), r))
    idx = {S: i for i, S in enumerate(subsets)}
    names = ["1" if not S else "".join(gens[a] for a in S) for S in subsets]
    mult = {}
    for S in subsets:
        for T in subsets:
            if set(S) & set(T):
                continue
            seq = list(S) + list(T)
            mult[(idx[S], idx[T])] = {idx[tuple(sorted(seq))]: _sort_sign(seq)}
    return DgAlgebraSpec(names, [len(S) for S in subsets], mult, {}, cy_dimension=k,
                         name=f"exterior{k}")


def dg_exterior():
    """k<x, y>/(x^2, y^2, xy - yx), |x| = 1, |y| = 2, dx = y.  Acyclic above degree 0."""
    mult = {}
    for i in range(4):
        mult[(0, i)] = {i: 1}
        mult[(i, 0)] = {i: 1}
    mult[(1, 2)] = {3: 1}
    mult[(2, 1)] = {3: 1}
    return DgAlgebraSpec(["1", "x", "y", "xy"], [0, 1, 2, 3], mult, {1: {2: 1}}, name="dgex")


def corrupted_d_squared():
    """d^2 != 0: d x = y, d y = xy in Lambda-like algebra with degrees 1, 2, 3."""
    A = dg_exterior()
    return _respec(A, diff={1: {2: 1}, 2: {3: 1}}, name="corrupt_d2")


def _truncated_poly_x(d_xy):
    """k[y]/y^3 tensor Lambda[x], |x| = 1, |y| = 2, d x = y and d(xy) = d_xy."""
    names = ["1", "x", "y", "xy", "yy", "xyy"]
    deg = [0, 1, 2, 3, 4, 5]
    # basis element = (power of x, power of y)
    mono = [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2)]
    idx = {m: i for i, m in enumerate(mono)}
    mult = {}
    for i, (a, b) in enumerate(mono):
        for j, (c, e) in enumerate(mono):
            if a + c > 1 or b + e > 2:
                continue
            mult[(i, j)] = {idx[(a + c, b + e)]: 1}
    diff = {1: {2: 1}, 3: d_xy, 5: {}}
    return names, deg, mult, diff


def corrupted_leibniz():
    """d x = y but d(xy) = 0 instead of y^2: only the Leibniz rule fails."""
    names, deg, mult, diff = _truncated_poly_x({})
    return DgAlgebraSpec(names, deg, mult, diff, name="corrupt_leibniz")


def corrupted_associativity():
    """k[y]/y^4, |y| = 2, with y*y^2 doubled: only associativity fails."""
    names = ["1", "y", "yy", "yyy"]
    mult = {}
    for i in range(4):
        for j in range(4 - i):
            mult[(i, j)] = {i + j: 1}
    mult[(1, 2)] = {3: 2}
    return DgAlgebraSpec(names, [0, 2, 4, 6], mult, {}, name="corrupt_assoc")


def _respec(A, mult=None, diff=None, name=None):
    return DgAlgebraSpec([A.space.name(i) for i in range(A.n)], A.deg,
                         A.mult if mult is None else mult, A.diff if diff is None else diff,
                         A.unit, A.cy_dimension, A.connected, name or A.name)


ALGEBRAS = {
    "trivial": trivial_algebra,
    "exterior1": lambda: exterior_algebra(1),
    "exterior2": lambda: exterior_algebra(2),
    "dgex": dg_exterior,
    "corrupt_d2": corrupted_d_squared,
    "corrupt_leibniz": corrupted_leibniz,
    "corrupt_assoc": corrupted_associativity,
}


def polynomial_entries():
    from .serialize import polynomial_to_json
    return {
        "A2": polynomial_to_json(3, name="A2"),
        "A3": polynomial_to_json(4, name="A3"),
        "A2_f0": polynomial_to_json(3, weight_cap=3, f_coeff=0, name="A2_f0"),
    }


def a2_package(weight_cap=8):
    """The A2 model as explicit calculus-package tables, complete enough for N = 4."""
    from .polynomial import polynomial_cy, polynomial_package
    from .serialize import package_to_json
    P = polynomial_package(3, weight_cap, 1, "A2_package")
    return package_to_json(P, polynomial_cy(P))


def build_all():
    """{entry name: JSON object} for every bundled example."""
    from .serialize import algebra_to_json
    out = {name: algebra_to_json(make()) for name, make in ALGEBRAS.items()}
    out.update(polynomial_entries())
    out["A2_package"] = a2_package()
    return out


def write_all(directory=CORPUS_DIR):
    from .serialize import dumps
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    objs = build_all()
    for name, obj in objs.items():
        (directory / f"{name}.json").write_text(dumps(obj))
    return sorted(objs)


if __name__ == "__main__":
    for name in write_all():
        print(name)
