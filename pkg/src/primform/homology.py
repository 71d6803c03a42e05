"""Exact elimination over Q and homology with a chosen contraction.

The elimination keeps rows fully reduced (each pivot occurs in exactly one
row), so reducing a vector is a single pass over the pivots it touches.  Rows
also remember how they were assembled from the generators that were added,
which gives solutions of linear systems for free.
"""

from fractions import Fraction

from .errors import NotAComplex, TruncationUnstable
from .graded import LinMap, viadd, vadd, vscale


class Echelon:
    """Incrementally row-reduced span of sparse vectors.

    ``key`` orders coordinates; the pivot of a new row is its smallest
    coordinate under that order.
    """

    def __init__(self, key=None):
        self.key = key if key is not None else (lambda i: i)
        self.rows = {}      # pivot -> vector (pivot entry 1)
        self.combos = {}    # pivot -> {generator tag: coefficient}
        self.where = {}     # coordinate -> set of pivots whose row touches it
        self.tags = []

    def __len__(self):
        return len(self.rows)

    @property
    def rank(self):
        return len(self.rows)

    def reduce(self, v):
        """Return (residual, combo) with v = residual + sum combo[g] * gen[g]."""
        v = {k: Fraction(x) for k, x in v.items() if x}
        combo = {}
        for p in [p for p in v if p in self.rows]:
            c = v.get(p)
            if not c:
                continue
            self._sub(v, self.rows[p], c)
            viadd(combo, self.combos[p], c)
        return v, combo

    def _sub(self, v, row, c):
        for k, x in row.items():
            y = v.get(k, 0) - c * x
            if y:
                v[k] = y
            else:
                v.pop(k, None)

    def contains(self, v):
        return not self.reduce(v)[0]

    def add(self, v, tag=None):
        """Add a generator; return True if it enlarged the span."""
        if tag is None:
            tag = len(self.tags)
        self.tags.append(tag)
        r, combo = self.reduce(v)
        if not r:
            return False
        combo = vadd({tag: Fraction(1)}, combo, -1)
        p = min(r, key=self.key)
        c = r[p]
        r = {k: x / c for k, x in r.items()}
        combo = {k: x / c for k, x in combo.items()}
        # clear the new pivot from existing rows
        for q in list(self.where.get(p, ())):
            row = self.rows[q]
            a = row.get(p)
            if not a:
                continue
            for k in r:
                self.where.setdefault(k, set()).add(q)
            self._sub(row, r, a)
            viadd(self.combos[q], combo, -a)
            self.where[p].discard(q)
        self.rows[p] = r
        self.combos[p] = combo
        for k in r:
            self.where.setdefault(k, set()).add(p)
        return True

    def solve(self, v):
        """Coefficients c with v = sum c[g] gen[g], or None if v is not in the span."""
        r, combo = self.reduce(v)
        return None if r else combo


def rank(vectors, key=None):
    e = Echelon(key)
    for v in vectors:
        e.add(v)
    return e.rank


def kernel(ncols, apply, order=None):
    """Kernel of the linear map given column-wise by ``apply(j)``."""
    order = list(range(ncols)) if order is None else list(order)
    e = Echelon()
    ker = []
    for j in order:
        r, combo = e.reduce(apply(j))
        if not r:
            ker.append(vadd({j: Fraction(1)}, combo, -1))
        else:
            e.add(apply(j), tag=j)
    return ker


class HomologyResult:
    """Homology of a finite complex together with a contraction onto it.

    The space splits as B' + H + B with B = im d, H spanned by the chosen
    representatives and d: B' -> B invertible.  ``homotopy`` inverts d on B
    and kills H and B', so d h + h d = 1 - pi with pi the projection to H.
    """

    def __init__(self, d, reps, cycles, comp_cols, img_echelon, dec_echelon, degree=None,
                 uncertified=()):
        self.d = d
        self.space = d.source
        self.homology_basis = reps
        self.cycles_basis = cycles
        self.boundaries_basis = [d.cols.get(j, {}) for j in comp_cols]
        self._comp = comp_cols
        self._img = img_echelon
        self._dec = dec_echelon
        self.degree = degree
        self.uncertified = tuple(uncertified)

    @property
    def dim(self):
        return len(self.homology_basis)

    def decompose(self, v):
        """Return (h(v), pi(v) coordinates, boundary part) of v."""
        dv = self.d(v)
        beta = self._img.solve(dv) if dv else {}
        if beta is None:
            raise NotAComplex("d(v) is not in the image of d")
        x = {self._comp[g]: c for g, c in beta.items()}
        z = vadd(v, x, -1)
        coeffs = self._dec.solve(z)
        if coeffs is None:
            raise NotAComplex("decomposition failed; d does not square to zero")
        alpha, gamma = {}, {}
        for (kind, g), c in coeffs.items():
            if kind == "h":
                alpha[g] = c
            else:
                gamma[self._comp[g]] = c
        return gamma, alpha, x

    def project(self, v):
        """Homology coordinates of a cycle modulo boundaries (for a general v: of pi(v))."""
        return self.decompose(v)[1]

    def pi(self, v):
        return self.lift(self.project(v))

    def lift(self, coords):
        out = {}
        for i, c in coords.items():
            viadd(out, self.homology_basis[i], c)
        return out

    def h(self, v):
        return self.decompose(v)[0]

    def is_boundary(self, v):
        return self._img.solve(v) is not None

    def preimage(self, v):
        """Some x with d x = v, or None."""
        beta = self._img.solve(v)
        if beta is None:
            return None
        return {self._comp[g]: c for g, c in beta.items()}

    @property
    def homotopy(self):
        cols = {j: self.h({j: Fraction(1)}) for j in range(self.space.dim)}
        return LinMap(self.space, self.space, cols, -self.d.degree, -self.d.weight, check=False)

    @property
    def lift_section(self):
        rep_space = _rep_space(self)
        cols = {i: dict(r) for i, r in enumerate(self.homology_basis)}
        return LinMap(rep_space, self.space, cols, check=False)

    @property
    def projector(self):
        cols = {j: self.pi({j: Fraction(1)}) for j in range(self.space.dim)}
        return LinMap(self.space, self.space, cols, check=False)

    def rep_bidegrees(self):
        return [(self.space.vector_degree(r), self.space.vector_weight(r))
                for r in self.homology_basis]


def _rep_space(res):
    from .graded import GradedBasisSpace
    basis = []
    for i, r in enumerate(res.homology_basis):
        basis.append((f"h{i}", res.space.vector_degree(r), res.space.vector_weight(r),
                      res.space.vector_parity(r)))
    return GradedBasisSpace(basis)


def homology(d, degree=None, check_square=True, uncertified=None):
    """Homology of the endomorphism ``d`` of a graded space.

    Representatives and the complement B' are chosen by scanning basis
    vectors in (wt, deg, index) order.  With ``degree`` given, only classes in
    that degree are returned, but the contraction is still global.
    ``uncertified`` is an optional predicate on (deg, wt) marking blocks whose
    rank depends on data outside the truncation; classes there are reported
    in ``HomologyResult.uncertified``.
    """
    V = d.source
    if d.target != V:
        raise NotAComplex("homology needs an endomorphism")
    if check_square:
        for j, col in d.cols.items():
            dd = d(col)
            if dd:
                raise NotAComplex("d^2 != 0", witness={"basis": V.name(j), "d2": _fmt(V, dd)})
    order = sorted(range(V.dim), key=V.key)
    img = Echelon(V.key)
    comp = []
    cycles = []
    for j in order:
        col = d.cols.get(j, {})
        r, combo = img.reduce(col)
        if r:
            img.add(col, tag=len(comp))
            comp.append(j)
        else:
            z = {j: Fraction(1)}
            for g, c in combo.items():
                viadd(z, {comp[g]: Fraction(1)}, -c)
            cycles.append(z)
    # representatives: cycles independent modulo boundaries
    dec = Echelon(V.key)
    for g in range(len(comp)):
        dec.add(d.cols[comp[g]], tag=("b", g))
    reps = []
    for z in cycles:
        r, _ = dec.reduce(z)
        if r:
            dec.add(z, tag=("h", len(reps)))
            reps.append(z)
    res = HomologyResult(d, reps, cycles, comp, img, dec, degree)
    if degree is not None:
        res = _restrict(res, degree)
    if uncertified is not None:
        res.uncertified = tuple(i for i, r in enumerate(res.homology_basis)
                                if uncertified(V.vector_degree(r), V.vector_weight(r)))
    return res


def _restrict(res, degree):
    from .graded import Q
    degree = Q(degree)
    V = res.space
    keep = [i for i, r in enumerate(res.homology_basis) if V.vector_degree(r) == degree]
    out = HomologyResult.__new__(HomologyResult)
    out.__dict__.update(res.__dict__)
    out.homology_basis = [res.homology_basis[i] for i in keep]
    out.cycles_basis = [z for z in res.cycles_basis if V.vector_degree(z) == degree]
    out.boundaries_basis = [b for b in res.boundaries_basis if V.vector_degree(b) == degree]
    out.degree = degree
    full_project = res.project
    remap = {old: new for new, old in enumerate(keep)}

    def project(v):
        a = full_project(v)
        return {remap[i]: c for i, c in a.items() if i in remap}
    out.project = project
    return out


def _fmt(V, v):
    return V.format(v)


def require_certified(res, what="homology"):
    if res.uncertified:
        raise TruncationUnstable(f"{what} has classes at the truncation boundary",
                                 witness={"classes": list(res.uncertified)})


def solve_linear(columns, target, key=None):
    """Find x with sum x[j] columns[j] = target, or None."""
    e = Echelon(key)
    for j, c in enumerate(columns):
        e.add(c, tag=j)
    return e.solve(target)


def inverse_matrix(rows):
    """Inverse of a square matrix given as a list of lists of Fractions, or None."""
    n = len(rows)
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [r[n:] for r in a]


def matrix_rank(rows):
    vecs = [{j: Fraction(x) for j, x in enumerate(r) if x} for r in rows]
    return rank(vecs)


__all__ = ["Echelon", "HomologyResult", "homology", "kernel", "rank", "solve_linear",
           "inverse_matrix", "matrix_rank", "require_certified", "vscale"]
