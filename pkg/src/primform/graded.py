"""Graded vector spaces, sparse vectors and linear maps over Q.

A vector is a plain ``dict`` from basis index to ``Fraction`` with no zero
entries.  Spaces carry for each basis element a cohomological degree, a weight
and a parity.  Degrees are allowed to be rational because the polynomial
models have fractional degrees; the parity is then stored separately and is
what every Koszul sign looks at.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError


def Q(x):
    """Coerce ints, strings like ``"2/3"`` and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not allowed in exact computations")
    return Fraction(x)


def sign(e):
    return -1 if e % 2 else 1


# -- sparse vectors -------------------------------------------------------

def vclean(v):
    return {k: c for k, c in v.items() if c}


def vadd(a, b, c=1):
    """Return a + c*b as a new vector."""
    out = dict(a)
    for k, x in b.items():
        y = out.get(k, 0) + c * x
        if y:
            out[k] = y
        else:
            out.pop(k, None)
    return out


def viadd(a, b, c=1):
    """In-place a += c*b."""
    if not c:
        return a
    for k, x in b.items():
        y = a.get(k, 0) + c * x
        if y:
            a[k] = y
        else:
            a.pop(k, None)
    return a


def vscale(v, c):
    if not c:
        return {}
    return {k: c * x for k, x in v.items()}


def vsum(terms):
    """Sum of (coefficient, vector) pairs."""
    out = {}
    for c, v in terms:
        viadd(out, v, c)
    return out


def vdot(functional, v):
    return sum((functional.get(k, 0) * x for k, x in v.items()), Fraction(0))


# -- spaces ---------------------------------------------------------------

@dataclass(frozen=True)
class BasisElement:
    name: str
    deg: Fraction
    wt: Fraction
    parity: int


def _parity_of(deg):
    if deg.denominator != 1:
        raise ValidationError(f"degree {deg} is not integral; give a parity explicitly")
    return int(deg) % 2


class GradedBasisSpace:
    """Finite basis with (deg, wt, parity) attached to every element."""

    def __init__(self, basis):
        elems = []
        for b in basis:
            if isinstance(b, BasisElement):
                elems.append(b)
                continue
            name, deg, wt, *rest = b
            deg, wt = Q(deg), Q(wt)
            par = rest[0] % 2 if rest and rest[0] is not None else _parity_of(deg)
            elems.append(BasisElement(str(name), deg, wt, par))
        names = [e.name for e in elems]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ValidationError(f"duplicate basis names {dup}")
        self.basis = tuple(elems)
        self._index = {e.name: i for i, e in enumerate(elems)}

    def __len__(self):
        return len(self.basis)

    @property
    def dim(self):
        return len(self.basis)

    def __eq__(self, other):
        return isinstance(other, GradedBasisSpace) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)

    def __repr__(self):
        return f"GradedBasisSpace(dim={self.dim})"

    def index(self, name):
        return self._index[name]

    def name(self, i):
        return self.basis[i].name

    def deg(self, i):
        return self.basis[i].deg

    def wt(self, i):
        return self.basis[i].wt

    def parity(self, i):
        return self.basis[i].parity

    def key(self, i):
        # pivot order used everywhere: (wt, deg, index)
        e = self.basis[i]
        return (e.wt, e.deg, i)

    def bidegree(self, i):
        e = self.basis[i]
        return (e.deg, e.wt)

    def dimension(self, deg, wt):
        deg, wt = Q(deg), Q(wt)
        return sum(1 for e in self.basis if e.deg == deg and e.wt == wt)

    def blocks(self):
        """Map (deg, wt) -> list of indices, in pivot order."""
        out = {}
        for i in sorted(range(self.dim), key=self.key):
            out.setdefault(self.bidegree(i), []).append(i)
        return out

    def vector_parity(self, v):
        pars = {self.parity(i) for i in v}
        if len(pars) > 1:
            raise ValidationError("vector is not homogeneous in parity")
        return pars.pop() if pars else 0

    def vector_degree(self, v):
        ds = {self.deg(i) for i in v}
        if len(ds) > 1:
            raise ValidationError("vector is not homogeneous in degree")
        return ds.pop() if ds else None

    def vector_weight(self, v):
        ws = {self.wt(i) for i in v}
        if len(ws) > 1:
            raise ValidationError("vector is not homogeneous in weight")
        return ws.pop() if ws else None

    def format(self, v):
        if not v:
            return "0"
        parts = []
        for i in sorted(v, key=self.key):
            parts.append(f"{v[i]}*{self.name(i)}")
        return " + ".join(parts)


# -- linear maps ----------------------------------------------------------

class LinMap:
    """Sparse linear map stored column by column.

    ``cols[j]`` is the image of the j-th source basis vector; a missing column
    means zero.  ``degree`` and ``weight`` are the bidegree shift.
    """

    def __init__(self, source, target, cols, degree=0, weight=0, check=True):
        self.source = source
        self.target = target
        self.cols = {j: vclean(dict(c)) for j, c in cols.items()}
        self.cols = {j: c for j, c in self.cols.items() if c}
        self.degree = Q(degree)
        self.weight = Q(weight)
        if check:
            self.check_homogeneous()

    def check_homogeneous(self):
        for j, col in self.cols.items():
            d, w = self.source.bidegree(j)
            for i in col:
                if self.target.bidegree(i) != (d + self.degree, w + self.weight):
                    raise ValidationError(
                        f"map not homogeneous: {self.source.name(j)} -> {self.target.name(i)}",
                        witness={"column": self.source.name(j), "row": self.target.name(i)})

    def __call__(self, v):
        out = {}
        for j, x in v.items():
            col = self.cols.get(j)
            if col:
                viadd(out, col, x)
        return out

    def compose(self, other):
        """self o other."""
        cols = {j: self(c) for j, c in other.cols.items()}
        return LinMap(other.source, self.target, cols,
                      self.degree + other.degree, self.weight + other.weight, check=False)

    def __add__(self, other):
        cols = {j: dict(c) for j, c in self.cols.items()}
        for j, c in other.cols.items():
            cols[j] = vadd(cols.get(j, {}), c)
        return LinMap(self.source, self.target, cols, self.degree, self.weight, check=False)

    def scaled(self, c):
        return LinMap(self.source, self.target, {j: vscale(v, c) for j, v in self.cols.items()},
                      self.degree, self.weight, check=False)

    def is_zero(self):
        return not self.cols

    def __eq__(self, other):
        return (isinstance(other, LinMap) and self.source == other.source
                and self.target == other.target and self.cols == other.cols)

    def dense(self):
        return [[self.cols.get(j, {}).get(i, Fraction(0)) for j in range(self.source.dim)]
                for i in range(self.target.dim)]

    @classmethod
    def identity(cls, space):
        return cls(space, space, {i: {i: Fraction(1)} for i in range(space.dim)}, check=False)

    @classmethod
    def zero(cls, source, target, degree=0, weight=0):
        return cls(source, target, {}, degree, weight, check=False)


# -- Koszul signs ---------------------------------------------------------

def koszul_sign(perm, degs):
    """Sign of reordering homogeneous elements.

    ``perm[i]`` is the position in the original list of the element that ends
    up in slot i.  Only the parities of ``degs`` matter.
    """
    perm = list(perm)
    if sorted(perm) != list(range(len(degs))):
        raise ValueError("perm is not a permutation of range(len(degs))")
    odd = [int(Q(d)) % 2 if Q(d).denominator == 1 else None for d in degs]
    if None in odd:
        raise ValueError("koszul_sign needs integral degrees (pass parities)")
    s = 0
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b] and odd[perm[a]] and odd[perm[b]]:
                s += 1
    return sign(s)
