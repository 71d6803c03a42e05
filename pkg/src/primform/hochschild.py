"""Normalized Hochschild cochains and chains of a finite dg algebra.

Cochains are dicts ``word -> vector`` where a word is a tuple of basis
indices of the augmentation complement (the unit never occurs).  Chains are
dicts ``(a0, a1, ..., an) -> Fraction`` with a1..an off the unit.  Every
operation evaluates by pushing stored terms forward, so the cost is
proportional to the support instead of to the number of all words.

Sign conventions: d, delta, the cup product and the brace operation are the
explicit published formulas (the brace sums over insertions of every arity,
including arity zero).  B uses the Koszul sign of the cyclic rotation.  The
contraction and Lie derivative use the signs

    iota_f(a0|a1..an) = (-1)^(p*|a0| + m) a0 f(a1..am) | a(m+1)..an
    L_f = (-1)^(p+m) L^K_f

with L^K the Lie derivative obtained by treating all chain slots as
suspended, m the arity of the component of f.  With these choices every
identity of the calculus holds on homology (checked in the test-suite).
"""

from fractions import Fraction
from itertools import product

from .errors import NotWellDefined, ValidationError
from .graded import GradedBasisSpace, LinMap, Q, sign, vadd, viadd, vclean, vscale
from .homology import homology


# -- the algebra ----------------------------------------------------------

class DgAlgebraSpec:
    """A finite-dimensional graded algebra with differential and unit.

    ``mult[(i, j)]`` is the product e_i e_j as a sparse vector and
    ``diff[i]`` is d_A e_i.  Degrees must be integers.
    """

    def __init__(self, names, degrees, mult, diff, unit_index=0, cy_dimension=None,
                 connected=True, name="algebra", cy=None):
        degrees = [Q(d) for d in degrees]
        for d in degrees:
            if d.denominator != 1:
                raise ValidationError("dg algebra degrees must be integers")
        self.space = GradedBasisSpace([(n, d, d) for n, d in zip(names, degrees)])
        self.n = len(names)
        self.deg = [int(d) for d in degrees]
        self.mult = {}
        for (i, j), v in mult.items():
            v = vclean({k: Q(c) for k, c in v.items()})
            if v:
                self.mult[(i, j)] = v
        self.diff = {}
        for i, v in diff.items():
            v = vclean({k: Q(c) for k, c in v.items()})
            if v:
                self.diff[i] = v
        self.unit = unit_index
        self.cy_dimension = cy_dimension
        self.connected = connected
        self.name = name
        self.cy = cy  # optional Calabi-Yau data for the derived package
        self.nonunit = [i for i in range(self.n) if i != self.unit]
        # preimage tables used by push-forward evaluation
        self._d_pre = {}
        for i, v in self.diff.items():
            for k, c in v.items():
                self._d_pre.setdefault(k, []).append((i, c))
        self._m_pre = {}
        for (i, j), v in self.mult.items():
            for k, c in v.items():
                self._m_pre.setdefault(k, []).append((i, j, c))

    def __repr__(self):
        return f"DgAlgebraSpec({self.name!r}, dim={self.n})"

    def mul(self, a, b):
        out = {}
        for i, x in a.items():
            for j, y in b.items():
                v = self.mult.get((i, j))
                if v:
                    viadd(out, v, x * y)
        return out

    def mul_basis(self, i, j):
        return self.mult.get((i, j), {})

    def d(self, a):
        out = {}
        for i, x in a.items():
            v = self.diff.get(i)
            if v:
                viadd(out, v, x)
        return out

    # axiom checks -------------------------------------------------------
    def check_axioms(self):
        """Return {axiom: witness or None}; None means the axiom holds."""
        res = {}
        e = lambda i: {i: Fraction(1)}
        w = None
        for i in range(self.n):
            if self.d(self.d(e(i))):
                w = {"element": self.space.name(i)}
                break
        res["d_squared_zero"] = w
        w = None
        for i, j in product(range(self.n), repeat=2):
            lhs = self.d(self.mul(e(i), e(j)))
            rhs = vadd(self.mul(self.d(e(i)), e(j)), self.mul(e(i), self.d(e(j))), sign(self.deg[i]))
            if vadd(lhs, rhs, -1):
                w = {"pair": [self.space.name(i), self.space.name(j)]}
                break
        res["leibniz"] = w
        w = None
        for i, j, k in product(range(self.n), repeat=3):
            lhs = self.mul(self.mul(e(i), e(j)), e(k))
            rhs = self.mul(e(i), self.mul(e(j), e(k)))
            if vadd(lhs, rhs, -1):
                w = {"triple": [self.space.name(i), self.space.name(j), self.space.name(k)]}
                break
        res["associativity"] = w
        w = None
        u = self.unit
        if self.deg[u] != 0 or self.d(e(u)):
            w = {"unit": self.space.name(u)}
        for i in range(self.n):
            if self.mul(e(u), e(i)) != e(i) or self.mul(e(i), e(u)) != e(i):
                w = {"element": self.space.name(i)}
                break
        res["unit"] = w
        w = None
        for (i, j), v in self.mult.items():
            for k in v:
                if self.deg[k] != self.deg[i] + self.deg[j]:
                    w = {"product": [self.space.name(i), self.space.name(j)]}
        for i, v in self.diff.items():
            for k in v:
                if self.deg[k] != self.deg[i] + 1:
                    w = {"differential": self.space.name(i)}
        res["homogeneous"] = w
        res["non_negative"] = None if min(self.deg) >= 0 else {"degree": min(self.deg)}
        res["connected"] = None if (not self.connected or self._h0_is_k()) else {"H0": "not k"}
        return res

    def _h0_is_k(self):
        deg0 = [i for i in range(self.n) if self.deg[i] == 0]
        ker = [i for i in deg0 if not self.d({i: Fraction(1)})]
        # cocycles of degree 0 modulo nothing (no degree -1): dim must be 1
        from .homology import kernel
        k = kernel(len(deg0), lambda j: self.d({deg0[j]: Fraction(1)}))
        return len(k) == 1 and bool(ker)


# -- words and gradings ---------------------------------------------------

def s_prefix(A, word, i):
    """sum over the first i letters of (deg - 1)."""
    return sum(A.deg[a] - 1 for a in word[:i])


def words(A, m):
    return list(product(A.nonunit, repeat=m))


def cochain_degree_of(A, word, k):
    """Degree p of the cochain sending ``word`` to e_k."""
    return A.deg[k] - s_prefix(A, word, len(word))


def cochain_weight_of(A, word, k):
    return A.deg[k] - sum(A.deg[a] for a in word)


def chain_degree(A, word):
    return sum(A.deg[a] for a in word) - (len(word) - 1)


def chain_weight(A, word):
    return sum(A.deg[a] for a in word)


# -- cochain types --------------------------------------------------------

class Cochain:
    """A normalized cochain with components of arity 0..L."""

    def __init__(self, comps, p, L):
        self.comps = {tuple(w): vclean(dict(v)) for w, v in comps.items()}
        self.comps = {w: v for w, v in self.comps.items() if v and len(w) <= L}
        self.p = p
        self.L = L

    def __eq__(self, other):
        return isinstance(other, Cochain) and self.comps == other.comps

    def __sub__(self, other):
        return Cochain(_cadd(self.comps, other.comps, -1), self.p, min(self.L, other.L))

    def __add__(self, other):
        return Cochain(_cadd(self.comps, other.comps, 1), self.p, min(self.L, other.L))

    def is_zero(self):
        return not self.comps

    def arities(self):
        return sorted({len(w) for w in self.comps})


class Chain:
    def __init__(self, terms):
        self.terms = {tuple(w): Q(c) for w, c in terms.items() if c}

    def __eq__(self, other):
        return isinstance(other, Chain) and self.terms == other.terms

    def is_zero(self):
        return not self.terms


def _cadd(f, g, c=1):
    out = {w: dict(v) for w, v in f.items()}
    for w, v in g.items():
        nv = vadd(out.get(w, {}), v, c)
        if nv:
            out[w] = nv
        else:
            out.pop(w, None)
    return out


def _put(out, word, vec, c):
    if not c or not vec:
        return
    cur = out.get(word)
    if cur is None:
        cur = out[word] = {}
    viadd(cur, vec, c)
    if not cur:
        del out[word]


def _putc(out, word, c):
    if not c:
        return
    y = out.get(word, 0) + c
    if y:
        out[word] = y
    else:
        out.pop(word, None)


# -- cochain operations (raw dicts) --------------------------------------

def raw_cochain_d(A, f, p, L):
    out = {}
    for w, val in f.items():
        _put(out, w, A.d(val), 1)
        n = len(w)
        for i in range(n):
            # slot i receives d_A(b) for b in the preimage of w[i]
            for b, c in A._d_pre.get(w[i], ()):
                if b == A.unit:
                    continue
                ww = w[:i] + (b,) + w[i + 1:]
                _put(out, ww, val, -c * sign(p - 1 + s_prefix(A, ww, i)))
    return out


def raw_cochain_delta(A, f, p, L):
    out = {}
    for w, val in f.items():
        n = len(w)
        if n + 1 > L:
            continue
        # f(a1..an) a_{n+1}
        for b in A.nonunit:
            prod_ = A.mul(val, {b: Fraction(1)})
            if prod_:
                ww = w + (b,)
                _put(out, ww, prod_, sign(p + s_prefix(A, ww, n)))
        # a1 f(a2..a_{n+1})
        for b in A.nonunit:
            prod_ = A.mul({b: Fraction(1)}, val)
            if prod_:
                ww = (b,) + w
                db = A.deg[b]
                _put(out, ww, prod_, sign((p - 1) * (db - 1) + db))
        # f(.. a_i a_{i+1} ..)
        for i in range(n):
            for x, y, c in A._m_pre.get(w[i], ()):
                if x == A.unit or y == A.unit:
                    continue
                ww = w[:i] + (x, y) + w[i + 1:]
                _put(out, ww, val, c * sign(p - 1 + s_prefix(A, ww, i + 1)))
    return out


def raw_cup(A, f, p, g, q, L):
    out = {}
    for w1, v1 in f.items():
        for w2, v2 in g.items():
            w = w1 + w2
            if len(w) > L:
                continue
            prod_ = A.mul(v1, v2)
            if prod_:
                _put(out, w, prod_, sign(q * s_prefix(A, w, len(w1))))
    return out


def raw_brace(A, f, p, g, q, L):
    """f o_{-1} g: insert g into every slot of f (arity-zero parts included)."""
    out = {}
    for wf, vf in f.items():
        for i in range(len(wf)):
            e = wf[i]
            s = sign((q - 1) * s_prefix(A, wf, i))
            for wg, vg in g.items():
                c = vg.get(e)
                if not c:
                    continue
                w = wf[:i] + wg + wf[i + 1:]
                if len(w) > L:
                    continue
                _put(out, w, vf, c * s)
    return out


def raw_bracket(A, f, p, g, q, L):
    a = raw_brace(A, f, p, g, q, L)
    b = raw_brace(A, g, q, f, p, L)
    return _cadd(a, b, -sign((p - 1) * (q - 1)))


def m1_cochain(A):
    return {(a,): A.d({a: Fraction(1)}) for a in A.nonunit if A.d({a: Fraction(1)})}


def m2_cochain(A):
    out = {}
    for a in A.nonunit:
        for b in A.nonunit:
            v = A.mul_basis(a, b)
            if v:
                out[(a, b)] = vscale(v, sign(A.deg[a]))
    return out


def m_cochain(A):
    return _cadd(m1_cochain(A), m2_cochain(A))


def deg_cochain(A):
    return {(a,): {a: Fraction(A.deg[a])} for a in A.nonunit if A.deg[a]}


def unit_cochain(A):
    return {(): {A.unit: Fraction(1)}}


# -- chain operations -----------------------------------------------------

def raw_chain_d(A, c):
    out = {}
    for w, x in c.items():
        for k, cc in A.diff.get(w[0], {}).items():
            _putc(out, (k,) + w[1:], x * cc)
        sp = A.deg[w[0]] - 1
        for i in range(1, len(w)):
            sp += A.deg[w[i]] - 1
            for k, cc in A.diff.get(w[i], {}).items():
                if k == A.unit:
                    continue
                _putc(out, w[:i] + (k,) + w[i + 1:], x * cc * sign(sp))
    return out


def raw_chain_delta(A, c):
    out = {}
    for w, x in c.items():
        n = len(w) - 1
        if n == 0:
            continue
        for k, cc in A.mult.get((w[0], w[1]), {}).items():
            _putc(out, (k,) + w[2:], x * cc * sign(A.deg[w[0]]))
        sp = A.deg[w[0]] - 1
        for i in range(1, n):
            sp += A.deg[w[i]] - 1
            for k, cc in A.mult.get((w[i], w[i + 1]), {}).items():
                if k == A.unit:
                    continue
                _putc(out, w[:i] + (k,) + w[i + 2:], -x * cc * sign(sp))
        an = w[n]
        spn1 = s_prefix(A, w, n)  # s'_{n-1}
        for k, cc in A.mult.get((an, w[0]), {}).items():
            _putc(out, (k,) + w[1:n], x * cc * sign(A.deg[an] + (A.deg[an] - 1) * spn1))
    return out


def raw_connes_B(A, c):
    """Normalized B: sum of cyclic rotations placed behind the unit."""
    out = {}
    u = A.unit
    for w, x in c.items():
        if w[0] == u:
            continue
        n = len(w) - 1
        sus = [A.deg[a] - 1 for a in w]
        total = sum(sus)
        a = 0
        for i in range(0, n + 1):
            rot = w[i:] + w[:i]
            _putc(out, (u,) + rot, x * sign(a * (total - a)))
            a += sus[i]
    return out


def _components_by_arity(f):
    by = {}
    for w, v in f.items():
        by.setdefault(len(w), {})[w] = v
    return by


def raw_contraction(A, f, p, c):
    out = {}
    by = _components_by_arity(f)
    for w, x in c.items():
        n = len(w) - 1
        a0 = w[0]
        for m, fm in by.items():
            if m > n:
                continue
            val = fm.get(w[1:1 + m])
            if not val:
                continue
            prod_ = A.mul({a0: Fraction(1)}, val)
            s = sign(p * A.deg[a0] + m)
            for k, cc in prod_.items():
                _putc(out, (k,) + w[1 + m:], x * cc * s)
    return out


def raw_lie(A, f, p, c):
    out = {}
    by = _components_by_arity(f)
    u = A.unit
    for w, x in c.items():
        n = len(w) - 1
        sus = [A.deg[a] - 1 for a in w]
        pref = [0]
        for s_ in sus:
            pref.append(pref[-1] + s_)
        total = pref[-1]
        for m, fm in by.items():
            g = sign(p + m)
            # insertion into slots i..i+m-1 (i >= 1)
            for i in range(1, n + 2):
                if i + m - 1 > n:
                    break
                val = fm.get(w[i:i + m])
                if not val:
                    continue
                s = g * sign((p - 1) * pref[i])
                for k, cc in val.items():
                    if k == u:
                        continue
                    _putc(out, w[:i] + (k,) + w[i + m:], x * cc * s)
            if m == 0 or m > n + 1:
                continue
            # cyclic terms: inputs start at slot j and wrap through a0
            for j in range(n + 2 - m, n + 2):
                rot = w[j:] + w[:j]
                val = fm.get(rot[:m])
                if not val:
                    continue
                s = g * sign(pref[j] * (total - pref[j]))
                rest = rot[m:]
                for k, cc in val.items():
                    _putc(out, (k,) + rest, x * cc * s)
    return out


def normalize_chain(A, c):
    return {w: x for w, x in c.items() if x and A.unit not in w[1:]}


# -- public API on typed values -------------------------------------------

def cochain_d(A, f):
    return Cochain(raw_cochain_d(A, f.comps, f.p, f.L), f.p + 1, f.L)


def cochain_delta(A, f):
    return Cochain(raw_cochain_delta(A, f.comps, f.p, f.L), f.p + 1, f.L)


def cup(A, f, g):
    L = min(f.L, g.L)
    return Cochain(raw_cup(A, f.comps, f.p, g.comps, g.p, L), f.p + g.p, L)


def gerstenhaber(A, f, g):
    """[f, g]_G; exact on inputs up to length L - (max stored input length) + 1."""
    L = min(f.L, g.L)
    return Cochain(raw_bracket(A, f.comps, f.p, g.comps, g.p, L), f.p + g.p - 1, L)


def chain_d(A, c):
    return Chain(raw_chain_d(A, c.terms))


def chain_delta(A, c):
    return Chain(raw_chain_delta(A, c.terms))


def connes_B(A, c):
    return Chain(raw_connes_B(A, c.terms))


def contraction(A, f, c):
    return Chain(raw_contraction(A, f.comps, f.p, c.terms))


def lie_derivative(A, f, c):
    return Chain(normalize_chain(A, raw_lie(A, f.comps, f.p, c.terms)))


def special_cochains(A, L):
    return {
        "m": Cochain(m_cochain(A), 2, L),
        "m1": Cochain(m1_cochain(A), 2, L),
        "m2": Cochain(m2_cochain(A), 2, L),
        "deg": Cochain(deg_cochain(A), 1, L),
        "unit": Cochain(unit_cochain(A), 0, L),
    }


def mm_bracket_vanishes(A, L=3):
    """[m_A, m_A]_G = 0 on inputs of length <= L."""
    m = m_cochain(A)
    br = raw_bracket(A, m, 2, m, 2, L)
    return not br, br


# -- truncated complexes and the induced calculus package ------------------

class CochainComplex:
    """Normalized cochains of arity <= L with delta and d as LinMaps."""

    def __init__(self, A, L):
        self.A, self.L = A, L
        basis, self.keys = [], []
        for m in range(L + 1):
            for w in words(A, m):
                for k in range(A.n):
                    p = cochain_degree_of(A, w, k)
                    wt = cochain_weight_of(A, w, k)
                    self.keys.append((w, k))
                    basis.append((f"{k}<-{w}", p, wt))
        self.space = GradedBasisSpace(basis)
        self.index = {key: i for i, key in enumerate(self.keys)}
        self.arity = [len(w) for w, _ in self.keys]

    def to_vec(self, f):
        v = {}
        for w, val in f.items():
            for k, c in val.items():
                if c:
                    v[self.index[(w, k)]] = c
        return v

    def to_cochain(self, v):
        f = {}
        for i, c in v.items():
            w, k = self.keys[i]
            f.setdefault(w, {})[k] = c
        return f

    def degree(self, i):
        return int(self.space.deg(i))

    def operator(self, which):
        A, L = self.A, self.L
        cols = {}
        for i, (w, k) in enumerate(self.keys):
            f = {w: {k: Fraction(1)}}
            p = self.degree(i)
            if which == "delta":
                g = raw_cochain_delta(A, f, p, L)
            else:
                g = raw_cochain_d(A, f, p, L)
            cols[i] = self.to_vec(g)
        weight = 0 if which == "delta" else 1
        return LinMap(self.space, self.space, cols, 1, weight)


class ChainComplex:
    """Normalized chains of length <= L with delta, d and B."""

    def __init__(self, A, L):
        self.A, self.L = A, L
        basis, self.keys = [], []
        for n in range(L + 1):
            for a0 in range(A.n):
                for w in words(A, n):
                    word = (a0,) + w
                    self.keys.append(word)
                    basis.append(("|".join(A.space.name(a) for a in word),
                                  chain_degree(A, word), chain_weight(A, word)))
        self.space = GradedBasisSpace(basis)
        self.index = {key: i for i, key in enumerate(self.keys)}
        self.length = [len(w) - 1 for w in self.keys]

    def to_vec(self, c):
        return {self.index[w]: x for w, x in c.items() if x and w in self.index}

    def to_chain(self, v):
        return {self.keys[i]: c for i, c in v.items()}

    def operator(self, which):
        A = self.A
        cols = {}
        for i, w in enumerate(self.keys):
            c = {w: Fraction(1)}
            if which == "delta":
                cols[i] = self.to_vec(raw_chain_delta(A, c))
            elif which == "d":
                cols[i] = self.to_vec(raw_chain_d(A, c))
        wt = 0 if which == "delta" else 1
        return LinMap(self.space, self.space, cols, 1, wt)


def _span_names(space, res, prefix):
    out = []
    for i, r in enumerate(res):
        lead = min(r, key=space.key)
        out.append(f"{prefix}{i}[{space.name(lead)}]")
    return out


def compute_tpoly_and_omega(A, L=4, check_well_defined=True):
    """The calculus package (T_poly, Omega) of A truncated at tensor length L.

    Classes of arity (resp. chain length) <= L-1 are certified exactly: each
    (degree, weight) block lives in a single arity and its neighbours are
    inside the truncation.  Operations whose result would land beyond that
    range are stored as None.
    """
    from .calculus import CalculusPackage
    if L < 2:
        raise ValidationError("truncation length must be >= 2")
    CC = CochainComplex(A, L)
    HC = ChainComplex(A, L)
    delta_T = CC.operator("delta")
    delta_O = HC.operator("delta")
    hT = homology(delta_T)
    hO = homology(delta_O)
    t_idx = [i for i, r in enumerate(hT.homology_basis)
             if CC.arity[next(iter(r))] <= L - 1]
    o_idx = [i for i, r in enumerate(hO.homology_basis)
             if HC.length[next(iter(r))] <= L - 1]
    t_reps = [hT.homology_basis[i] for i in t_idx]
    o_reps = [hO.homology_basis[i] for i in o_idx]
    t_pos = {old: new for new, old in enumerate(t_idx)}
    o_pos = {old: new for new, old in enumerate(o_idx)}
    t_ar = [CC.arity[next(iter(r))] for r in t_reps]
    o_len = [HC.length[next(iter(r))] for r in o_reps]
    Tsp = CC.space
    Osp = HC.space
    T = GradedBasisSpace([(nm, Tsp.vector_degree(r), Tsp.vector_weight(r))
                          for nm, r in zip(_span_names(Tsp, t_reps, "X"), t_reps)])
    O = GradedBasisSpace([(nm, Osp.vector_degree(r), Osp.vector_weight(r))
                          for nm, r in zip(_span_names(Osp, o_reps, "w"), o_reps)])

    def projT(vec):
        coords = hT.project(CC.to_vec(vec))
        out = {}
        for i, c in coords.items():
            if i not in t_pos:
                raise NotWellDefined("class outside the certified range")
            out[t_pos[i]] = c
        return out

    def projO(chain):
        coords = hO.project(HC.to_vec(normalize_chain(A, chain)))
        out = {}
        for i, c in coords.items():
            if i not in o_pos:
                raise NotWellDefined("class outside the certified range")
            out[o_pos[i]] = c
        return out

    t_coch = [CC.to_cochain(r) for r in t_reps]
    t_deg = [int(T.deg(i)) for i in range(T.dim)]
    o_chain = [HC.to_chain(r) for r in o_reps]

    d_T = {}
    for i, f in enumerate(t_coch):
        d_T[i] = projT(raw_cochain_d(A, f, t_deg[i], L))
    prod, bracket = {}, {}
    for i, f in enumerate(t_coch):
        for j, g in enumerate(t_coch):
            if t_ar[i] + t_ar[j] <= L - 1:
                prod[(i, j)] = projT(raw_cup(A, f, t_deg[i], g, t_deg[j], L))
            else:
                prod[(i, j)] = None
            ar = t_ar[i] + t_ar[j] - 1
            if ar < 0:
                bracket[(i, j)] = {}
            elif ar <= L - 1:
                bracket[(i, j)] = projT(raw_bracket(A, f, t_deg[i], g, t_deg[j], L))
            else:
                bracket[(i, j)] = None
    d_O, B = {}, {}
    for j, c in enumerate(o_chain):
        d_O[j] = projO(raw_chain_d(A, c))
        B[j] = projO(raw_connes_B(A, c)) if o_len[j] + 1 <= L - 1 else None
    i_table, L_table = {}, {}
    for i, f in enumerate(t_coch):
        for j, c in enumerate(o_chain):
            i_table[(i, j)] = projO(raw_contraction(A, f, t_deg[i], c))
            if o_len[j] - t_ar[i] + 1 <= L - 1:
                L_table[(i, j)] = projO(raw_lie(A, f, t_deg[i], c))
            else:
                L_table[(i, j)] = None
    spec = special_cochains(A, L)
    f_class = projT(spec["m"].comps)
    deg_class = projT(spec["deg"].comps)
    unit_class = projT(spec["unit"].comps)
    pkg = CalculusPackage(
        T=T, O=O, d_T=d_T, d_O=d_O, prod=prod, bracket=bracket, B=B,
        i_table=i_table, L_table=L_table, f_class=f_class, deg_class=deg_class,
        unit_class=unit_class, sigma=Fraction(0), name=f"{A.name}@L={L}",
        meta={"source": "hochschild", "algebra": A.name, "trunc_length": L,
              "T_arity": t_ar, "O_length": o_len,
              # a word of length n has weight >= n when A^0 = k, so every class of
              # weight <= L-1 is inside the certified range
              "omega_weight_complete": (L - 1) if min((A.deg[i] for i in A.nonunit),
                                                      default=1) >= 1 else None})
    pkg.certificate = stabilization_certificate(A, L, hT, hO, CC, HC)
    if check_well_defined:
        _check_descends(A, L, hT, hO, CC, HC, t_coch, t_deg, t_ar, o_len, projO)
    return pkg


def stabilization_certificate(A, L, hT, hO, CC, HC):
    """Ranks per arity / length, with the certified range marked."""
    tr, orr = {}, {}
    for r in hT.homology_basis:
        m = CC.arity[next(iter(r))]
        tr[m] = tr.get(m, 0) + 1
    for r in hO.homology_basis:
        n = HC.length[next(iter(r))]
        orr[n] = orr.get(n, 0) + 1
    return {"trunc_length": L,
            "T_ranks_by_arity": {m: tr.get(m, 0) for m in range(L + 1)},
            "O_ranks_by_length": {n: orr.get(n, 0) for n in range(L + 1)},
            "certified_max_arity": L - 1, "certified_max_length": L - 1,
            "stable": True}


def _check_descends(A, L, hT, hO, CC, HC, t_coch, t_deg, t_ar, o_len, projO):
    """Contractions and Lie derivatives of cocycles send boundaries to boundaries."""
    bnd = []
    for b in hO.boundaries_basis:
        w0 = next(iter(b))
        if HC.length[w0] <= L - 1:
            bnd.append(HC.to_chain(b))
    for i, f in enumerate(t_coch):
        for b in bnd:
            n = len(next(iter(b))) - 1
            if projO(raw_contraction(A, f, t_deg[i], b)):
                raise NotWellDefined("contraction does not descend",
                                     witness={"T": i, "boundary": str(b)})
            if n - t_ar[i] + 1 <= L - 1 and projO(raw_lie(A, f, t_deg[i], b)):
                raise NotWellDefined("Lie derivative does not descend",
                                     witness={"T": i, "boundary": str(b)})
