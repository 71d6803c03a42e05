"""Finite calculus packages (T_poly, Omega) and the data attached to them.

A package stores every operation as an explicit table on basis elements.
Entries may be ``None``: the result would land outside the truncation.  Any
computation that needs such an entry raises :class:`Truncated`; identity
checks simply skip the tuples that touch one and count them.

Parities: the sign (-1)^X always means the parity of the T-degree of X.  On
Omega, i_X has the parity of X, L_X the opposite one, and d, B are odd.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .errors import (Degenerate, HodgePropertyViolated, NotChainMap, NotPerfect,
                     NotQuasiIso, ProductNotDescending, TruncationUnstable, ValidationError)
from .graded import LinMap, Q, sign, vadd, vdot, viadd, vscale
from .homology import homology, inverse_matrix


class Truncated(TruncationUnstable):
    """An operation needed a table entry beyond the truncation."""


def _lin(table, v):
    out = {}
    for j, x in v.items():
        col = table.get(j)
        if col is None:
            if j in table:
                raise Truncated("linear map entry beyond truncation", witness={"basis": j})
            continue
        viadd(out, col, x)
    return out


def _bil(table, x, y):
    out = {}
    for i, a in x.items():
        for j, b in y.items():
            col = table.get((i, j))
            if col is None:
                if (i, j) in table:
                    raise Truncated("bilinear entry beyond truncation", witness={"pair": [i, j]})
                continue
            viadd(out, col, a * b)
    return out


class CalculusPackage:
    def __init__(self, T, O, d_T, d_O, prod, bracket, B, i_table, L_table,
                 f_class, deg_class, unit_class, sigma=Fraction(0), name="package", meta=None):
        self.T, self.O = T, O
        self.d_T, self.d_O, self.B = d_T, d_O, B
        self.prod, self.bracket = prod, bracket
        self.i_table, self.L_table = i_table, L_table
        self.f_class = dict(f_class)
        self.deg_class = dict(deg_class)
        self.unit_class = dict(unit_class)
        self.sigma = Q(sigma)
        self.name = name
        self.meta = dict(meta or {})
        self.certificate = None

    def __repr__(self):
        return f"CalculusPackage({self.name!r}, T={self.T.dim}, O={self.O.dim})"

    # operations on vectors
    def dT(self, x):
        return _lin(self.d_T, x)

    def dO(self, v):
        return _lin(self.d_O, v)

    def Bop(self, v):
        return _lin(self.B, v)

    def mul(self, x, y):
        return _bil(self.prod, x, y)

    def br(self, x, y):
        return _bil(self.bracket, x, y)

    def i(self, x, v):
        return _bil(self.i_table, x, v)

    def L(self, x, v):
        return _bil(self.L_table, x, v)

    def par(self, x):
        return self.T.vector_parity(x)

    def tpar(self, i):
        return self.T.parity(i)

    def opar(self, j):
        return self.O.parity(j)

    def e_T(self, i):
        return {i: Fraction(1)}

    def e_O(self, j):
        return {j: Fraction(1)}

    def has_entry(self, table, key):
        return table.get(key, {}) is not None

    def N(self, v):
        """N = L_deg - sigma on Omega."""
        return vadd(self.L(self.deg_class, v), v, -self.sigma)

    def operator_O(self, fn):
        """Linear operator on O as a column table (None where truncated)."""
        cols = {}
        for j in range(self.O.dim):
            try:
                cols[j] = fn(self.e_O(j))
            except Truncated:
                cols[j] = None
        return cols


# -- validation -------------------------------------------------------------

@dataclass
class IdentityResult:
    identity: str
    checked: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def to_dict(self):
        return {"identity": self.identity, "pass": self.passed, "checked": self.checked,
                "skipped_truncation": self.skipped, "witnesses": self.failures[:5]}


class ValidationReport:
    def __init__(self, name):
        self.name = name
        self.results = {}

    def result(self, identity):
        if identity not in self.results:
            self.results[identity] = IdentityResult(identity)
        return self.results[identity]

    def check(self, identity, fn, witness):
        r = self.result(identity)
        try:
            bad = fn()
        except Truncated:
            r.skipped += 1
            return
        r.checked += 1
        if bad:
            r.failures.append({"basis": witness, "residual": _fmt_vec(bad)})

    @property
    def passed(self):
        return all(r.passed for r in self.results.values())

    def failed(self):
        return [k for k, r in self.results.items() if not r.passed]

    def to_dict(self):
        return {"package": self.name, "pass": self.passed,
                "identities": [r.to_dict() for r in self.results.values()]}


def _fmt_vec(v):
    if isinstance(v, dict):
        return {str(k): str(x) for k, x in sorted(v.items(), key=lambda kv: str(kv[0]))}
    return str(v)


CARTAN = ["i_X i_Y = i_(X.Y)", "[L_X, L_Y] = L_[X,Y]",
          "L_X i_Y + (-1)^X i_X L_Y = L_(X.Y)", "[i_X, L_Y] = i_[X,Y]",
          "[B, i_X] = -L_X", "[B, L_X] = 0", "L_f = -d",
          "[d, i_X] = i_(dX)", "[d, L_X] = L_(-dX)"]


def validate_package(P, identities=None):
    """Check every structural identity on all basis tuples."""
    rep = ValidationReport(P.name)
    nT, nO = P.T.dim, P.O.dim
    eT, eO = P.e_T, P.e_O
    pT = P.tpar
    want = (lambda name: True) if identities is None else (lambda name: name in identities)

    # differentials
    if want("d_T^2 = 0"):
        for i in range(nT):
            rep.check("d_T^2 = 0", lambda: P.dT(P.dT(eT(i))), [P.T.name(i)])
    for j in range(nO):
        if want("d_O^2 = 0"):
            rep.check("d_O^2 = 0", lambda: P.dO(P.dO(eO(j))), [P.O.name(j)])
        if want("B^2 = 0"):
            rep.check("B^2 = 0", lambda: P.Bop(P.Bop(eO(j))), [P.O.name(j)])
        if want("dB + Bd = 0"):
            rep.check("dB + Bd = 0", lambda: vadd(P.dO(P.Bop(eO(j))), P.Bop(P.dO(eO(j)))),
                      [P.O.name(j)])

    # Gerstenhaber structure on T
    f = P.f_class
    for i in range(nT):
        X = eT(i)
        if want("d = [f, -]"):
            rep.check("d = [f, -]", lambda: vadd(P.dT(X), P.br(f, X), -1), [P.T.name(i)])
        if want("unit"):
            rep.check("unit", lambda: vadd(P.mul(P.unit_class, X), X, -1), [P.T.name(i)])
        if want("[deg, X] = wt(X) X"):
            rep.check("[deg, X] = wt(X) X",
                      lambda: vadd(P.br(P.deg_class, X), X, -P.T.wt(i)), [P.T.name(i)])
    if want("Euler f = [deg, f]"):
        rep.check("Euler f = [deg, f]", lambda: vadd(P.br(P.deg_class, f), f, -1), ["f"])
    for j in range(nO):
        if want("L_deg = wt + sigma on Omega"):
            rep.check("L_deg = wt + sigma on Omega",
                      lambda: vadd(P.L(P.deg_class, eO(j)), eO(j), -(P.O.wt(j) + P.sigma)),
                      [P.O.name(j)])
        if want("i_1 = id"):
            rep.check("i_1 = id", lambda: vadd(P.i(P.unit_class, eO(j)), eO(j), -1), [P.O.name(j)])
    for i, k in product(range(nT), repeat=2):
        X, Y = eT(i), eT(k)
        p, q = pT(i), pT(k)
        names = [P.T.name(i), P.T.name(k)]
        if want("graded commutativity"):
            rep.check("graded commutativity",
                      lambda: vadd(P.mul(X, Y), P.mul(Y, X), -sign(p * q)), names)
        if want("bracket antisymmetry"):
            rep.check("bracket antisymmetry",
                      lambda: vadd(P.br(X, Y), P.br(Y, X), sign((p - 1) * (q - 1))), names)
        if want("d Leibniz"):
            rep.check("d Leibniz", lambda: vadd(vadd(P.dT(P.mul(X, Y)), P.mul(P.dT(X), Y), -1),
                                                P.mul(X, P.dT(Y)), -sign(p)), names)
    triples = want("associativity") or want("Jacobi") or want("Poisson")
    if triples:
        for i, k, l in product(range(nT), repeat=3):
            X, Y, Z = eT(i), eT(k), eT(l)
            p, q = pT(i), pT(k)
            names = [P.T.name(i), P.T.name(k), P.T.name(l)]
            if want("associativity"):
                rep.check("associativity",
                          lambda: vadd(P.mul(P.mul(X, Y), Z), P.mul(X, P.mul(Y, Z)), -1), names)
            if want("Jacobi"):
                rep.check("Jacobi", lambda: vadd(vadd(P.br(X, P.br(Y, Z)), P.br(P.br(X, Y), Z), -1),
                                                 P.br(Y, P.br(X, Z)), -sign((p - 1) * (q - 1))),
                          names)
            if want("Poisson"):
                rep.check("Poisson", lambda: vadd(vadd(P.br(X, P.mul(Y, Z)), P.mul(P.br(X, Y), Z), -1),
                                                  P.mul(Y, P.br(X, Z)), -sign((p - 1) * q)), names)

    # Cartan calculus
    for i in range(nT):
        X = eT(i)
        p = pT(i)
        for j in range(nO):
            w = eO(j)
            names = [P.T.name(i), P.O.name(j)]
            if want(CARTAN[4]):
                rep.check(CARTAN[4], lambda: vadd(vadd(P.Bop(P.i(X, w)), P.i(X, P.Bop(w)), -sign(p)),
                                                  P.L(X, w)), names)
            if want(CARTAN[5]):
                rep.check(CARTAN[5], lambda: vadd(P.Bop(P.L(X, w)), P.L(X, P.Bop(w)), -sign(p - 1)),
                          names)
            if want(CARTAN[7]):
                rep.check(CARTAN[7], lambda: vadd(vadd(P.dO(P.i(X, w)), P.i(X, P.dO(w)), -sign(p)),
                                                  P.i(P.dT(X), w), -1), names)
            if want(CARTAN[8]):
                rep.check(CARTAN[8], lambda: vadd(vadd(P.dO(P.L(X, w)), P.L(X, P.dO(w)), -sign(p - 1)),
                                                  P.L(P.dT(X), w), 1), names)
    if want(CARTAN[6]):
        for j in range(nO):
            rep.check(CARTAN[6], lambda: vadd(P.L(f, eO(j)), P.dO(eO(j))), [P.O.name(j)])
    pairs = any(want(c) for c in CARTAN[:4])
    if pairs:
        for i, k in product(range(nT), repeat=2):
            X, Y = eT(i), eT(k)
            p, q = pT(i), pT(k)
            try:
                XY = P.mul(X, Y)
            except Truncated:
                XY = None
            try:
                brXY = P.br(X, Y)
            except Truncated:
                brXY = None
            for j in range(nO):
                w = eO(j)
                names = [P.T.name(i), P.T.name(k), P.O.name(j)]
                if want(CARTAN[0]):
                    rep.check(CARTAN[0], lambda: _need(XY) and vadd(P.i(X, P.i(Y, w)), P.i(XY, w), -1),
                              names)
                if want(CARTAN[1]):
                    rep.check(CARTAN[1], lambda: _need(brXY) and vadd(
                        vadd(P.L(X, P.L(Y, w)), P.L(Y, P.L(X, w)), -sign((p - 1) * (q - 1))),
                        P.L(brXY, w), -1), names)
                if want(CARTAN[2]):
                    rep.check(CARTAN[2], lambda: _need(XY) and vadd(
                        vadd(P.L(X, P.i(Y, w)), P.i(X, P.L(Y, w)), sign(p)), P.L(XY, w), -1), names)
                if want(CARTAN[3]):
                    rep.check(CARTAN[3], lambda: _need(brXY) and vadd(
                        vadd(P.i(X, P.L(Y, w)), P.L(Y, P.i(X, w)), -sign(p * (q - 1))),
                        P.i(brXY, w), -1), names)
    return rep


def _need(x):
    if x is None:
        raise Truncated("needed product beyond truncation")
    return True


# -- Calabi-Yau data ----------------------------------------------------------

@dataclass
class CYData:
    """Dimension w (with its parity), the class v1 and a trace functional on Omega."""
    w: Fraction
    v1: dict
    trace: dict
    w_parity: int = None
    strict: bool = False

    def __post_init__(self):
        self.w = Q(self.w)
        if self.w_parity is None:
            if self.w.denominator != 1:
                raise ValidationError("non-integral w needs an explicit parity")
            self.w_parity = int(self.w) % 2
        self.v1 = {k: Q(x) for k, x in self.v1.items() if Q(x)}
        self.trace = {k: Q(x) for k, x in self.trace.items() if Q(x)}

    def rescaled(self, c):
        """v1 -> c v1; the trace is attached to v1 and scales with it."""
        c = Q(c)
        return CYData(self.w, vscale(self.v1, c), vscale(self.trace, c), self.w_parity, self.strict)


# -- homology on T and Omega ----------------------------------------------

def _table_map(space, table, degree, weight):
    cols, missing = {}, set()
    for j in range(space.dim):
        col = table.get(j, {})
        if col is None:
            missing.add(j)
            continue
        cols[j] = col
    return LinMap(space, space, cols, degree, weight), missing


class DiffHomology:
    """Homology of d on T or Omega, restricted to the blocks we can certify."""

    def __init__(self, space, table, weight=1):
        d, missing = _table_map(space, table, 1, weight)
        self.space = space
        self.res = homology(d)
        bad_weights = {space.wt(j) for j in missing}
        # a class of weight w is trustworthy if d is known on weights w-1 and w
        self.ok = [not (space.vector_weight(r) in bad_weights or
                        space.vector_weight(r) - weight in bad_weights)
                   for r in self.res.homology_basis]
        self.missing = missing

    @property
    def reps(self):
        return [r for r, ok in zip(self.res.homology_basis, self.ok) if ok]

    def project(self, v):
        coords = self.res.project(v)
        pos = {old: new for new, old in enumerate(i for i, ok in enumerate(self.ok) if ok)}
        out = {}
        for i, c in coords.items():
            if i not in pos:
                raise Truncated("class beyond the certified weights")
            out[pos[i]] = c
        return out

    def is_boundary(self, v):
        return self.res.is_boundary(v)


@dataclass
class JacobianRing:
    reps: list          # cycles in T, reps[0] is the unit class
    degrees: list
    weights: list       # q_i
    parities: list
    product: dict       # (i, j) -> coords
    d_homology: DiffHomology = None

    @property
    def l(self):
        return len(self.reps)

    def coords(self, X):
        return self.d_homology.project(X)


def jacobian_ring(P):
    H = DiffHomology(P.T, P.d_T, 1)
    reps = H.reps
    if not reps:
        raise ValidationError("empty Jacobian ring")
    # put the unit first
    u = H.project(P.unit_class)
    if not u:
        raise ValidationError("unit class is zero in Jac")
    k = min(u)
    order = [k] + [i for i in range(len(reps)) if i != k]
    base = [P.unit_class] + [reps[i] for i in order[1:]]
    # change of coordinates: old coords -> new coords
    M = [[Fraction(0)] * len(reps) for _ in reps]   # columns: new basis in old coords
    for new, b in enumerate(base):
        for old, c in H.project(b).items():
            M[old][new] = c
    Minv = inverse_matrix(M)
    if Minv is None:
        raise ValidationError("unit change of basis failed")

    def coords(X):
        old = H.project(X)
        out = {}
        for r in range(len(reps)):
            c = sum((Minv[r][s] * x for s, x in old.items()), Fraction(0))
            if c:
                out[r] = c
        return out

    degrees = [P.T.vector_degree(b) for b in base]
    weights = [P.T.vector_weight(b) for b in base]
    parities = [P.T.vector_parity(b) for b in base]
    prod = {}
    for i, j in product(range(len(base)), repeat=2):
        prod[(i, j)] = coords(P.mul(base[i], base[j]))
    # products with boundaries must stay boundaries
    bdry = [b for b in H.res.boundaries_basis if b]
    for i, X in enumerate(base):
        for b in bdry:
            try:
                xb = P.mul(X, b)
            except Truncated:
                continue
            if not H.is_boundary(xb):
                raise ProductNotDescending("product with a boundary is not a boundary",
                                           witness={"X": i, "boundary": _fmt_vec(b)})
    jr = JacobianRing(base, degrees, weights, parities, prod, H)
    jr.coords = coords
    return jr


@dataclass
class IsoCertificate:
    matrix: list              # Jac basis -> Omega_f coordinates
    v_reps: list              # i_{X_i} v1
    omega_homology: DiffHomology
    chain_map: bool = True
    iso: bool = True

    def to_dict(self):
        return {"chain_map": self.chain_map, "iso": self.iso,
                "matrix": [[str(x) for x in r] for r in self.matrix]}


def contraction_map(P, cy):
    """Columns X_i -> i_{X_i} v1; None where the result leaves the truncation."""
    cols = {}
    for i in range(P.T.dim):
        try:
            cols[i] = P.i(P.e_T(i), cy.v1)
        except Truncated:
            cols[i] = None
    return cols


def contraction_iso_check(P, cy, jac=None):
    """X -> i_X v1 as a chain map (T, d) -> (Omega, d) and an iso on homology."""
    C = contraction_map(P, cy)
    if P.dO(cy.v1):
        raise NotQuasiIso("v1 is not d-closed", stage="contraction_iso_check")
    for i in range(P.T.dim):
        try:
            lhs = _lin(C, P.dT(P.e_T(i)))
        except Truncated:
            continue
        if C[i] is None:
            continue
        try:
            rhs = P.dO(C[i])
        except Truncated:
            continue
        if vadd(lhs, rhs, -1):
            raise NotChainMap("contraction is not a chain map", stage="contraction_iso_check",
                              witness={"X": P.T.name(i)})
    jac = jacobian_ring(P) if jac is None else jac
    HO = DiffHomology(P.O, P.d_O, 1)
    v_reps = [_lin(C, X) for X in jac.reps]
    rows = []
    for v in v_reps:
        coords = HO.project(v)
        rows.append([coords.get(k, Fraction(0)) for k in range(len(HO.reps))])
    if len(HO.reps) != jac.l or (rows and inverse_matrix(rows) is None) or not rows:
        raise NotQuasiIso("contraction is not an isomorphism on homology",
                          stage="contraction_iso_check", anchor="conj:isom",
                          witness={"dim_Jac": jac.l, "dim_Omega_f": len(HO.reps)})
    # [1_A] -> v1
    if vadd(v_reps[0], cy.v1, -1):
        raise NotQuasiIso("unit does not map to v1", stage="contraction_iso_check")
    return IsoCertificate(rows, v_reps, HO)


# -- pairings ---------------------------------------------------------------

def eta_pairing(P, jac, cy, O_homology=None):
    """eta(X, Y) = trace(i_{X.Y} v1) on the Jacobian basis."""
    for j in range(P.O.dim):
        try:
            b = P.dO(P.e_O(j))
        except Truncated:
            continue
        if vdot(cy.trace, b):
            raise Degenerate("trace does not vanish on d-boundaries", stage="eta_pairing",
                             witness={"element": P.O.name(j)})
    l = jac.l
    eta = [[Fraction(0)] * l for _ in range(l)]
    for i, j in product(range(l), repeat=2):
        XY = P.mul(jac.reps[i], jac.reps[j])
        eta[i][j] = vdot(cy.trace, P.i(XY, cy.v1))
    if inverse_matrix(eta) is None:
        raise Degenerate("eta is degenerate", stage="eta_pairing", witness={"eta": _fmt_mat(eta)})
    for i, j in product(range(l), repeat=2):
        if eta[i][j] != sign(jac.parities[i] * jac.parities[j]) * eta[j][i]:
            raise Degenerate("eta is not graded symmetric", stage="eta_pairing",
                             witness={"pair": [i, j]})
    return eta


def j_pairing(jac, eta, cy, hodge=None):
    l = jac.l
    J = [[sign(cy.w_parity * jac.parities[j]) * eta[i][j] for j in range(l)] for i in range(l)]
    if hodge is not None:
        _check_perfect(J, hodge, cy)
    return J


def _check_perfect(J, hodge, cy):
    l = len(J)
    bideg = hodge.bidegrees
    for i, j in product(range(l), repeat=2):
        if J[i][j] and bideg[j] != (cy.w - bideg[i][0], cy.w - bideg[i][1]):
            raise NotPerfect("J pairs non-dual Hodge pieces", stage="j_pairing",
                             witness={"pair": [i, j]})
    for pq in set(bideg):
        dual = (cy.w - pq[0], cy.w - pq[1])
        rows = [i for i in range(l) if bideg[i] == pq]
        cols = [j for j in range(l) if bideg[j] == dual]
        if len(rows) != len(cols):
            raise NotPerfect("dual Hodge pieces differ in dimension", stage="j_pairing")
        if rows and inverse_matrix([[J[i][j] for j in cols] for i in rows]) is None:
            raise NotPerfect("J is not perfect", stage="j_pairing", witness={"piece": [str(x) for x in pq]})


def _fmt_mat(m):
    return [[str(x) for x in r] for r in m]


# -- Hodge data ---------------------------------------------------------------

@dataclass
class HodgeData:
    v_reps: list
    N: list                # matrix of N_A on Omega_f in the basis v_i
    exponents: list        # q_i
    bidegrees: list        # (p, q) for each v_i
    hodge_numbers: dict
    filtration: dict       # q -> indices with exponent <= q
    checks: dict

    def to_dict(self):
        return {"exponents": [str(q) for q in self.exponents],
                "hodge_numbers": [{"p": str(p), "q": str(q), "h": h}
                                  for (p, q), h in sorted(self.hodge_numbers.items())],
                "checks": self.checks}


def hodge_data(P, cy, jac, iso, strict=False):
    HO = iso.omega_homology
    l = jac.l
    # coordinates of Omega_f classes in the v-basis
    Minv = inverse_matrix(iso.matrix)

    def vcoords(w):
        c = HO.project(w)
        out = {}
        for i in range(l):
            x = sum((c.get(k, 0) * Minv[k][i] for k in range(l)), Fraction(0))
            if x:
                out[i] = x
        return out

    N = [[Fraction(0)] * l for _ in range(l)]
    for i, v in enumerate(iso.v_reps):
        for k, x in vcoords(P.N(v)).items():
            N[k][i] = x
    for i in range(l):
        for k in range(l):
            want = jac.weights[i] if i == k else 0
            if N[k][i] != want:
                raise HodgePropertyViolated("N_A is not diagonal with eigenvalues q_i",
                                            stage="hodge_data", witness={"entry": [k, i]})
    q = list(jac.weights)
    if strict and any(x.denominator != 1 for x in q):
        raise HodgePropertyViolated("non-integral exponent in strict mode", stage="hodge_data",
                                    anchor="prop:Hodge numbers",
                                    witness={"exponents": [str(x) for x in q]})
    bideg = []
    for i in range(l):
        omega_bar = jac.degrees[i]  # degree of i_X v1 shifted by w
        p = cy.w - omega_bar + q[i]
        bideg.append((p, q[i]))
    hn = {}
    for b in bideg:
        hn[b] = hn.get(b, 0) + 1
    w = cy.w
    checks = {
        "h_negative_vanish": all(p >= 0 and qq >= 0 for (p, qq) in hn),
        "h_w0_is_1": hn.get((w, Fraction(0)), 0) == 1,
        "duality": all(hn.get((w - p, qq), 0) == hn.get((p, w - qq), 0)
                       for (p, qq) in list(hn) + [(w - p, w - qq) for (p, qq) in hn]),
        "exponent_duality": sorted(q) == sorted(w - x for x in q),
    }
    for name, ok in checks.items():
        if not ok:
            raise HodgePropertyViolated(f"Hodge property {name} fails", stage="hodge_data",
                                        anchor="prop:Hodge numbers",
                                        witness={"hodge_numbers": {f"{p},{qq}": h for (p, qq), h in hn.items()}})
    filt = {}
    for x in sorted(set(q)):
        filt[x] = [i for i in range(l) if q[i] <= x]
    return HodgeData(list(iso.v_reps), N, q, bideg, hn, filt, checks)
