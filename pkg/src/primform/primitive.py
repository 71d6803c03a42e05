"""Trivialization, the primitive form and the induced Frobenius structure.

The classes of the deformed lattice are moved back to t = 0 by
J(a) = exp(i_gamma / u) a and written in the basis u^n zeta_i of H_f.  Such a
coordinate vector is a dict ``i -> {(n, alpha): c}``; scalar (u, t)-series are
dicts ``(n, alpha) -> c``.  With these, the primitive form is the fixed point
of a = e_1 - [(M - 1) a]_{u >= 0}, M being the matrix of J on the lattice
basis omega_j(t).  P1 to P5 are then verified on chain-level elements.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .calculus import Truncated
from .deformation import (DeformedGM, ts_add, ts_deriv, ts_lin, ts_times_poly,
                          ts_truncate, ts_fmt_u, tpoly_fmt, _tp_mat_inverse)
from .derham import Trivialized, apply_O, ushift, uadd
from .errors import (NotIntegrable, PCheckFailed, UniquenessFailure, WindowTooNarrow)
from .graded import sign
from .homology import inverse_matrix
from .series import TPoly, mono_add


# -- scalar (u, t)-series -------------------------------------------------------

def ss_add(a, b, c=1):
    out = dict(a)
    for k, x in b.items():
        y = out.get(k, 0) + c * x
        if y:
            out[k] = y
        else:
            out.pop(k, None)
    return out


def ss_mul(a, b, order, u_hi=None):
    out = {}
    for (n, al), x in a.items():
        for (m, be), y in b.items():
            if sum(al) + sum(be) > order or (u_hi is not None and n + m > u_hi):
                continue
            k = (n + m, mono_add(al, be))
            out[k] = out.get(k, 0) + x * y
    return {k: x for k, x in out.items() if x}


def ss_truncate(a, order, u_hi=None):
    return {(n, al): x for (n, al), x in a.items()
            if sum(al) <= order and (u_hi is None or n <= u_hi)}


def ss_nonneg(a):
    return {(n, al): x for (n, al), x in a.items() if n >= 0}


def ss_from_tpoly(p):
    return {(0, al): x for al, x in p.c.items()}


def ss_u_part(a, n, nvars, order):
    return TPoly({al: x for (m, al), x in a.items() if m == n}, nvars, order)


def ss_fmt(a):
    return [[n, list(al), str(x)] for (n, al), x in sorted(a.items(), key=lambda kv: (kv[0][0], sum(kv[0][1]), kv[0][1]))]


def mat_mul(A, B, order, u_hi=None):
    n, m, p = len(A), len(B), len(B[0])
    out = [[{} for _ in range(p)] for _ in range(n)]
    for i in range(n):
        for j in range(p):
            s = {}
            for k in range(m):
                if A[i][k] and B[k][j]:
                    s = ss_add(s, ss_mul(A[i][k], B[k][j], order, u_hi))
            out[i][j] = s
    return out


def mat_identity(l, nvars):
    z = (0,) * nvars
    return [[({(0, z): Fraction(1)} if i == j else {}) for j in range(l)] for i in range(l)]


def mat_inverse(M, order, nvars, u_hi=None, max_steps=None):
    """Inverse by a Neumann series around the constant (u^0 t^0) part.

    The non-constant part must raise u-degree or t-degree, so the series
    terminates once ``u_hi`` caps the u-powers.
    """
    l = len(M)
    z = (0,) * nvars
    M0 = [[M[i][j].get((0, z), Fraction(0)) for j in range(l)] for i in range(l)]
    inv0 = inverse_matrix(M0)
    if inv0 is None:
        return None
    I0 = [[({(0, z): inv0[i][j]} if inv0[i][j] else {}) for j in range(l)] for i in range(l)]
    X = mat_mul(I0, [[ss_add(M[i][j], {(0, z): M0[i][j]}, -1) for j in range(l)]
                     for i in range(l)], order, u_hi)
    negX = [[{k: -x for k, x in e.items()} for e in r] for r in X]
    S = mat_identity(l, nvars)
    term = S
    steps = max_steps if max_steps is not None else order + (u_hi or 0) + 2
    for _ in range(steps):
        term = mat_mul(term, negX, order, u_hi)
        if not any(e for r in term for e in r):
            break
        S = [[ss_add(S[i][j], term[i][j]) for j in range(l)] for i in range(l)]
    return mat_mul(S, I0, order, u_hi)


# -- coordinate series ----------------------------------------------------------

def cs_add(a, b, c=1):
    out = {i: dict(v) for i, v in a.items()}
    for i, v in b.items():
        out[i] = ss_add(out.get(i, {}), v, c)
    return {i: v for i, v in out.items() if v}


def cs_vector(c, l):
    return [c.get(i, {}) for i in range(l)]


# -- trivialization -------------------------------------------------------------

class Trivialization:
    """J = exp(i_gamma/u) and its inverse, with coordinates in the zeta basis."""

    def __init__(self, ds, H, sec, u_window=None):
        self.ds, self.H, self.sec = ds, H, sec
        self.P = ds.P
        self.l = ds.l
        self.order = ds.order
        self.u_window = tuple(u_window) if u_window is not None else None
        self.triv = Trivialized(H, sec)
        self.checks = {}

    def _exp(self, a, s, order=None):
        ds = self.ds
        o = self.order if order is None else order
        out = dict(a)
        term = a
        for k in range(1, o + 1):
            term = ts_lin(lambda w: ushift(w, -1), ds.i_series(ds.mc.gamma, term, o))
            if not term:
                break
            out = ts_add(out, term, Fraction(s ** k, factorial(k)))
        self._window(out)
        return out

    def _window(self, a):
        if self.u_window is None:
            return
        lo, hi = self.u_window
        ms = [m for v in a.values() for m, _ in v]
        if ms and (min(ms) < lo or max(ms) > hi):
            raise WindowTooNarrow("u-window too narrow for the trivialization",
                                  stage="fundamental_solution",
                                  witness={"window": [lo, hi], "required": [min(min(ms), lo),
                                                                            max(max(ms), hi)]})

    def apply(self, a, order=None):
        return self._exp(a, 1, order)

    def inverse(self, a, order=None):
        return self._exp(a, -1, order)

    def coords(self, a, order=None):
        """zeta-coordinates of J(a) for a D_t-closed t-series a."""
        b = self.apply(a, order)
        out = {}
        for al, v in b.items():
            for i, poly in self.triv.coords(v).items():
                d = out.setdefault(i, {})
                for n, c in poly.items():
                    d[(n, al)] = c
        return {i: v for i, v in out.items() if v}


def fundamental_solution(ds, H, sec, u_window=None, order=None):
    """Build J and certify the conjugation identity and the flat sections."""
    P, l = ds.P, ds.l
    tr = Trivialization(ds, H, sec, u_window)
    N = ds.order if order is None else order
    nab = DeformedGM(ds)
    checks = {}
    bad, n = [], 0
    for j in range(P.O.dim):
        a = {(0,) * l: {(0, j): Fraction(1)}}
        try:
            lhs = ds.D_t(tr.inverse(a, N), N)
            rhs = tr.inverse(ts_lin(H.D, a), N)
        except Truncated:
            continue
        n += 1
        if ts_add(lhs, rhs, -1):
            bad.append(P.O.name(j))
    checks["(d_gamma + uB) J^-1 = J^-1 (d + uB)"] = {"pass": not bad, "checked": n,
                                                      "witnesses": bad[:3]}
    flat_t, flat_u = True, True
    for i, z in enumerate(sec.zetas):
        s = tr.inverse({(0,) * l: dict(z)}, N)
        for k in range(l):
            if ts_truncate(nab.d_t(k, s, N), N - 1):
                flat_t = False
        lhs = ts_add(nab.u_d_du(s, N), s, -sec.exponents[i])
        ideg = {(0,) * l: ushift(apply_O(lambda v: P.i(P.deg_class, v), z), -1)}
        rhs = ds.D_t(tr.inverse(ideg, N), N)
        if ts_add(lhs, rhs, -1):
            flat_u = False
    checks["nabla_i J^-1 zeta_i = 0"] = {"pass": flat_t}
    checks["nabla_{u d/du} J^-1 zeta_i = q_i J^-1 zeta_i"] = {
        "pass": flat_u, "certificate": "D_t(J^-1 u^-1 i_deg zeta_i)"}
    for name, c in checks.items():
        if not c["pass"]:
            raise PCheckFailed(f"trivialization check failed: {name}",
                               stage="fundamental_solution", anchor="eq:flat sections",
                               witness=c.get("witnesses"))
    tr.checks = checks
    return tr


class PulledBackK:
    """K_F(a, b) = K(J a, J b) on zeta-coordinate series."""

    def __init__(self, tr, K):
        self.tr, self.K = tr, K
        self.w = K.w

    def on_coords(self, a, b, order):
        """dict alpha -> Laurent polynomial in u."""
        out = {}
        J = self.K.J
        for i, ai in a.items():
            for j, bj in b.items():
                if not J[i][j]:
                    continue
                for (n, al), x in ai.items():
                    for (m, be), y in bj.items():
                        if sum(al) + sum(be) > order:
                            continue
                        g = mono_add(al, be)
                        e = Fraction(n + m) + self.w
                        slot = out.setdefault(g, {})
                        slot[e] = slot.get(e, 0) + x * y * sign(m) * J[i][j]
        return {g: {e: x for e, x in v.items() if x} for g, v in out.items()
                if any(v.values())}

    def __call__(self, a, b, order):
        return self.on_coords(self.tr.coords(a, order), self.tr.coords(b, order), order)


def pullback_K(tr, K):
    return PulledBackK(tr, K)


# -- the primitive form ---------------------------------------------------------

@dataclass
class PrimitiveFormResult:
    zeta: dict                  # t-series of Omega[[u]] elements
    a: list                     # coefficients of zeta in the lattice basis
    r: Fraction
    Z: list                     # zeta-coordinates of J(u nabla_i zeta)
    metric: list                # g_ij(t) with K_F(Z_i, Z_j) = g_ij u^w
    christoffel: dict           # (i, j) -> [Gamma_ij^k]
    N_endo: dict                # j -> [N_j^k]
    order: int
    certificates: dict = field(default_factory=dict)
    uniqueness: list = field(default_factory=list)

    def to_dict(self, P):
        return {"order": self.order, "r": str(self.r),
                "zeta": ts_fmt_u(P, self.zeta),
                "lattice_coefficients": [ss_fmt(x) for x in self.a],
                "metric": [[tpoly_fmt(x) for x in row] for row in self.metric],
                "christoffel": {f"{i + 1},{j + 1}": [tpoly_fmt(x) for x in v]
                                for (i, j), v in sorted(self.christoffel.items())},
                "N": {str(j + 1): [tpoly_fmt(x) for x in v] for j, v in sorted(self.N_endo.items())},
                "uniqueness": self.uniqueness,
                "certificates": self.certificates}


def _lattice_matrix(tr, lattice):
    l = len(lattice.omegas)
    M = [[{} for _ in range(l)] for _ in range(l)]
    for j, w in enumerate(lattice.omegas):
        c = tr.coords(w)
        for k in range(l):
            M[k][j] = c.get(k, {})
    return M


def _fail(name, order=None, witness=None):
    raise PCheckFailed(f"{name} fails", stage="solve_primitive_form",
                       anchor="primitive form zeta", witness={"condition": name, "order": order,
                                                              "witness": witness})


def _first_bad_order(cs_or_ss):
    orders = []
    for v in (cs_or_ss.values() if cs_or_ss and isinstance(next(iter(cs_or_ss.values())), dict)
              else [cs_or_ss]):
        orders += [sum(al) for (_, al) in v]
    return min(orders) if orders else None


def solve_primitive_form(ds, tr, S, lattice, K, order=None):
    """The unique zeta in H^(0)_F with J(zeta) in zeta_1 + S (x) O_M, then P1 to P5."""
    l = ds.l
    No = ds.order                   # working t-order
    N = No - 2 if order is None else order   # verified t-order
    z0 = (0,) * l
    M = _lattice_matrix(tr, lattice)
    # M(0) must be the identity, so each order of the fixed point is a unique solve
    M_at0 = [[{k: x for k, x in M[i][j].items() if not sum(k[1])} for j in range(l)]
             for i in range(l)]
    if M_at0 != mat_identity(l, l):
        raise UniquenessFailure("J is not the identity on the lattice at t = 0",
                                stage="solve_primitive_form", witness={"M(0)": [
                                    [ss_fmt(x) for x in r] for r in M_at0]})
    uniq = []
    a = [({(0, z0): Fraction(1)} if j == 0 else {}) for j in range(l)]
    for it in range(No + 2):
        c = [{} for _ in range(l)]
        for k in range(l):
            for j in range(l):
                if M[k][j] and a[j]:
                    c[k] = ss_add(c[k], ss_mul(M[k][j], a[j], No))
        new = []
        for k in range(l):
            rest = ss_nonneg(ss_add(c[k], a[k], -1))
            base = {(0, z0): Fraction(1)} if k == 0 else {}
            new.append(ss_add(base, rest, -1))
        if new == a:
            break
        a = new
    else:
        raise UniquenessFailure("fixed point iteration did not stabilize",
                                stage="solve_primitive_form")
    for k in range(No + 1):
        unknowns = sum(1 for j in range(l) for (n, al) in a[j] if sum(al) == k)
        uniq.append({"t_order": k, "system": "identity (M(0) = 1)", "rank": "full",
                     "nonzero_unknowns": unknowns})
    # zeta on the chain level
    zeta = {}
    for j in range(l):
        for (n, al), x in a[j].items():
            for be, v in lattice.omegas[j].items():
                if sum(al) + sum(be) <= No:
                    g = mono_add(al, be)
                    zeta[g] = uadd(zeta.get(g, {}), ushift(v, n), x)
    zeta = {g: v for g, v in zeta.items() if v}
    certs = {}
    certs["zeta(0) = zeta_1"] = {"pass": zeta.get(z0) == tr.sec.zetas[0]}
    if not certs["zeta(0) = zeta_1"]["pass"]:
        _fail("zeta(0) = zeta_1", 0)
    if ds.D_t(zeta, No):
        _fail("zeta is D_t-closed")
    if any(m < 0 for v in zeta.values() for m, _ in v):
        _fail("zeta in H^(0)")
    cz = tr.coords(zeta)
    target = {0: {(0, z0): Fraction(1)}}
    offset = cs_add(cz, target, -1)
    in_S = all(n < 0 for v in offset.values() for (n, _) in v)
    certs["J(zeta) in zeta_1 + S"] = {"pass": in_S}
    if not in_S:
        _fail("J(zeta) in zeta_1 + S")
    nab = DeformedGM(ds)
    # Z_i = u nabla_i zeta
    Zc = []          # chain level
    for i in range(l):
        part = ts_lin(lambda w: ushift(w, 1), ts_deriv(zeta, i))
        part = ts_add(ts_truncate(part, No - 1), ds.i_series(ds.dF[i], zeta, No - 1))
        Zc.append(part)
    Z = [tr.coords(z, No - 1) for z in Zc]
    Minv = mat_inverse(M, No, l)
    # b = coefficients of Z_i in the lattice basis: Z_i = sum_j b_ji omega_j
    b = [[{} for _ in range(l)] for _ in range(l)]
    for i in range(l):
        col = mat_mul(Minv, [[Z[i].get(k, {})] for k in range(l)], No - 1)
        for j in range(l):
            b[j][i] = col[j][0]
    neg = [x for r in b for e in r for (n, _) in e for x in [n] if n < 0]
    b00 = [[b[j][i].get((0, z0), Fraction(0)) for i in range(l)] for j in range(l)]
    ok = not neg and inverse_matrix(b00) is not None
    certs["P1: u nabla zeta gives T_M[[u]] = H^(0)_F"] = {
        "pass": ok, "constant_matrix": [[str(x) for x in r] for r in b00]}
    if not ok:
        _fail("P1 isomorphism", 0)
    # P1: u nabla_e zeta = zeta
    lhs = {}
    for i in range(l):
        lhs = ts_add(lhs, ts_times_poly(ds.e[i], Zc[i], No - 1))
    res = cs_add(tr.coords(ts_add(lhs, ts_truncate(zeta, No - 1), -1), No - 1), {})
    certs["P1: u nabla_e zeta = zeta"] = {"pass": not _trunc_cs(res, N)}
    if not certs["P1: u nabla_e zeta = zeta"]["pass"]:
        _fail("P1: u nabla_e zeta = zeta", _first_bad_order(res), res)
    # P2: K_F(u nabla_i zeta, u nabla_j zeta) in O_M u^w
    KF = pullback_K(tr, K)
    w = K.w
    metric = [[None] * l for _ in range(l)]
    ok = True
    for i in range(l):
        for j in range(l):
            val = KF.on_coords(Z[i], Z[j], No - 1)
            g = {}
            for al, lp in val.items():
                for e, x in lp.items():
                    if e != w:
                        if sum(al) <= N:
                            ok = False
                    else:
                        g[al] = x
            metric[i][j] = TPoly(g, l, No - 1)
    certs["P2: K_F(u nabla zeta, u nabla zeta) in O_M u^w"] = {"pass": ok}
    if not ok:
        _fail("P2")
    # P3: nabla_{u d/du + E} zeta = r zeta, r read off at t = 0
    lhs = ts_add(nab.u_d_du(zeta, No), nab.euler_part(zeta, No))
    c0 = tr.coords({z0: lhs[z0]} if z0 in lhs else {}, 0)
    r = c0.get(0, {}).get((0, z0), Fraction(0))
    res = tr.coords(ts_add(lhs, zeta, -r), No - 1)
    certs["P3: nabla_{u d/du + E} zeta = r zeta"] = {"pass": not _trunc_cs(res, N), "r": str(r)}
    if not certs["P3: nabla_{u d/du + E} zeta = r zeta"]["pass"]:
        _fail("P3", _first_bad_order(res), None)
    if r != 0:
        _fail("minimal exponent r = 0", 0, str(r))
    # P4 and P5: expand in the basis Z_k over O_M[[u]]
    U = No + 3
    binv = mat_inverse(b, No - 1, l, u_hi=U)
    if binv is None:
        _fail("P1 matrix invertible", 0)

    def in_Z_basis(y, o):
        """coef_k with y = sum_k coef_k Z_k, coef in O_M[[u]] (u-degree <= U)."""
        col = mat_mul(Minv, [[y.get(k, {})] for k in range(l)], o)
        col = mat_mul(binv, col, o, u_hi=U)
        coefs = [col[k][0] for k in range(l)]
        if any(n < 0 and sum(al) <= N for cf in coefs for (n, al) in cf):
            return None
        return coefs

    C = ds.product
    christoffel, ok4, bad4 = {}, True, None
    for i in range(l):
        for j in range(l):
            y = ts_add(ts_truncate(ts_lin(lambda v: ushift(v, 1), ts_deriv(Zc[j], i)), No - 2),
                       ds.i_series(ds.dF[i], Zc[j], No - 2))
            coefs = in_Z_basis(tr.coords(y, No - 2), No - 2)
            if coefs is None:
                ok4, bad4 = False, (i, j)
                continue
            for k in range(l):
                if ss_u_part(coefs[k], 0, l, N) != C[(i, j)][k].truncate(N):
                    ok4, bad4 = False, (i, j, k, "u^0")
                if any(n >= 2 and sum(al) <= N for (n, al) in coefs[k]):
                    ok4, bad4 = False, (i, j, k, "u^2")
            christoffel[(i, j)] = [ss_u_part(coefs[k], 1, l, N) for k in range(l)]
    certs["P4: u nabla_X nabla_Y zeta = nabla_{X o Y} zeta + u nabla_{nabla-flat_X Y} zeta"] = {
        "pass": ok4, "witness": list(map(str, bad4)) if bad4 else None}
    if not ok4:
        _fail("P4", None, bad4)
    Nend, ok5, bad5 = {}, True, None
    E = ds.E
    for j in range(l):
        y = ts_lin(lambda v: ushift(v, 1), nab.u_d_du(Zc[j], No - 1))
        coefs = in_Z_basis(tr.coords(y, No - 1), No - 1)
        if coefs is None:
            ok5, bad5 = False, (j,)
            continue
        for k in range(l):
            EC = TPoly({}, l, N)
            for i in range(l):
                EC = EC + E[i] * C[(i, j)][k]
            if ss_u_part(coefs[k], 0, l, N) != (-EC).truncate(N):
                ok5, bad5 = False, (j, k, "u^0")
            if any(n >= 2 and sum(al) <= N for (n, al) in coefs[k]):
                ok5, bad5 = False, (j, k, "u^2")
        Nend[j] = [ss_u_part(coefs[k], 1, l, N) for k in range(l)]
    certs["P5: u nabla_{d/du}(u nabla_X zeta) = -nabla_{E o X} zeta + u nabla_{N X} zeta"] = {
        "pass": ok5, "witness": list(map(str, bad5)) if bad5 else None}
    if not ok5:
        _fail("P5", None, bad5)
    return PrimitiveFormResult(zeta, a, r, Z, metric, christoffel, Nend, N, certs, uniq)


def _trunc_cs(c, order):
    return {i: {k: x for k, x in v.items() if sum(k[1]) <= order} for i, v in c.items()
            if any(sum(k[1]) <= order for k in v)}


# -- Frobenius structure --------------------------------------------------------

@dataclass
class FrobeniusStructure:
    order: int
    eta: list                   # eta_ij(t) (TPoly), constant in flat coordinates
    eta_flat: list              # constant matrix in flat coordinates
    C: dict                     # (i, j) -> [C_ij^k(t)]
    e: list
    E: list
    flat: list                  # tau_a(t)
    inverse_flat: list          # t_i(tau)
    potential: TPoly
    report: dict
    w: Fraction

    def potential_terms(self):
        return [[list(al), str(x)] for al, x in
                sorted(self.potential.c.items(), key=lambda kv: (sum(kv[0]), tuple(-a for a in kv[0])))]

    def to_dict(self):
        return {"order": self.order, "w": str(self.w),
                "eta": [[str(x) for x in r] for r in self.eta_flat],
                "eta_t": [[tpoly_fmt(x) for x in r] for r in self.eta],
                "C": {f"{i + 1},{j + 1}": [tpoly_fmt(x) for x in v]
                      for (i, j), v in sorted(self.C.items())},
                "e": [tpoly_fmt(x) for x in self.e], "E": [tpoly_fmt(x) for x in self.E],
                "flat_coordinates": [tpoly_fmt(x) for x in self.flat],
                "inverse_flat_coordinates": [tpoly_fmt(x) for x in self.inverse_flat],
                "potential": self.potential_terms(),
                "potential_text": self.potential.pretty(),
                "report": self.report}


def _nif(name, witness=None):
    raise NotIntegrable(f"{name} fails", stage="build_frobenius", anchor="Frobenius structure",
                        witness=witness)


def _flat_coordinates(Gamma, l, N):
    """tau_a with d tau_a flat for the connection with symbols Gamma_ij^k (known mod t^(N+1))."""
    taus = []
    for a in range(l):
        theta = [TPoly.const(int(j == a), l, N + 1) for j in range(l)]
        for m in range(1, N + 2):
            R = {}
            for i in range(l):
                for j in range(l):
                    s = TPoly({}, l, N + 1)
                    for k in range(l):
                        s = s + Gamma[(i, j)][k] * theta[k]
                    R[(i, j)] = TPoly({al: x for al, x in s.c.items() if sum(al) == m - 1}, l, N + 1)
            for j in range(l):
                new = TPoly({}, l, N + 1)
                for i in range(l):
                    new = new + TPoly.var(i, l, N + 1) * R[(i, j)]
                new = new * Fraction(1, m)
                for i in range(l):
                    if new.derivative(i).truncate(m - 1) != R[(i, j)].truncate(m - 1):
                        _nif("flat 1-form integrability", {"a": a + 1, "j": j + 1, "order": m})
                theta[j] = theta[j] + new
        tau = TPoly({}, l, N + 2)
        for m in range(0, N + 2):
            for j in range(l):
                part = TPoly({al: x for al, x in theta[j].c.items() if sum(al) == m}, l, N + 2)
                tau = tau + TPoly.var(j, l, N + 2) * part * Fraction(1, m + 1)
        for j in range(l):
            if tau.derivative(j).truncate(N + 1) != theta[j].truncate(N + 1):
                _nif("flat coordinate integrability", {"a": a + 1, "j": j + 1})
        taus.append(tau)
    return taus


def _invert_coordinates(taus, l, order):
    """t_i as series in tau, given tau_a(t) = t_a + O(t^2)."""
    tvars = [TPoly.var(i, l, order) for i in range(l)]
    h = [taus[i].truncate(order) - TPoly.var(i, l, order) for i in range(l)]
    t = list(tvars)
    for _ in range(order + 1):
        t = [tvars[i] - h[i].subs(t) for i in range(l)]
    for i in range(l):
        if taus[i].truncate(order).subs(t) != tvars[i]:
            _nif("inverse of the flat coordinate change")
    return t


def build_frobenius(pf, ds, cy, order=None):
    l = ds.l
    N = pf.order if order is None else order
    w, wpar = cy.w, cy.w_parity
    parities = ds.jac.parities
    report = {}
    eta = [[pf.metric[i][j].truncate(N) * sign(wpar * parities[j]) for j in range(l)]
           for i in range(l)]
    C = {k: [x.truncate(N) for x in v] for k, v in ds.product.items()}
    Gamma = {k: [x.truncate(N) for x in v] for k, v in pf.christoffel.items()}
    e = [x.truncate(N) for x in ds.e]
    E = [x.truncate(N) for x in ds.E]
    zero = TPoly({}, l, N)
    # eta symmetric, nondegenerate
    sym = all(eta[i][j] == eta[j][i] for i in range(l) for j in range(l))
    eta0 = [[eta[i][j].const_term() for j in range(l)] for i in range(l)]
    report["eta symmetric"] = sym
    report["eta nondegenerate"] = inverse_matrix(eta0) is not None
    # commutative, associative, unit
    report["o commutative"] = all(C[(i, j)] == C[(j, i)] for i in range(l) for j in range(l))
    assoc = True
    for i in range(l):
        for j in range(l):
            for k in range(l):
                for m in range(l):
                    lhs = sum((C[(i, j)][p] * C[(p, k)][m] for p in range(l)), zero)
                    rhs = sum((C[(j, k)][p] * C[(i, p)][m] for p in range(l)), zero)
                    if lhs != rhs:
                        assoc = False
    report["o associative"] = assoc
    report["e is the unit"] = all(sum((e[i] * C[(i, j)][k] for i in range(l)), zero) ==
                                  TPoly.const(int(j == k), l, N) for j in range(l) for k in range(l))
    # Frobenius property eta(X o Y, Z) = eta(X, Y o Z)
    frob = True
    for i in range(l):
        for j in range(l):
            for k in range(l):
                lhs = sum((C[(i, j)][p] * eta[p][k] for p in range(l)), zero)
                rhs = sum((C[(j, k)][p] * eta[i][p] for p in range(l)), zero)
                if lhs != rhs:
                    frob = False
    report["eta(X o Y, Z) = eta(X, Y o Z)"] = frob
    # nabla-flat is torsion free, metric, flat, e flat
    report["nabla-flat torsion free"] = all(Gamma[(i, j)] == Gamma[(j, i)]
                                            for i in range(l) for j in range(l))
    No = N - 1
    metric_ok = True
    for i in range(l):
        for j in range(l):
            for k in range(l):
                lhs = eta[j][k].derivative(i).truncate(No)
                rhs = sum((Gamma[(i, j)][p] * eta[p][k] + Gamma[(i, k)][p] * eta[j][p]
                           for p in range(l)), zero).truncate(No)
                if lhs != rhs:
                    metric_ok = False
    report["nabla-flat eta = 0"] = metric_ok
    eflat = all((e[k].derivative(i) + sum((Gamma[(i, j)][k] * e[j] for j in range(l)), zero)
                 ).truncate(No) == TPoly({}, l, No) for i in range(l) for k in range(l))
    report["nabla-flat e = 0"] = eflat
    # Lie_E(o) = o and Lie_E(eta) = (2 - w) eta
    tw = ds.space.t_weights
    lie_o = True
    for (i, j), v in C.items():
        for k in range(l):
            Ec = sum((E[p] * v[k].derivative(p) for p in range(l)), zero).truncate(No)
            val = Ec + v[k].truncate(No) * (tw[i] + tw[j] - tw[k])
            if val != v[k].truncate(No):
                lie_o = False
    report["Lie_E(o) = o"] = lie_o
    lie_eta = True
    for i in range(l):
        for j in range(l):
            Ee = sum((E[p] * eta[i][j].derivative(p) for p in range(l)), zero).truncate(No)
            val = Ee + eta[i][j].truncate(No) * (tw[i] + tw[j])
            if val != eta[i][j].truncate(No) * (2 - w):
                lie_eta = False
    report["Lie_E(eta) = (2 - w) eta"] = lie_eta
    # flat coordinates and the potential
    taus = _flat_coordinates(Gamma, l, N - 1)
    G = [[taus[a].derivative(k).truncate(N) for a in range(l)] for k in range(l)]
    Gi = _tp_mat_inverse(G, N)          # Gi[a][k] = d t_k / d tau_a
    eta_f = [[sum((Gi[a][k] * Gi[b][m] * eta[k][m] for k in range(l) for m in range(l)), zero)
              for b in range(l)] for a in range(l)]
    eta_flat_const = all(not (x - x.const_term()).truncate(N) for r in eta_f for x in r)
    report["eta constant in flat coordinates"] = eta_flat_const
    eta_flat = [[x.const_term() for x in r] for r in eta_f]
    tinv = _invert_coordinates(taus, l, N)
    # c_abc(t), then substituted t = t(tau)
    Ceta = [[[sum((C[(k, m)][n] * eta[n][p] for n in range(l)), zero) for p in range(l)]
             for m in range(l)] for k in range(l)]
    c = {}
    for a in range(l):
        for b in range(l):
            for d in range(l):
                s = zero
                for k in range(l):
                    for m in range(l):
                        for p in range(l):
                            g = Gi[a][k] * Gi[b][m] * Gi[d][p]
                            if g:
                                s = s + g * Ceta[k][m][p]
                c[(a, b, d)] = s.subs(tinv).truncate(N)
    symmetric = all(c[(a, b, d)] == c[tuple(sorted((a, b, d)))] for (a, b, d) in c)
    report["c_abc totally symmetric"] = symmetric
    if not symmetric:
        _nif("total symmetry of c_abc")
    closed = all(c[(a, b, d)].derivative(m) == c[(m, b, d)].derivative(a)
                 for (a, b, d) in c for m in range(l))
    report["d c = 0 (3-tensor closed)"] = closed
    if not closed:
        _nif("closedness of c_abc")
    F = _integrate_potential(c, l, N)
    third = all(_d3(F, a, b, d).truncate(N) == c[(a, b, d)] for (a, b, d) in c)
    report["d^3 F = c_abc"] = third
    # WDVV in flat coordinates
    eif = inverse_matrix(eta_flat)
    wdvv = True
    for a in range(l):
        for b in range(l):
            for d in range(l):
                for m in range(l):
                    lhs = sum((c[(a, b, x)] * c[(y, d, m)] * eif[x][y]
                               for x in range(l) for y in range(l)), zero)
                    rhs = sum((c[(a, d, x)] * c[(y, b, m)] * eif[x][y]
                               for x in range(l) for y in range(l)), zero)
                    if lhs != rhs:
                        wdvv = False
    report["WDVV"] = wdvv
    report["truncation"] = f"mod t^{N + 1}"
    report["normalization"] = {"eta(e, e) at t = 0": str(
        sum((e[i].const_term() * e[j].const_term() * eta0[i][j]
             for i in range(l) for j in range(l)), Fraction(0))),
        "trace": "as supplied with the input"}
    fr = FrobeniusStructure(N, eta, eta_flat, C, e, E, taus, tinv, F, report, w)
    failed = [k for k, v in report.items() if v is False]
    if failed:
        _nif(failed[0], {"failed": failed})
    return fr


def _d3(F, a, b, d):
    return F.derivative(a).derivative(b).derivative(d)


def _integrate_potential(c, l, N):
    """F with d_a d_b d_d F = c_abd and no terms of degree < 3."""
    out = {}
    for (a, b, d), poly in c.items():
        if (a, b, d) != tuple(sorted((a, b, d))):
            continue
        for ga, x in poly.c.items():
            beta = list(ga)
            for i in (a, b, d):
                beta[i] += 1
            beta = tuple(beta)
            if beta in out:
                continue
            # d_a d_b d_d t^beta = falling factorial * t^ga
            ff = Fraction(1)
            cur = list(beta)
            for i in (a, b, d):
                ff *= cur[i]
                cur[i] -= 1
            out[beta] = x / ff
    return TPoly(out, l, N + 3)
