"""Weight-graded polynomial models of the calculus of a Landau-Ginzburg potential.

For f = x^n / n the polyvector fields are k[x][theta] (theta = d/dx, odd) and
the forms are k[x] + k[x] dx.  The de Rham differential plays the role of B,
f enters through d = [f, -] on T and d = -L_f on forms.  Degrees are
rational, so every basis element carries an explicit parity.

Weights (T-weight of x^k theta^e is (k - e)/n; forms use the weight of N =
L_deg - sigma with sigma = 1/n) are truncated at a cap W.  Any table entry whose
result would exceed the cap is stored as None.
"""

from fractions import Fraction

from .calculus import CalculusPackage, CYData
from .graded import GradedBasisSpace, Q, sign, vadd, vscale


def _t_basis(n, W):
    out = []
    k = 0
    while True:
        added = False
        for e in (0, 1):
            wt = Fraction(k - e, n)
            if wt <= W:
                name = f"x^{k}" + (".th" if e else "")
                deg = Fraction(2 * k, n) + e * (1 - Fraction(2, n))
                out.append(((k, e), name, deg, wt, e))
                added = True
        if not added:
            return out
        k += 1


def _o_basis(n, W):
    out = []
    k = 0
    while True:
        added = False
        for e in (0, 1):
            wt = Fraction(k - 1 + e, n)
            if wt <= W:
                name = f"x^{k}" + (".dx" if e else "")
                deg = Fraction(2 * k, n) + e * (Fraction(2, n) - 1)
                out.append(((k, e), name, deg, wt, e))
                added = True
        if not added:
            return out
        k += 1


class _Poly:
    """Exact operations on k[x][theta] and on forms, as dicts of monomials."""

    def __init__(self, n):
        self.n = n

    def mul(self, X, Y):
        out = {}
        for (a, e), c in X.items():
            for (b, g), d in Y.items():
                if e + g <= 1:
                    key = (a + b, e + g)
                    out[key] = out.get(key, 0) + c * d
        return {k: v for k, v in out.items() if v}

    def i(self, X, w):
        out = {}
        for (a, e), c in X.items():
            for (k, g), d in w.items():
                if e == 0:
                    key = (a + k, g)
                elif g == 1:
                    key = (a + k, 0)
                else:
                    continue
                out[key] = out.get(key, 0) + c * d
        return {k: v for k, v in out.items() if v}

    def B(self, w):
        out = {}
        for (k, g), d in w.items():
            if g == 0 and k:
                out[(k - 1, 1)] = out.get((k - 1, 1), 0) + k * d
        return out

    def L(self, X, p, w):
        # L_X = -[B, i_X]
        return vadd(vscale(self.B(self.i(X, w)), -1), self.i(X, self.B(w)), sign(p))

    def decode(self, w):
        """The polyvector Z with i_Z dx = w."""
        return {(k, 1 - g): c for (k, g), c in w.items()}

    def bracket(self, X, p, Y, q):
        # i_[X,Y] = i_X L_Y - (-1)^(p(q-1)) L_Y i_X, read off on dx
        dx = {(0, 1): Fraction(1)}
        op = vadd(self.i(X, self.L(Y, q, dx)), self.L(Y, q, self.i(X, dx)), -sign(p * (q - 1)))
        return self.decode(op)


def polynomial_package(n, W=None, f_coeff=1, name=None):
    """The truncated calculus package of f = f_coeff * x^n / n."""
    n = int(n)
    if n < 2:
        raise ValueError("need n >= 2")
    W = Q(W) if W is not None else Fraction(2)
    f_coeff = Q(f_coeff)
    R = _Poly(n)
    tb, ob = _t_basis(n, W), _o_basis(n, W)
    T = GradedBasisSpace([(nm, deg, wt, e) for _, nm, deg, wt, e in tb])
    O = GradedBasisSpace([(nm, deg, wt, e) for _, nm, deg, wt, e in ob])
    t_idx = {m: i for i, (m, *_) in enumerate(tb)}
    o_idx = {m: i for i, (m, *_) in enumerate(ob)}
    t_mon = [m for m, *_ in tb]
    o_mon = [m for m, *_ in ob]

    def to_T(X):
        out = {}
        for m, c in X.items():
            if m not in t_idx:
                return None
            out[t_idx[m]] = c
        return out

    def to_O(w):
        out = {}
        for m, c in w.items():
            if m not in o_idx:
                return None
            out[o_idx[m]] = c
        return out

    def mono(m):
        return {m: Fraction(1)}

    f = {(n, 0): f_coeff / n} if f_coeff else {}
    prod, bracket = {}, {}
    for i, a in enumerate(t_mon):
        for j, b in enumerate(t_mon):
            prod[(i, j)] = to_T(R.mul(mono(a), mono(b)))
            bracket[(i, j)] = to_T(R.bracket(mono(a), a[1], mono(b), b[1]))
    d_T = {i: to_T(R.bracket(f, 0, mono(a), a[1])) for i, a in enumerate(t_mon)}
    d_O = {j: to_O(vscale(R.L(f, 0, mono(m)), -1)) for j, m in enumerate(o_mon)}
    B = {j: to_O(R.B(mono(m))) for j, m in enumerate(o_mon)}
    i_table, L_table = {}, {}
    for i, a in enumerate(t_mon):
        for j, m in enumerate(o_mon):
            i_table[(i, j)] = to_O(R.i(mono(a), mono(m)))
            L_table[(i, j)] = to_O(R.L(mono(a), a[1], mono(m)))
    label = name or (f"A{n - 1}" if f_coeff else f"x^{n}-weights,f=0")
    P = CalculusPackage(
        T=T, O=O, d_T=d_T, d_O=d_O, prod=prod, bracket=bracket, B=B,
        i_table=i_table, L_table=L_table, f_class=to_T(f) if f else {},
        deg_class=to_T({(1, 1): Fraction(-1, n)}), unit_class=to_T({(0, 0): Fraction(1)}),
        sigma=Fraction(1, n), name=label,
        meta={"source": "polynomial", "n": n, "weight_cap": str(W), "f_coeff": str(f_coeff),
              "omega_weight_complete": W})
    return P


def polynomial_cy(P):
    """w = 1 - 2/n (odd), v1 = dx, trace picks the coefficient of x^(n-2) dx."""
    n = P.meta["n"]
    v1 = {P.O.index("x^0.dx"): 1}
    top = f"x^{n - 2}.dx"
    trace = {P.O.index(top): 1} if top in P.O._index else {}
    return CYData(1 - Fraction(2, n), v1, trace, w_parity=1)
