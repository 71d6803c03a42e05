"""Truncated Laurent series in u with power-series coefficients in t.

A term is keyed by ``(k, alpha)``: k is the power of u and alpha a multi-index
in t_1..t_l.  Values are Fractions for scalar series (``space is None``) or
sparse vectors over ``space``.  The u-window ``(lo, hi)`` says which powers
are known; terms outside it are absent by truncation, not zero.  ``order`` is
the t-order cap N: monomials of total degree > N are dropped.
"""

from fractions import Fraction
from itertools import product as _product

from .errors import CapMismatch
from .graded import vadd, viadd, vscale


def monomials(nvars, order):
    """All multi-indices of total degree <= order, graded then lex."""
    out = []
    for deg in range(order + 1):
        for a in _product(range(deg + 1), repeat=nvars):
            if sum(a) == deg:
                out.append(a)
    return sorted(out, key=lambda a: (sum(a), tuple(-x for x in a)))


def mono_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def mono_sub(a, b):
    c = tuple(x - y for x, y in zip(a, b))
    return c if min(c, default=0) >= 0 else None


def mono_deg(a):
    return sum(a)


def unit_mono(nvars, i):
    return tuple(int(j == i) for j in range(nvars))


def _is_scalar(x):
    return not isinstance(x, dict)


class UTSeries:
    def __init__(self, space, coeffs, nvars, order, u_window=(-(10 ** 6), 10 ** 6),
                 homogeneous=False):
        self.space = space
        self.nvars = nvars
        self.order = order
        self.u_window = tuple(u_window)
        lo, hi = self.u_window
        self.coeffs = {}
        for (k, a), v in coeffs.items():
            if sum(a) > order or k < lo or k > hi:
                continue
            if _is_scalar(v):
                v = Fraction(v)
                if v:
                    self.coeffs[(k, tuple(a))] = v
            else:
                v = {i: x for i, x in v.items() if x}
                if v:
                    self.coeffs[(k, tuple(a))] = v
        self.homogeneous = homogeneous

    # construction helpers
    @classmethod
    def scalar(cls, terms, nvars, order, u_window=(-(10 ** 6), 10 ** 6)):
        return cls(None, terms, nvars, order, u_window)

    @classmethod
    def constant(cls, space, v, nvars, order, u_window=(-(10 ** 6), 10 ** 6)):
        zero = (0,) * nvars
        return cls(space, {(0, zero): v}, nvars, order, u_window)

    def _like(self, coeffs, u_window=None, homogeneous=None):
        return UTSeries(self.space, coeffs, self.nvars, self.order,
                        self.u_window if u_window is None else u_window,
                        self.homogeneous if homogeneous is None else homogeneous)

    def _check(self, other):
        if self.nvars != other.nvars:
            raise CapMismatch("series in different numbers of t-variables")

    @property
    def is_scalar(self):
        return self.space is None

    def __bool__(self):
        return bool(self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        return (isinstance(other, UTSeries) and self.space == other.space
                and self.coeffs == other.coeffs)

    def __repr__(self):
        return f"UTSeries({len(self.coeffs)} terms, N={self.order}, u in {self.u_window})"

    def items(self):
        return sorted(self.coeffs.items(), key=lambda kv: (kv[0][0], sum(kv[0][1]), kv[0][1]))

    def coeff(self, k, alpha):
        v = self.coeffs.get((k, tuple(alpha)))
        if v is None:
            return Fraction(0) if self.is_scalar else {}
        return v

    def u_powers(self):
        return sorted({k for k, _ in self.coeffs})

    def monomials(self):
        return sorted({a for _, a in self.coeffs}, key=lambda a: (sum(a), a))

    # linear structure
    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for key, v in other.coeffs.items():
            if key in out:
                out[key] = out[key] + v if self.is_scalar else vadd(out[key], v)
            else:
                out[key] = v
        lo = min(self.u_window[0], other.u_window[0])
        hi = min(self.u_window[1], other.u_window[1])
        return UTSeries(self.space, out, self.nvars, min(self.order, other.order), (lo, hi),
                        self.homogeneous and other.homogeneous)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        if self.is_scalar:
            return self._like({k: c * v for k, v in self.coeffs.items()})
        return self._like({k: vscale(v, c) for k, v in self.coeffs.items()})

    # products
    def __mul__(self, other):
        return series_multiply(self, other)

    def truncate(self, order=None, u_window=None):
        return UTSeries(self.space, self.coeffs, self.nvars,
                        self.order if order is None else order,
                        self.u_window if u_window is None else u_window, self.homogeneous)

    def u_shift(self, m):
        lo, hi = self.u_window
        return self._like({(k + m, a): v for (k, a), v in self.coeffs.items()}, (lo + m, hi + m))

    def u_negate(self):
        """Substitute u -> -u."""
        out = {}
        for (k, a), v in self.coeffs.items():
            s = -1 if k % 2 else 1
            out[(k, a)] = s * v if self.is_scalar else vscale(v, s)
        return self._like(out)

    def u_d_du(self):
        out = {}
        for (k, a), v in self.coeffs.items():
            if k:
                out[(k, a)] = k * v if self.is_scalar else vscale(v, k)
        return self._like(out)

    def t_derivative(self, i):
        out = {}
        for (k, a), v in self.coeffs.items():
            if a[i]:
                b = a[:i] + (a[i] - 1,) + a[i + 1:]
                out[(k, b)] = a[i] * v if self.is_scalar else vscale(v, a[i])
        # one order of t is lost
        return UTSeries(self.space, out, self.nvars, self.order - 1, self.u_window)

    def apply(self, op, space=None):
        """Apply a k-linear map (callable on vectors) coefficientwise."""
        out = {}
        for key, v in self.coeffs.items():
            w = op(v)
            if w:
                out[key] = w
        return UTSeries(self.space if space is None else space, out, self.nvars, self.order,
                        self.u_window)

    def at_t0(self):
        z = (0,) * self.nvars
        return {k: v for (k, a), v in self.coeffs.items() if a == z}

    def degree_check(self, vec_degree, t_degrees, u_degree=2):
        """Set of total degrees of the stored terms."""
        out = set()
        for (k, a), v in self.coeffs.items():
            base = Fraction(0) if self.is_scalar else vec_degree(v)
            out.add(base + u_degree * k + sum(x * d for x, d in zip(a, t_degrees)))
        return out


def series_multiply(a, b):
    """Product of a scalar series ``a`` with ``b`` (scalar or vector valued).

    The result keeps the t-order min(N_a, N_b) and the u-window on which every
    coefficient is fully determined by known coefficients of the factors.
    """
    if not a.is_scalar:
        if b.is_scalar:
            return series_multiply(b, a)
        raise CapMismatch("series_multiply needs at least one scalar factor")
    if a.nvars != b.nvars:
        raise CapMismatch("series in different numbers of t-variables")
    order = min(a.order, b.order)
    alo = min((k for k, _ in a.coeffs), default=a.u_window[0])
    blo = min((k for k, _ in b.coeffs), default=b.u_window[0])
    alo = max(alo, a.u_window[0])
    blo = max(blo, b.u_window[0])
    lo = alo + blo
    hi = min(a.u_window[1] + blo, b.u_window[1] + alo)
    out = {}
    for (k1, m1), x in a.coeffs.items():
        for (k2, m2), y in b.coeffs.items():
            if sum(m1) + sum(m2) > order:
                continue
            k = k1 + k2
            if k > hi:
                continue
            key = (k, mono_add(m1, m2))
            if b.is_scalar:
                out[key] = out.get(key, 0) + x * y
            else:
                viadd(out.setdefault(key, {}), y, x)
    return UTSeries(b.space, out, b.nvars, order, (lo, hi),
                    a.homogeneous and b.homogeneous)


# -- plain truncated power series in t (scalar coefficients) -----------------

class TPoly:
    """Truncated polynomial in t_1..t_l with Fraction coefficients."""

    __slots__ = ("c", "nvars", "order")

    def __init__(self, coeffs, nvars, order):
        self.nvars = nvars
        self.order = order
        self.c = {tuple(a): Fraction(x) for a, x in coeffs.items() if x and sum(a) <= order}

    @classmethod
    def const(cls, x, nvars, order):
        return cls({(0,) * nvars: x}, nvars, order)

    @classmethod
    def var(cls, i, nvars, order):
        return cls({unit_mono(nvars, i): 1}, nvars, order)

    def __add__(self, o):
        if not isinstance(o, TPoly):
            o = TPoly.const(o, self.nvars, self.order)
        out = dict(self.c)
        for a, x in o.c.items():
            out[a] = out.get(a, 0) + x
        return TPoly(out, self.nvars, min(self.order, o.order))

    __radd__ = __add__

    def __neg__(self):
        return TPoly({a: -x for a, x in self.c.items()}, self.nvars, self.order)

    def __sub__(self, o):
        return self + (-o if isinstance(o, TPoly) else -Fraction(o))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, TPoly):
            o = Fraction(o)
            return TPoly({a: o * x for a, x in self.c.items()}, self.nvars, self.order)
        order = min(self.order, o.order)
        out = {}
        for a, x in self.c.items():
            for b, y in o.c.items():
                if sum(a) + sum(b) <= order:
                    m = mono_add(a, b)
                    out[m] = out.get(m, 0) + x * y
        return TPoly(out, self.nvars, order)

    __rmul__ = __mul__

    def __eq__(self, o):
        if not isinstance(o, TPoly):
            o = TPoly.const(o, self.nvars, self.order)
        return self.c == o.c

    def __hash__(self):
        return hash(tuple(sorted(self.c.items())))

    def __bool__(self):
        return bool(self.c)

    def __repr__(self):
        if not self.c:
            return "0"
        return " + ".join(f"{x}*t^{a}" for a, x in sorted(self.c.items(), key=lambda kv: (sum(kv[0]), kv[0])))

    def pretty(self, var="t"):
        """Human-readable form such as ``1/2*t1^2*t2 - 1/24*t2^4``."""
        if not self.c:
            return "0"
        out = []
        for a, x in sorted(self.c.items(), key=lambda kv: (sum(kv[0]), tuple(-e for e in kv[0]))):
            factors = [f"{var}{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(a) if e]
            mag = abs(x)
            if factors and mag == 1:
                term = "*".join(factors)
            else:
                term = "*".join([str(mag)] + factors)
            out.append(("- " if x < 0 else "+ ") + term)
        text = " ".join(out)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def const_term(self):
        return self.c.get((0,) * self.nvars, Fraction(0))

    def derivative(self, i):
        out = {}
        for a, x in self.c.items():
            if a[i]:
                out[a[:i] + (a[i] - 1,) + a[i + 1:]] = a[i] * x
        return TPoly(out, self.nvars, self.order - 1)

    def truncate(self, order):
        return TPoly(self.c, self.nvars, order)

    def inverse(self):
        """1/self for an invertible constant term."""
        c0 = self.const_term()
        if not c0:
            raise ZeroDivisionError("constant term vanishes")
        rest = (self - c0) * (Fraction(1) / c0)
        out = TPoly.const(1, self.nvars, self.order)
        power = TPoly.const(1, self.nvars, self.order)
        for _ in range(self.order):
            power = power * (-rest)
            out = out + power
        return out * (Fraction(1) / c0)

    def subs(self, values):
        """Substitute t_i -> values[i] (TPolys in possibly other variables)."""
        if not values:
            return self
        nv, order = values[0].nvars, values[0].order
        out = TPoly({}, nv, order)
        cache = {}
        for a, x in sorted(self.c.items()):
            term = TPoly.const(x, nv, order)
            for i, e in enumerate(a):
                if e:
                    key = (i, e)
                    if key not in cache:
                        p = TPoly.const(1, nv, order)
                        for _ in range(e):
                            p = p * values[i]
                        cache[key] = p
                    term = term * cache[key]
            out = out + term
        return out

    def valuation(self):
        return min((sum(a) for a in self.c), default=None)
