"""Truncated power series over pluggable scalar rings.

A UniSeries is dense with an explicit precision: the series is known mod
t^prec and operations never fabricate coefficients beyond what the inputs
guarantee (product precision is min(pa + val(b), pb + val(a)), composition
and reversion follow the same bookkeeping).

MPoly is a small dict-based multivariate polynomial / truncated-series type
used for scalar rings other than F4 and for symbolic checks; the heavy F4
multivariate work lives in m4.py.
"""

from __future__ import annotations

from itertools import product as iproduct

import numpy as np

from . import gf4
from .witt import Z2Int, PrecisionError


class NotDivisibleError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# scalar rings


class GF4Ring:
    """F4 with int-encoded elements (see gf4)."""

    char2 = True
    name = "F4"
    zero = 0
    one = 1

    def add(self, a, b):
        return a ^ b

    def neg(self, a):
        return a

    def mul(self, a, b):
        return int(gf4.MUL[a, b])

    def sq(self, a):
        return int(gf4.FROB[a])

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a != 0

    def inv(self, a):
        return gf4.ginv(a)

    def from_int(self, k):
        return k & 1

    def eq(self, a, b):
        return a == b

    def show(self, a):
        return gf4.show(a)

    def series_mul(self, ca, cb, out_len):
        a = np.asarray(ca, dtype=np.int64)
        b = np.asarray(cb, dtype=np.int64)
        a0, a1 = a & 1, a >> 1
        b0, b1 = b & 1, b >> 1
        c00 = np.convolve(a0, b0)
        c11 = np.convolve(a1, b1)
        c01 = np.convolve(a0, b1)
        c10 = np.convolve(a1, b0)
        r0 = (c00 + c11) & 1
        r1 = (c01 + c10 + c11) & 1
        out = (r0 | (r1 << 1))[:out_len]
        if out.shape[0] < out_len:
            out = np.concatenate([out, np.zeros(out_len - out.shape[0], np.int64)])
        return [int(v) for v in out]


class Z2Ring:
    """Z/2^n with int-encoded residues."""

    char2 = False

    def __init__(self, nbits):
        self.nbits = nbits
        self.mod = 1 << nbits
        self.name = f"Z/2^{nbits}"
        self.zero = 0
        self.one = 1

    def add(self, a, b):
        return (a + b) % self.mod

    def neg(self, a):
        return (-a) % self.mod

    def mul(self, a, b):
        return (a * b) % self.mod

    def sq(self, a):
        return (a * a) % self.mod

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a & 1 == 1

    def inv(self, a):
        if not self.is_unit(a):
            raise ZeroDivisionError(f"non-unit {a} in {self.name}")
        return pow(a, -1, self.mod)

    def from_int(self, k):
        return k % self.mod

    def eq(self, a, b):
        return a == b

    def show(self, a):
        return str(a)

    def series_mul(self, ca, cb, out_len):
        if self.nbits <= 24:
            a = np.asarray(ca, dtype=np.int64)
            b = np.asarray(cb, dtype=np.int64)
            c = np.convolve(a, b) % self.mod
            out = c[:out_len]
            if out.shape[0] < out_len:
                out = np.concatenate([out, np.zeros(out_len - out.shape[0], np.int64)])
            return [int(v) for v in out]
        return _schoolbook_mul(self, ca, cb, out_len)


class IntRing:
    """Exact integers; used by tests that want characteristic-zero oracles."""

    char2 = False
    name = "Z"
    zero = 0
    one = 1

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def sq(self, a):
        return a * a

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a in (1, -1)

    def inv(self, a):
        if a not in (1, -1):
            raise ZeroDivisionError(f"non-unit {a} in Z")
        return a

    def from_int(self, k):
        return k

    def eq(self, a, b):
        return a == b

    def show(self, a):
        return str(a)

    def series_mul(self, ca, cb, out_len):
        return _schoolbook_mul(self, ca, cb, out_len)


class BPolyRing:
    """Polynomials over F4 in variables b_1..b_nvars, dict-coded.

    Elements map exponent tuples to nonzero F4 values; used as the scalar
    ring of generating series like 1 + sum b_i z^i.
    """

    char2 = True

    def __init__(self, nvars, names=None):
        self.nvars = nvars
        self.names = names or tuple(f"b{i+1}" for i in range(nvars))
        self.name = "F4[" + ",".join(self.names) + "]"
        self.zero = {}
        self.one = {(0,) * nvars: 1}

    def gen(self, i, coeff=1):
        e = [0] * self.nvars
        e[i] = 1
        return {tuple(e): coeff}

    def const(self, c):
        return {(0,) * self.nvars: c} if c else {}

    def add(self, a, b):
        out = dict(a)
        for e, c in b.items():
            v = out.get(e, 0) ^ c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return out

    def neg(self, a):
        return a

    def mul(self, a, b):
        out = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                v = out.get(e, 0) ^ int(gf4.MUL[c1, c2])
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return out

    def sq(self, a):
        return {tuple(2 * x for x in e): int(gf4.FROB[c]) for e, c in a.items()}

    def is_zero(self, a):
        return not a

    def is_unit(self, a):
        return len(a) == 1 and next(iter(a)) == (0,) * self.nvars

    def inv(self, a):
        if not self.is_unit(a):
            raise ZeroDivisionError("non-constant polynomial inverse")
        return {next(iter(a)): gf4.ginv(next(iter(a.values())))}

    def from_int(self, k):
        return self.const(k & 1)

    def eq(self, a, b):
        return a == b

    def show(self, a):
        if not a:
            return "0"
        bits = []
        for e in sorted(a, key=lambda e: (sum(e), e)):
            c = a[e]
            vars_ = "*".join(
                (self.names[i] if x == 1 else f"{self.names[i]}^{x}")
                for i, x in enumerate(e)
                if x
            )
            if not vars_:
                bits.append(gf4.show(c))
            elif c == 1:
                bits.append(vars_)
            else:
                bits.append(f"{gf4.show(c)}*{vars_}")
        return " + ".join(bits)

    def series_mul(self, ca, cb, out_len):
        return _schoolbook_mul(self, ca, cb, out_len)


def _schoolbook_mul(ring, ca, cb, out_len):
    out = [ring.zero] * out_len
    for i, a in enumerate(ca):
        if ring.is_zero(a) or i >= out_len:
            continue
        for j, b in enumerate(cb):
            if i + j >= out_len:
                break
            if not ring.is_zero(b):
                out[i + j] = ring.add(out[i + j], ring.mul(a, b))
    return out


F4 = GF4Ring()


# ---------------------------------------------------------------------------
# univariate truncated series


class UniSeries:
    __slots__ = ("ring", "c", "prec")

    def __init__(self, ring, coeffs, prec):
        if prec < 1:
            raise PrecisionError("series precision must be >= 1")
        c = list(coeffs)[:prec]
        c.extend([ring.zero] * (prec - len(c)))
        self.ring = ring
        self.c = c
        self.prec = prec

    # -- constructors

    @staticmethod
    def zero(ring, prec):
        return UniSeries(ring, [], prec)

    @staticmethod
    def const(ring, value, prec):
        return UniSeries(ring, [value], prec)

    @staticmethod
    def one(ring, prec):
        return UniSeries(ring, [ring.one], prec)

    @staticmethod
    def x(ring, prec, coeff=None):
        c = [ring.zero, coeff if coeff is not None else ring.one]
        return UniSeries(ring, c, prec)

    @staticmethod
    def monomial(ring, k, coeff, prec):
        c = [ring.zero] * k + [coeff]
        return UniSeries(ring, c, prec)

    # -- basics

    def coeff(self, i):
        if i >= self.prec:
            raise PrecisionError(f"coefficient {i} beyond precision {self.prec}")
        return self.c[i]

    def val(self):
        """Order of vanishing; equals prec for the (truncated) zero series."""
        for i, a in enumerate(self.c):
            if not self.ring.is_zero(a):
                return i
        return self.prec

    def truncate(self, prec):
        return UniSeries(self.ring, self.c[:prec], min(prec, self.prec))

    def _match(self, other):
        if self.ring is not other.ring:
            raise ValueError("scalar ring mismatch")

    def __add__(self, other):
        self._match(other)
        p = min(self.prec, other.prec)
        r = self.ring
        return UniSeries(r, [r.add(a, b) for a, b in zip(self.c[:p], other.c[:p])], p)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        r = self.ring
        return UniSeries(r, [r.neg(a) for a in self.c], self.prec)

    def __mul__(self, other):
        self._match(other)
        p = min(self.prec + other.val(), other.prec + self.val())
        p = max(1, min(p, self.prec + other.prec))
        return UniSeries(self.ring, self.ring.series_mul(self.c, other.c, p), p)

    def scale(self, k):
        r = self.ring
        return UniSeries(r, [r.mul(k, a) for a in self.c], self.prec)

    def shift(self, k):
        """Multiply by t^k (k >= 0) or divide exactly by t^-k."""
        if k >= 0:
            return UniSeries(self.ring, [self.ring.zero] * k + self.c, self.prec + k)
        k = -k
        if any(not self.ring.is_zero(a) for a in self.c[:k]):
            raise NotDivisibleError(f"series not divisible by t^{k}")
        return UniSeries(self.ring, self.c[k:], self.prec - k)

    def eq_mod(self, other, k):
        self._match(other)
        if k > min(self.prec, other.prec):
            raise PrecisionError("comparison beyond known precision")
        return all(self.ring.eq(a, b) for a, b in zip(self.c[:k], other.c[:k]))

    def __eq__(self, other):
        if not isinstance(other, UniSeries):
            return NotImplemented
        return (
            self.ring is other.ring
            and self.prec == other.prec
            and all(self.ring.eq(a, b) for a, b in zip(self.c, other.c))
        )

    def is_zero(self):
        return all(self.ring.is_zero(a) for a in self.c)

    # -- the interesting operations

    def square(self):
        if self.ring.char2:
            r = self.ring
            out = [r.zero] * self.prec  # prec: see __mul__ with equal factors
            p = min(2 * self.prec - self.val(), 2 * self.prec)
            out = [r.zero] * p
            for i, a in enumerate(self.c):
                if 2 * i >= p:
                    break
                out[2 * i] = r.sq(a)
            return UniSeries(r, out, p)
        return self * self

    def inverse(self):
        """Newton inverse of a unit series, to the same precision."""
        r = self.ring
        c0 = self.c[0]
        if not r.is_unit(c0):
            raise NotDivisibleError("constant term is not a unit")
        v = UniSeries(r, [r.inv(c0)], 1)
        two = UniSeries.const(r, r.from_int(2), self.prec)
        known = 1
        while known < self.prec:
            known = min(2 * known, self.prec)
            v = UniSeries(r, v.c, known)
            a = self.truncate(known)
            v = v * (two.truncate(known) - a * v)
            v = UniSeries(r, v.c, known)
        return v

    def exact_div(self, other):
        """Quotient q with self = q * other, verified; precision-aware."""
        self._match(other)
        v = other.val()
        if v >= other.prec:
            raise NotDivisibleError("division by (truncated) zero")
        num = self.shift(-v) if v else self
        den = other.shift(-v) if v else other
        q = num * den.inverse()
        check = q * den
        p = min(check.prec, num.prec)
        if not check.eq_mod(num, p):
            raise NotDivisibleError("division left a remainder")
        return q

    def compose(self, inner):
        """self(inner(t)); inner must have zero constant term."""
        self._match(inner)
        if not self.ring.is_zero(inner.c[0]):
            raise ValueError("inner series must have zero constant term")
        vi = max(inner.val(), 1)
        p = min(self.prec * vi, inner.prec)
        r = self.ring
        inner_t = inner.truncate(p)
        out = UniSeries.const(r, self.c[-1], p)
        for k in range(self.prec - 2, -1, -1):
            out = out * inner_t + UniSeries.const(r, self.c[k], p)
        return UniSeries(r, out.c, p)

    def derivative(self):
        r = self.ring
        out = [r.mul(r.from_int(i), self.c[i]) for i in range(1, self.prec)]
        return UniSeries(r, out, max(self.prec - 1, 1))

    def reversion(self):
        """g with self(g) = g(self) = t, by Newton iteration."""
        r = self.ring
        if not r.is_zero(self.c[0]):
            raise ValueError("reversion needs zero constant term")
        if not r.is_unit(self.c[1]):
            raise NotDivisibleError("reversion needs a unit linear coefficient")
        t = UniSeries.x(r, self.prec)
        g = UniSeries(r, [r.zero, r.inv(self.c[1])], 2)
        known = 2
        while known < self.prec:
            known = min(2 * known, self.prec)
            g = UniSeries(r, g.c, known)
            fg = self.truncate(known).compose(g)
            dfg = self.derivative().truncate(known).compose(g)
            g = g - (fg - t.truncate(known)) * dfg.inverse()
            g = UniSeries(r, g.c, known)
        return g

    def two_adic_power(self, e: Z2Int):
        """u^e for a 1-unit u over a characteristic-2 ring and e in Z2.

        Computed as prod_i (u^(2^i))^eps_i over the binary digits of e;
        only digits with 2^i < prec contribute since u^(2^i) = 1 + O(t^(2^i)).
        Negative exponents need no special casing: they are 2-adic integers
        with infinitely many one-digits, almost all of which act trivially.
        """
        if not self.ring.char2:
            raise ValueError("2-adic powers need a characteristic-2 ring")
        if not self.ring.eq(self.c[0], self.ring.one):
            raise ValueError("2-adic powers need constant term 1")
        bits_needed = max(1, (self.prec - 1).bit_length())
        if e.n < bits_needed:
            raise PrecisionError(
                f"exponent known to {e.n} bits, need {bits_needed} at precision {self.prec}"
            )
        out = UniSeries.one(self.ring, self.prec)
        sq = self
        for i in range(bits_needed):
            if e.bit(i):
                out = out * sq
            sq = sq.square().truncate(self.prec)
        return UniSeries(self.ring, out.c, self.prec)

    def show(self, var="t"):
        r = self.ring
        bits = []
        for i, a in enumerate(self.c):
            if r.is_zero(a):
                continue
            s = r.show(a)
            if i == 0:
                bits.append(s)
            else:
                pw = var if i == 1 else f"{var}^{i}"
                bits.append(pw if s == "1" else f"{s}*{pw}")
        body = " + ".join(bits) if bits else "0"
        return f"{body} + O({var}^{self.prec})"

    def __repr__(self):
        return f"UniSeries({self.show()})"


# ---------------------------------------------------------------------------
# generic multivariate polynomials / truncated series (dict based)


class MPoly:
    """Multivariate polynomial over ring, optionally truncated at total degree.

    bound=None means no truncation (honest polynomials); otherwise terms of
    total degree > bound are dropped by every operation.
    """

    __slots__ = ("ring", "nvars", "bound", "terms")

    def __init__(self, ring, nvars, terms=None, bound=None):
        self.ring = ring
        self.nvars = nvars
        self.bound = bound
        t = {}
        for e, c in (terms or {}).items():
            if ring.is_zero(c):
                continue
            if bound is not None and sum(e) > bound:
                continue
            t[tuple(e)] = c
        self.terms = t

    def _zero_exp(self):
        return (0,) * self.nvars

    @staticmethod
    def const(ring, nvars, c, bound=None):
        return MPoly(ring, nvars, {(0,) * nvars: c}, bound)

    @staticmethod
    def var(ring, nvars, i, bound=None, coeff=None):
        e = [0] * nvars
        e[i] = 1
        return MPoly(ring, nvars, {tuple(e): coeff if coeff is not None else ring.one}, bound)

    def _match(self, other):
        if self.ring is not other.ring or self.nvars != other.nvars:
            raise ValueError("polynomial ring mismatch")
        if self.bound != other.bound:
            raise ValueError("degree bound mismatch")

    def __add__(self, other):
        self._match(other)
        out = dict(self.terms)
        r = self.ring
        for e, c in other.terms.items():
            v = r.add(out.get(e, r.zero), c)
            if r.is_zero(v):
                out.pop(e, None)
            else:
                out[e] = v
        return MPoly(r, self.nvars, out, self.bound)

    def __neg__(self):
        r = self.ring
        return MPoly(r, self.nvars, {e: r.neg(c) for e, c in self.terms.items()}, self.bound)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._match(other)
        r = self.ring
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if self.bound is not None and sum(e) > self.bound:
                    continue
                v = r.add(out.get(e, r.zero), r.mul(c1, c2))
                if r.is_zero(v):
                    out.pop(e, None)
                else:
                    out[e] = v
        return MPoly(r, self.nvars, out, self.bound)

    def scale(self, k):
        r = self.ring
        return MPoly(r, self.nvars, {e: r.mul(k, c) for e, c in self.terms.items()}, self.bound)

    def __eq__(self, other):
        if not isinstance(other, MPoly):
            return NotImplemented
        return (
            self.ring is other.ring
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def is_zero(self):
        return not self.terms

    def pow(self, n):
        out = MPoly.const(self.ring, self.nvars, self.ring.one, self.bound)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def coeff(self, e):
        return self.terms.get(tuple(e), self.ring.zero)

    def total_degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def subs(self, images):
        """Substitute images[i] (an MPoly) for variable i."""
        r = self.ring
        out = MPoly(r, images[0].nvars, {}, images[0].bound)
        cache = {}

        def power(i, n):
            if (i, n) not in cache:
                cache[(i, n)] = images[i].pow(n)
            return cache[(i, n)]

        for e, c in self.terms.items():
            term = MPoly.const(r, out.nvars, c, out.bound)
            for i, n in enumerate(e):
                if n:
                    term = term * power(i, n)
            out = out + term
        return out

    def inverse(self, bound=None):
        """Inverse of a unit, as a series truncated at the carried bound."""
        b = bound if bound is not None else self.bound
        if b is None:
            raise ValueError("inverse needs a truncation bound")
        r = self.ring
        c0 = self.terms.get(self._zero_exp(), r.zero)
        if not r.is_unit(c0):
            raise NotDivisibleError("constant term is not a unit")
        a = MPoly(r, self.nvars, self.terms, b)
        v = MPoly.const(r, self.nvars, r.inv(c0), b)
        two = MPoly.const(r, self.nvars, r.from_int(2), b)
        steps = max(1, b.bit_length() + 1)
        for _ in range(steps):
            v = v * (two - a * v)
        return v

    def show(self, names=None):
        names = names or tuple(f"x{i+1}" for i in range(self.nvars))
        r = self.ring
        if not self.terms:
            return "0"
        bits = []
        for e in sorted(self.terms, key=lambda e: (sum(e), tuple(-x for x in e))):
            c = self.terms[e]
            vs = "*".join(
                names[i] if n == 1 else f"{names[i]}^{n}" for i, n in enumerate(e) if n
            )
            cs = r.show(c)
            if not vs:
                bits.append(cs)
            elif cs == "1":
                bits.append(vs)
            else:
                bits.append(f"{cs}*{vs}")
        return " + ".join(bits)

    def __repr__(self):
        return f"MPoly({self.show()})"


def mpoly_divided_difference(coeffs, ring, nvars, i, j, bound):
    """sum_n c_n * (x_i^n - x_j^n)/(x_i - x_j) as an honest polynomial."""
    out = {}
    for n, c in enumerate(coeffs):
        if ring.is_zero(c):
            continue
        for a in range(n):
            b = n - 1 - a
            e = [0] * nvars
            e[i], e[j] = a, b
            e = tuple(e)
            if bound is not None and a + b > bound:
                continue
            v = ring.add(out.get(e, ring.zero), c)
            if ring.is_zero(v):
                out.pop(e, None)
            else:
                out[e] = v
    return MPoly(ring, nvars, out, bound)
