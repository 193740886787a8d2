"""Formal group law of a Weierstrass curve in the coordinate t = -x/y.

The curve w-equation is w = t^3 + a1 t w + a2 t^2 w + a3 w^2 + a4 t w^2
+ a6 w^3 (w = -1/y, t = -x/y, so x = t/w and y = -1/w).  The group law is
built from the chord construction: the line through (t1, w1), (t2, w2) has
slope a bivariate divided difference of w, the third intersection point
comes from Vieta, and F(t1, t2) is the elliptic inverse of its t-coordinate.
All Laurent-type quantities are kept as quotients with unit denominators;
there is no Laurent series type.

For F4 coefficients the bivariate arithmetic packs F2 planes into big
integers (Kronecker substitution), which keeps the degree-128 default fast;
other scalar rings use the generic dict polynomials and are meant for small
degrees.
"""

from __future__ import annotations

import numpy as np

from . import gf4
from .series import F4, MPoly, NotDivisibleError, UniSeries, mpoly_divided_difference
from .witt import PrecisionError


class CurveError(ValueError):
    pass


class WeierstrassCurve:
    __slots__ = ("ring", "a1", "a2", "a3", "a4", "a6")

    def __init__(self, ring, a1, a2, a3, a4, a6):
        self.ring = ring
        self.a1, self.a2, self.a3, self.a4, self.a6 = a1, a2, a3, a4, a6

    @staticmethod
    def c0():
        """y^2 + y = x^3 over F4, the supersingular curve everything runs on."""
        return WeierstrassCurve(F4, 0, 0, 1, 0, 0)

    def coeffs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def equation(self) -> MPoly:
        """y^2 + a1 xy + a3 y - x^3 - a2 x^2 - a4 x - a6 in ring[x, y]."""
        r = self.ring
        return MPoly(
            r,
            2,
            {
                (0, 2): r.one,
                (1, 1): self.a1,
                (0, 1): self.a3,
                (3, 0): r.neg(r.one),
                (2, 0): r.neg(self.a2),
                (1, 0): r.neg(self.a4),
                (0, 0): r.neg(self.a6),
            },
        )


def w_series(curve: WeierstrassCurve, prec: int) -> UniSeries:
    """Solve w = t^3 + a1 t w + a2 t^2 w + a3 w^2 + a4 t w^2 + a6 w^3."""
    r = curve.ring
    a1, a2, a3, a4, a6 = curve.coeffs()
    t = UniSeries.x(r, prec)
    t3 = UniSeries.monomial(r, 3, r.one, prec)

    def rhs(w):
        w2 = w.square().truncate(prec)
        parts = [t3]
        if not r.is_zero(a1):
            parts.append((t * w).scale(a1).truncate(prec))
        if not r.is_zero(a2):
            parts.append((t * t * w).scale(a2).truncate(prec))
        if not r.is_zero(a3):
            parts.append(w2.scale(a3))
        if not r.is_zero(a4):
            parts.append((t * w2).scale(a4).truncate(prec))
        if not r.is_zero(a6):
            parts.append((w2 * w).scale(a6).truncate(prec))
        out = parts[0]
        for p in parts[1:]:
            out = out + p
        return UniSeries(r, out.c, prec)

    w = UniSeries(r, t3.c, prec)
    # fixed point iteration; each pass gains at least one t-adic digit
    gained = 4
    while gained < prec + 1:
        w_new = rhs(w)
        if w_new.c == w.c:
            break
        w = w_new
        gained += 1
    if rhs(w).c != w.c:
        raise CurveError("w-recursion failed to converge")
    return w


def iota_from_w(curve, w: UniSeries) -> UniSeries:
    """The [-1]-series t / (-1 + a1 t + a3 w(t))."""
    r = curve.ring
    prec = w.prec
    den = UniSeries.const(r, r.neg(r.one), prec)
    den = den + UniSeries.x(r, prec, curve.a1) + w.scale(curve.a3)
    return UniSeries.x(r, prec) * den.inverse()


# ---------------------------------------------------------------------------
# bivariate F4 arithmetic via Kronecker-packed big integers


class _Biv4:
    """Dense (N+1)x(N+1) uint8 cubes over F4, truncated at total degree N."""

    def __init__(self, N):
        self.N = N
        self.S = 2 * N + 1
        i, j = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
        self.keep = (i + j) <= N
        self.pos = (i + self.S * j).astype(np.int64)
        self.L = int(self.pos.max()) + 1

    def _conv(self, pa: int, pb: int, nbytes: int) -> np.ndarray:
        c = pa * pb
        buf = c.to_bytes(max(nbytes, (c.bit_length() + 7) // 8 + 4), "little")
        return np.frombuffer(buf[:nbytes], dtype="<u4").astype(np.int64)

    def _pack(self, plane: np.ndarray) -> int:
        flat = np.zeros(self.L, dtype="<u4")
        flat[self.pos] = plane
        return int.from_bytes(flat.tobytes(), "little")

    def mul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        a0, a1 = (A & 1), (A >> 1)
        b0, b1 = (B & 1), (B >> 1)
        pa0, pa1, pb0, pb1 = (self._pack(p) for p in (a0, a1, b0, b1))
        nbytes = 4 * (2 * self.L)
        c00 = self._conv(pa0, pb0, nbytes)
        c11 = self._conv(pa1, pb1, nbytes)
        c01 = self._conv(pa0, pb1, nbytes)
        c10 = self._conv(pa1, pb0, nbytes)
        r0 = (c00[self.pos] + c11[self.pos]) & 1
        r1 = (c01[self.pos] + c10[self.pos] + c11[self.pos]) & 1
        out = (r0 | (r1 << 1)).astype(np.uint8)
        out[~self.keep] = 0
        return out

    def square(self, A: np.ndarray) -> np.ndarray:
        out = np.zeros_like(A)
        half = self.N // 2 + 1
        out[: 2 * half : 2, : 2 * half : 2] = gf4.FROB[A[:half, :half]]
        out[~self.keep] = 0
        return out

    def one(self):
        out = np.zeros((self.N + 1, self.N + 1), dtype=np.uint8)
        out[0, 0] = 1
        return out

    def inverse(self, A: np.ndarray) -> np.ndarray:
        c0 = int(A[0, 0])
        if c0 == 0:
            raise NotDivisibleError("constant term is not a unit")
        v = np.zeros_like(A)
        v[0, 0] = gf4.INV[c0]
        known = 1
        while known <= self.N:
            v = self.mul(A, self.square(v))
            known *= 2
        return v

    def pow(self, A: np.ndarray, n: int, cache: dict) -> np.ndarray:
        if n in cache:
            return cache[n]
        if n == 0:
            out = self.one()
        elif n == 1:
            out = A.copy()
        elif n % 2 == 0:
            out = self.square(self.pow(A, n // 2, cache))
        else:
            out = self.mul(self.pow(A, n - 1, cache), A)
        cache[n] = out
        return out


# ---------------------------------------------------------------------------
# the formal group law object


class FormalGroup:
    """F(t1, t2), iota, and [m]-series of a Weierstrass curve, to degree N."""

    def __init__(self, curve: WeierstrassCurve, N: int = 128):
        if N < 4:
            raise ValueError("need degree bound >= 4")
        self.curve = curve
        self.ring = curve.ring
        self.N = N
        # the chord slope is a divided difference of w, which needs one more
        # coefficient of w than the degree bound
        self.w = w_series(curve, N + 2)
        self.iota = iota_from_w(curve, self.w).truncate(N + 1)
        self._msers = {}
        if isinstance(self.ring, type(F4)) or self.ring is F4:
            self._build_gf4()
        else:
            self._build_generic()
        self._verify()

    # -- construction

    def _build_gf4(self):
        N = self.N
        bv = _Biv4(N)
        self._bv = bv
        r = self.ring
        a1, a2, a3, a4, a6 = self.curve.coeffs()
        # slope of the chord: the divided difference of w lives on antidiagonals
        lam = np.zeros((N + 1, N + 1), dtype=np.uint8)
        for n in range(3, N + 2):
            c = self.w.c[n]
            if not c:
                continue
            for i in range(0, n):
                j = n - 1 - i
                if i <= N and j <= N:
                    lam[i, j] ^= c
        w1 = np.zeros_like(lam)
        for n in range(3, N + 1):
            if self.w.c[n]:
                w1[n, 0] = self.w.c[n]
        t1 = np.zeros_like(lam)
        t1[1, 0] = 1
        t2 = np.zeros_like(lam)
        t2[0, 1] = 1

        def smul(mat, c):
            return gf4.MUL[c][mat]

        lam2 = bv.square(lam)
        nu = w1 ^ self._bv_shift(smul(lam, 1), 1, 0)  # w1 - lam*t1 (char 2)
        A3 = bv.one()
        if a2:
            A3 ^= smul(lam, a2)
        if a4:
            A3 ^= smul(lam2, a4)
        if a6:
            A3 ^= smul(bv.mul(lam2, lam), a6)
        A2 = np.zeros_like(lam)
        if a1:
            A2 ^= smul(lam, a1)
        if a2:
            A2 ^= smul(nu, a2)
        if a3:
            A2 ^= smul(lam2, a3)
        # char-2 ring: 2*a4*lam*nu = 0 and 3*a6*lam^2*nu = a6*lam^2*nu
        if a6:
            A2 ^= smul(bv.mul(lam2, nu), a6)
        t3 = bv.mul(A2, bv.inverse(A3)) ^ t1 ^ t2  # -A2/A3 - t1 - t2, char 2
        # F = iota(t3) = t3 / (-1 + a1 t3 + a3 w(t3))
        cache = {}
        den = bv.one()
        if a1:
            den ^= smul(t3, a1)
        if a3:
            wt3 = np.zeros_like(lam)
            for n in range(3, N + 1):
                if self.w.c[n]:
                    wt3 ^= smul(bv.pow(t3, n, cache), self.w.c[n])
            den ^= smul(wt3, a3)
        self.F = bv.mul(t3, bv.inverse(den))
        self._Fpoly = None

    @staticmethod
    def _bv_shift(mat, di, dj):
        out = np.zeros_like(mat)
        view = mat[: mat.shape[0] - di, : mat.shape[1] - dj]
        out[di:, dj:] = view
        return out

    def _build_generic(self):
        N = self.N
        r = self.ring
        a1, a2, a3, a4, a6 = self.curve.coeffs()
        lam = mpoly_divided_difference(self.w.c, r, 2, 0, 1, N)
        t1 = MPoly.var(r, 2, 0, bound=N)
        t2 = MPoly.var(r, 2, 1, bound=N)
        w1 = MPoly(r, 2, {(n, 0): c for n, c in enumerate(self.w.c) if not r.is_zero(c)}, N)
        nu = w1 - lam * t1
        lam2 = lam * lam
        one = MPoly.const(r, 2, r.one, N)
        A3 = one + lam.scale(a2) + lam2.scale(a4) + (lam2 * lam).scale(a6)
        two = r.from_int(2)
        three = r.from_int(3)
        A2 = (
            lam.scale(a1)
            + nu.scale(a2)
            + lam2.scale(a3)
            + (lam * nu).scale(r.mul(two, a4))
            + (lam2 * nu).scale(r.mul(three, a6))
        )
        t3 = -(A2 * A3.inverse()) - t1 - t2
        powers = {0: one, 1: t3}

        def tp(n):
            if n not in powers:
                powers[n] = tp(n // 2) * tp(n - n // 2)
            return powers[n]

        wt3 = MPoly(r, 2, {}, N)
        for n, c in enumerate(self.w.c):
            if n > N:
                break
            if not r.is_zero(c):
                wt3 = wt3 + tp(n).scale(c)
        den = -one + t3.scale(a1) + wt3.scale(a3)
        self._Fpoly = t3 * den.inverse()
        self.F = None

    # -- coefficient access

    def f_coeff(self, a, b):
        if self.F is not None:
            return int(self.F[a, b]) if a <= self.N and b <= self.N else 0
        return self._Fpoly.coeff((a, b))

    def f_table(self, D):
        """Coefficient dict of F to total degree <= D."""
        out = {}
        if self.F is not None:
            nz = np.argwhere(self.F)
            for a, b in nz:
                if a + b <= D:
                    out[(int(a), int(b))] = int(self.F[a, b])
        else:
            for e, c in self._Fpoly.terms.items():
                if sum(e) <= D:
                    out[e] = c
        return out

    # -- verification at construction time

    def _verify(self):
        r = self.ring
        # w = t^3 * unit
        if any(not r.is_zero(c) for c in self.w.c[:3]) or not r.is_unit(self.w.c[3]):
            raise CurveError("w-series is not t^3 * unit")
        # F(t, 0) = t
        for a in range(self.N + 1):
            want = r.one if a == 1 else r.zero
            if not r.eq(self.f_coeff(a, 0), want):
                raise CurveError("F(t, 0) != t")
        # symmetry
        if self.F is not None:
            if not np.array_equal(self.F, self.F.T):
                raise CurveError("F is not symmetric")
        else:
            for (a, b), c in self._Fpoly.terms.items():
                if not r.eq(c, self._Fpoly.coeff((b, a))):
                    raise CurveError("F is not symmetric")
        # F(t, iota(t)) = 0
        t = UniSeries.x(r, self.N + 1)
        if not self.eval_f(t, self.iota).is_zero():
            raise CurveError("iota is not the inverse series")

    # -- evaluation

    def eval_f(self, s1: UniSeries, s2: UniSeries) -> UniSeries:
        """F(s1, s2) for series with zero constant term."""
        r = self.ring
        if not r.is_zero(s1.c[0]) or not r.is_zero(s2.c[0]):
            raise ValueError("F-arguments must have zero constant term")
        prec = min(s1.prec, s2.prec, self.N + 1)
        if self.F is not None:
            return self._eval_f_gf4(s1, s2, prec)
        out = s1.truncate(prec) + s2.truncate(prec)
        v1 = max(s1.val(), 1)
        v2 = max(s2.val(), 1)
        rows = {}
        for (a, b), c in self.f_table(prec - 1).items():
            if a >= 1 and b >= 1 and a * v1 + b * v2 < prec:
                rows.setdefault(a, []).append((b, c))
        if not rows:
            return out
        p2 = {0: UniSeries.one(r, prec), 1: s2.truncate(prec)}

        def pw2(n):
            if n not in p2:
                if n % 2 == 0 and r.char2:
                    p2[n] = pw2(n // 2).square().truncate(prec)
                else:
                    p2[n] = (pw2(n - 1) * s2).truncate(prec)
            return p2[n]

        p1 = {1: s1.truncate(prec)}

        def pw1(n):
            if n not in p1:
                if n % 2 == 0 and r.char2:
                    p1[n] = pw1(n // 2).square().truncate(prec)
                else:
                    p1[n] = (pw1(n - 1) * s1).truncate(prec)
            return p1[n]

        for a in sorted(rows):
            g = UniSeries.zero(r, prec)
            for b, c in rows[a]:
                g = g + pw2(b).scale(c)
            out = out + (pw1(a) * g).truncate(prec)
        return UniSeries(r, out.c, prec)

    def _eval_f_gf4(self, s1: UniSeries, s2: UniSeries, prec: int) -> UniSeries:
        v1 = max(s1.val(), 1)
        v2 = max(s2.val(), 1)
        amax = min((prec - 1 - v2) // v1 if prec - 1 >= v1 + v2 else 0, self.N)
        bmax = min((prec - 1 - v1) // v2 if prec - 1 >= v1 + v2 else 0, self.N)
        out = np.array((s1.truncate(prec) + s2.truncate(prec)).c, dtype=np.uint8)
        if amax >= 1 and bmax >= 1:
            p1 = _np_pow_list(np.array(s1.c[:prec], np.uint8), amax, prec)
            p2 = _np_pow_list(np.array(s2.c[:prec], np.uint8), bmax, prec)
            from .gflinalg import mmul

            rows = mmul(self.F[1 : amax + 1, 1 : bmax + 1], p2[1:])
            for a in range(1, amax + 1):
                if rows[a - 1].any():
                    out ^= _np_conv4(p1[a], rows[a - 1], prec)
        return UniSeries(F4, [int(v) for v in out], prec)


    def f_sum(self, summands) -> UniSeries:
        """Left fold of F over a list of series with zero constant term."""
        if not summands:
            raise ValueError("empty F-sum")
        out = summands[0]
        for s in summands[1:]:
            out = self.eval_f(out, s)
        return out

    # -- multiplication series

    def m_series(self, m: int) -> UniSeries:
        if m in self._msers:
            return self._msers[m]
        r = self.ring
        t = UniSeries.x(r, self.N + 1)
        if m == 0:
            out = UniSeries.zero(r, self.N + 1)
        elif m == 1:
            out = t
        elif m == -1:
            out = self.iota
        elif m < 0:
            out = self.iota.compose(self.m_series(-m))
        elif m == 2:
            out = self._two_series()
        elif m % 2 == 0:
            out = self.m_series(2).compose(self.m_series(m // 2))
        else:
            out = self.eval_f(self.m_series(m - 1), t)
        out = UniSeries(r, out.c, self.N + 1)
        self._msers[m] = out
        return out

    def _two_series(self) -> UniSeries:
        r = self.ring
        c = [r.zero] * (self.N + 1)
        for (a, b), v in self.f_table(self.N).items():
            n = a + b
            c[n] = r.add(c[n], v)
        return UniSeries(r, c, self.N + 1)


# ---------------------------------------------------------------------------
# curve automorphisms as power series on t = -x/y


def automorphism_to_series(fg: FormalGroup, x_image: MPoly, y_image: MPoly) -> UniSeries:
    """Series of a curve automorphism (x, y) -> (X(x,y), Y(x,y)) on t = -x/y.

    The map must preserve the Weierstrass equation modulo the curve ideal and
    fix the point at infinity.
    """
    r = fg.ring
    curve = fg.curve
    eq = curve.equation()
    img = _subst_xy(eq, x_image, y_image)
    if not _reduce_mod_curve(img, curve).is_zero():
        raise CurveError("map does not preserve the curve equation")
    num, dx = _clear_denominators(x_image, fg)
    den, dy = _clear_denominators(y_image, fg)
    wpow_n = dy - dx if dy > dx else 0
    wpow_d = dx - dy if dx > dy else 0
    prec = fg.N + 1
    wd = UniSeries.one(r, prec)
    for _ in range(wpow_d):
        wd = (wd * fg.w).truncate(prec)
    denom = (den * wd).truncate(prec)
    if not r.is_unit(denom.c[0]):
        raise CurveError("denominator -Y is not a unit at infinity")
    wn = UniSeries.one(r, prec)
    for _ in range(wpow_n):
        wn = (wn * fg.w).truncate(prec)
    t_new = -((num * wn).truncate(prec) * denom.inverse()).truncate(prec)
    if not r.is_zero(t_new.c[0]):
        raise CurveError("map does not fix the point at infinity")
    return UniSeries(r, t_new.c, prec)


def _subst_xy(p: MPoly, x_image: MPoly, y_image: MPoly) -> MPoly:
    return p.subs([x_image, y_image])


def _reduce_mod_curve(p: MPoly, curve: WeierstrassCurve) -> MPoly:
    """Canonical form modulo y^2 = -a1 xy - a3 y + x^3 + a2 x^2 + a4 x + a6."""
    r = p.ring
    rep = MPoly(
        r,
        2,
        {
            (1, 1): r.neg(curve.a1),
            (0, 1): r.neg(curve.a3),
            (3, 0): r.one,
            (2, 0): curve.a2,
            (1, 0): curve.a4,
            (0, 0): curve.a6,
        },
    )
    cur = p
    while True:
        high = {e: c for e, c in cur.terms.items() if e[1] >= 2}
        if not high:
            return cur
        low = MPoly(r, 2, {e: c for e, c in cur.terms.items() if e[1] < 2})
        acc = low
        for (i, j), c in high.items():
            term = MPoly(r, 2, {(i, j - 2): c})
            acc = acc + term * rep
        cur = acc


def _clear_denominators(p: MPoly, fg: FormalGroup):
    """Write p(t/w, -1/w) = (series in t) / w^d with d = max total degree."""
    r = fg.ring
    d = max((i + j for (i, j) in p.terms), default=0)
    prec = fg.N + 1
    out = UniSeries.zero(r, prec)
    wpow = {0: UniSeries.one(r, prec)}

    def wp(n):
        if n not in wpow:
            wpow[n] = (wp(n - 1) * fg.w).truncate(prec)
        return wpow[n]

    for (i, j), c in p.terms.items():
        coeff = c if j % 2 == 0 else r.neg(c)
        piece = wp(d - i - j).shift(i).truncate(prec).scale(coeff)
        out = out + piece
    return UniSeries(r, out.c, prec), d


def _np_conv4(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """F4 series product of uint8 coefficient vectors, truncated to length n."""
    a64 = a.astype(np.int64)
    b64 = b.astype(np.int64)
    a0, a1 = a64 & 1, a64 >> 1
    b0, b1 = b64 & 1, b64 >> 1
    c00 = np.convolve(a0, b0)[:n]
    c11 = np.convolve(a1, b1)[:n]
    c01 = np.convolve(a0, b1)[:n]
    c10 = np.convolve(a1, b0)[:n]
    r0 = (c00 + c11) & 1
    r1 = (c01 + c10 + c11) & 1
    out = (r0 | (r1 << 1)).astype(np.uint8)
    if out.shape[0] < n:
        out = np.concatenate([out, np.zeros(n - out.shape[0], np.uint8)])
    return out


def _np_pow_list(vec: np.ndarray, emax: int, prec: int) -> np.ndarray:
    """Stack of powers vec^0..vec^emax over F4, each truncated to length prec."""
    out = np.zeros((emax + 1, prec), dtype=np.uint8)
    out[0, 0] = 1
    if emax >= 1:
        out[1, : vec.shape[0]] = vec[:prec]
    for e in range(2, emax + 1):
        if e % 2 == 0:
            half = out[e // 2][: (prec + 1) // 2]
            out[e, 0 : 2 * half.shape[0] : 2] = gf4.FROB[half]
        else:
            out[e] = _np_conv4(out[e - 1], out[1], prec)
    return out
