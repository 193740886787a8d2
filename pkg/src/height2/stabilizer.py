"""The endomorphism quaternion order of the height-2 formal group and its
unit group.

Elements x + y*T with x, y in W(F4)/2^n, subject to T^2 = -2 and
T*a = sigma(a)*T, multiply by

    (x1, y1)(x2, y2) = (x1 x2 - 2 y1 sigma(y2), x1 y2 + y1 sigma(x2)).

Units carry a unique T-adic digit expansion gamma = sum a_i T^i with
Teichmueller digits a_i in {0, 1, z, z^2}; the group product matches series
composition, (gh)(t) = g(h(t)).  The extension by the Galois group is
handled by a single bit with (g1, e1)(g2, e2) = (g1 sigma^e1(g2), e1+e2).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import gf4
from .fgl import FormalGroup, WeierstrassCurve, automorphism_to_series
from .series import F4, MPoly, UniSeries
from .witt import (
    PrecisionError,
    WittInt,
    Z2Int,
    hensel_sqrt,
    teichmuller,
    witt_one,
)


class NotEndomorphismError(ValueError):
    pass


@dataclass(frozen=True)
class Quat:
    """x + y*T at Witt precision n."""

    x: WittInt
    y: WittInt

    def __post_init__(self):
        if self.x.n != self.y.n:
            raise PrecisionError("components at different precision")

    @property
    def n(self):
        return self.x.n

    @staticmethod
    def scalar(x: WittInt) -> "Quat":
        return Quat(x, WittInt(x.n, 0, 0))

    @staticmethod
    def one(n: int) -> "Quat":
        return Quat.scalar(witt_one(n))

    def _match(self, other):
        if self.n != other.n:
            raise PrecisionError(f"precision mismatch: {self.n} vs {other.n}")

    def __mul__(self, other: "Quat") -> "Quat":
        self._match(other)
        x1, y1, x2, y2 = self.x, self.y, other.x, other.y
        return Quat(
            x1 * x2 - (y1 * y2.conj()).scale(2),
            x1 * y2 + y1 * x2.conj(),
        )

    def __add__(self, other: "Quat") -> "Quat":
        self._match(other)
        return Quat(self.x + other.x, self.y + other.y)

    def __neg__(self):
        return Quat(-self.x, -self.y)

    def det(self) -> Z2Int:
        """Reduced norm x*sigma(x) + 2*y*sigma(y), a 2-adic integer."""
        return self.x.norm() + Z2Int(self.n, 2 * self.y.norm().v)

    def norm_conj(self) -> "Quat":
        """gamma-bar with gamma * gamma-bar = det(gamma)."""
        return Quat(self.x.conj(), -self.y)

    def galois(self) -> "Quat":
        """Entrywise sigma; conjugation by the Galois element."""
        return Quat(self.x.conj(), self.y.conj())

    def is_unit(self) -> bool:
        return self.x.is_unit()

    def inv(self) -> "Quat":
        d = self.det()
        if not d.is_unit():
            raise ZeroDivisionError("non-unit endomorphism")
        k = d.inv().v
        nc = self.norm_conj()
        return Quat(nc.x.scale(k), nc.y.scale(k))

    def reduce(self, n: int) -> "Quat":
        return Quat(self.x.reduce(n), self.y.reduce(n))

    def __str__(self):
        return f"({self.x}) + ({self.y})*T"


@dataclass(frozen=True)
class GElt:
    """A unit times an optional Galois twist."""

    g: Quat
    eps: int = 0

    @property
    def n(self):
        return self.g.n

    @staticmethod
    def of(q: Quat) -> "GElt":
        return GElt(q, 0)

    @staticmethod
    def sigma(n: int) -> "GElt":
        return GElt(Quat.one(n), 1)

    def __mul__(self, other: "GElt") -> "GElt":
        h = other.g.galois() if self.eps else other.g
        return GElt(self.g * h, self.eps ^ other.eps)

    def inv(self) -> "GElt":
        q = self.g.inv()
        if self.eps:
            q = q.galois()
        return GElt(q, self.eps)

    def det(self) -> Z2Int:
        return self.g.det()

    def reduce(self, n: int) -> "GElt":
        return GElt(self.g.reduce(n), self.eps)


def commutator(a, b, order: str = "ghg-1h-1"):
    """[a, b]; the convention is configurable since printed downstream values
    are the arbiter for it."""
    if order == "ghg-1h-1":
        return a * b * a.inv() * b.inv()
    if order == "g-1h-1gh":
        return a.inv() * b.inv() * a * b
    raise ValueError(f"unknown commutator order {order!r}")


# ---------------------------------------------------------------------------
# digits


def t_digits(q: Quat, m: int):
    """First m digits of the T-adic expansion, as F4 scalars.

    Reading digit k happens after floor(k/2) halvings, so m digits need
    Witt precision at least (m+1)//2.
    """
    need = (m + 1) // 2
    if q.n < need:
        raise PrecisionError(f"{m} digits need Witt precision >= {need}, have {q.n}")
    n = q.n
    x, y = q.x, q.y
    out = []
    for _ in range(m):
        a = x.mod2()
        out.append(a)
        lift = teichmuller(a, n)
        diff = lift - x  # divisible by 2
        if (diff.a | diff.b) & 1:
            raise AssertionError("digit recursion produced an odd difference")
        # gamma = a0 + gamma' T with coefficients on the left:
        # gamma' T = (-2v, u) for gamma' = (u, v), so u = y, v = (a0 - x)/2
        x, y = y, WittInt(n, diff.a >> 1, diff.b >> 1)
    return out


def from_digits(digits, n: int) -> Quat:
    """Reconstruct sum a_i T^i (T^2 = -2) at Witt precision n."""
    x = WittInt(n, 0, 0)
    y = WittInt(n, 0, 0)
    for i, a in enumerate(digits):
        lift = teichmuller(a, n).scale(pow(-2, i // 2, 1 << n))
        if i % 2 == 0:
            x = x + lift
        else:
            y = y + lift
    return Quat(x, y)


def digits_str(digits, eps: int = 0) -> str:
    return ",".join(gf4.show(a) for a in digits) + f";{eps}"


def filtration_level(g, m: int) -> int:
    """Largest k <= m with g of the form 1 + x T^k; 0 if not even in F_(1/2)."""
    q = g.g if isinstance(g, GElt) else g
    d = t_digits(q, m)
    if d[0] != gf4.ONE:
        return 0
    for k in range(1, m):
        if d[k] != 0:
            return k
    return m


def digit_profile(g: GElt):
    """(eps, a0, a1/a0^2, a2/a0): the mod-m digit functions, constant on
    left cosets of the level-3 filtration subgroup."""
    d = t_digits(g.g, 3)
    a0, a1, a2 = d
    if a0 == 0:
        raise ValueError("profile of a non-unit")
    return (
        g.eps,
        a0,
        gf4.gdiv(a1, gf4.gmul(a0, a0)),
        gf4.gdiv(a2, a0),
    )


# ---------------------------------------------------------------------------
# series <-> quaternion


def quaternion_to_series(g, fg: FormalGroup, prec: int) -> UniSeries:
    """The mod-m action on the formal group: F-sum of [a_i] t^(2^i)."""
    q = g.g if isinstance(g, GElt) else g
    m = 1
    while (1 << m) < prec:
        m += 1
    digits = t_digits(q, m)
    terms = [
        UniSeries.monomial(F4, 1 << i, a, prec) for i, a in enumerate(digits) if a
    ]
    if not terms:
        return UniSeries.zero(F4, prec)
    return fg.f_sum(terms)


def series_to_quaternion(phi: UniSeries, fg: FormalGroup, m: int) -> Quat:
    """Digits by repeated F-stripping; fails if phi is not an endomorphism."""
    if phi.prec < (1 << m):
        raise PrecisionError(f"{m} digits need series precision >= {1 << m}")
    if phi.c[0] != 0:
        raise NotEndomorphismError("nonzero constant term")
    psi = phi.truncate(1 << m)
    digits = []
    for k in range(m):
        a = psi.c[1] if psi.prec > 1 else 0
        digits.append(a)
        if a:
            strip = fg.iota.compose(UniSeries.x(F4, psi.prec, a))
            psi = fg.eval_f(strip, psi)
        odd = [i for i in range(1, psi.prec, 2) if psi.c[i]]
        if odd:
            raise NotEndomorphismError(
                f"coefficient at t^{odd[0]} survives stripping digit {k}"
            )
        psi = UniSeries(F4, psi.c[0::2], (psi.prec + 1) // 2)
    # m digits pin x and y mod 2^(m//2)
    return from_digits(digits, max(1, m // 2))


# ---------------------------------------------------------------------------
# named elements


class NamedElements:
    """pi, alpha, omega, sigma, the quaternion group of the curve, and the
    commutators generating the determinant-one part of the filtration.

    pi, alpha, omega, sigma are exact at the requested Witt precision; the
    elements built from the curve automorphism i (and everything mixing with
    them) live at precision i_digits/2 + 1, since i is read off from its
    power series digit by digit.
    """

    def __init__(self, prec: int = 8, i_digits: int = 8, comm_order: str = "ghg-1h-1"):
        self.prec = prec
        self.i_digits = i_digits
        self.comm_order = comm_order
        self.prec_i = max(1, i_digits // 2)
        n = prec

        self.pi = GElt.of(Quat.scalar(WittInt(n, 1, 2)))
        root = hensel_sqrt(Z2Int(n + 1, -7), 1)  # = 1 mod 4
        self.sqrt_m7 = root
        alpha_x = WittInt(n, 1, -2).scale(root.inv().v)
        self.alpha = GElt.of(Quat.scalar(alpha_x))
        self.omega = GElt.of(Quat.scalar(WittInt(n, 0, 1)))
        self.sigma = GElt.sigma(n)
        self.minus_one = GElt.of(Quat.scalar(WittInt(n, -1, 0)))

        self.fg_i = FormalGroup(WeierstrassCurve.c0(), 1 << i_digits)
        x_img = MPoly(F4, 2, {(1, 0): 1, (0, 0): 1})
        y_img = MPoly(F4, 2, {(0, 1): 1, (1, 0): 1, (0, 0): gf4.ZETA})
        self.i_series = automorphism_to_series(self.fg_i, x_img, y_img)
        self.i = GElt.of(series_to_quaternion(self.i_series, self.fg_i, i_digits))

        p = self.prec_i
        om = self.omega.reduce(p)
        self.j = om * self.i * om * om
        self.k = om * self.j * om * om
        al = self.alpha.reduce(p)
        self.alpha2 = GElt.of(self.alpha.g * self.alpha.g)
        self.ci = commutator(self.i, al, comm_order)
        self.cj = commutator(self.j, al, comm_order)
        self.ci2 = self.ci * self.ci
        self.cj2 = self.cj * self.cj
        self.pi_over_alpha = self.pi * self.alpha.inv()

    def table(self):
        return {
            "pi": self.pi,
            "alpha": self.alpha,
            "omega": self.omega,
            "sigma": self.sigma,
            "i": self.i,
            "j": self.j,
            "k": self.k,
            "alpha2": self.alpha2,
            "ci": self.ci,
            "cj": self.cj,
            "ci2": self.ci2,
            "cj2": self.cj2,
            "pi_over_alpha": self.pi_over_alpha,
        }


# ---------------------------------------------------------------------------
# finite quotients of the unit group


class FiltrationQuotient:
    """S / F_(m/2): elements are m-digit tuples with a_0 != 0.

    Products delegate to quaternion arithmetic at Witt precision
    ceil(m/2) + 1.  Determinants of digit classes are well defined mod
    2^ceil(m/2) (deeper filtration subgroups have determinants reaching
    1 + 2^ceil(m/2) Z2).
    """

    def __init__(self, m: int):
        if m < 1 or m > 8:
            raise ValueError("quotient depth must be between 1 and 8")
        self.m = m
        self.p = (m + 1) // 2
        self.det_bits = (m + 1) // 2

    def element(self, g) -> tuple:
        q = g.g if isinstance(g, GElt) else g
        return tuple(t_digits(q, self.m))

    def lift(self, e: tuple) -> Quat:
        return from_digits(e, self.p)

    def mul(self, e1: tuple, e2: tuple) -> tuple:
        return tuple(t_digits(self.lift(e1) * self.lift(e2), self.m))

    def inv(self, e: tuple) -> tuple:
        return tuple(t_digits(self.lift(e).inv(), self.m))

    def identity(self) -> tuple:
        return (gf4.ONE,) + (0,) * (self.m - 1)

    def det(self, e: tuple) -> int:
        """Determinant of the class, mod 2^ceil(m/2)."""
        return self.lift(e).det().v & ((1 << self.det_bits) - 1)

    def elements(self):
        """All 3 * 4^(m-1) classes of units."""
        from itertools import product as iproduct

        out = []
        for a0 in gf4.UNITS:
            for rest in iproduct(gf4.ELEMENTS, repeat=self.m - 1):
                out.append((a0,) + rest)
        return out

    def filtration_subgroup(self, k: int):
        """Classes of elements that are 1 + x T^k (the image of F_(k/2))."""
        from itertools import product as iproduct

        out = []
        for rest in iproduct(gf4.ELEMENTS, repeat=self.m - k):
            out.append((gf4.ONE,) + (0,) * (k - 1) + rest)
        return out

    def closure(self, gens):
        """BFS subgroup closure of a list of digit tuples."""
        gens = list(gens) + [self.inv(g) for g in gens]
        seen = {self.identity()}
        frontier = [self.identity()]
        while frontier:
            nxt = []
            for e in frontier:
                for g in gens:
                    h = self.mul(e, g)
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            frontier = nxt
        return seen
