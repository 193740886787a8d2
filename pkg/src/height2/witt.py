"""Truncated Witt vectors of F4 and 2-adic integers.

W(F4)/2^n is presented as (Z/2^n)[z]/(z^2+z+1): a pair (a, b) means a + b*z.
In this presentation the Frobenius conjugation is sigma(a + b*z) =
a + b*z^2 = (a - b) - b*z, the Teichmueller lift of z is z itself
(z^3 = 1 holds exactly at every precision), and the norm down to Z/2^n is
x*sigma(x) = a^2 - a*b + b^2.

Z2Int is the sub-ring b = 0, kept as its own type since determinants,
square roots and Mahler coefficients live there.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from . import gf4

DEFAULT_PREC = 8


class PrecisionError(ValueError):
    pass


@dataclass(frozen=True)
class Z2Int:
    """Residue mod 2^n, i.e. a 2-adic integer known to n bits."""

    n: int
    v: int

    def __post_init__(self):
        if self.n < 1:
            raise PrecisionError("precision must be >= 1 bit")
        object.__setattr__(self, "v", self.v & ((1 << self.n) - 1))

    def _match(self, other: "Z2Int") -> None:
        if self.n != other.n:
            raise PrecisionError(f"precision mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        self._match(other)
        return Z2Int(self.n, self.v + other.v)

    def __sub__(self, other):
        self._match(other)
        return Z2Int(self.n, self.v - other.v)

    def __neg__(self):
        return Z2Int(self.n, -self.v)

    def __mul__(self, other):
        self._match(other)
        return Z2Int(self.n, self.v * other.v)

    def is_unit(self) -> bool:
        return self.v & 1 == 1

    def inv(self) -> "Z2Int":
        if not self.is_unit():
            raise ZeroDivisionError("inverse of an even 2-adic integer")
        return Z2Int(self.n, pow(self.v, -1, 1 << self.n))

    def half(self) -> "Z2Int":
        """Divide an even residue by 2, losing one bit of precision."""
        if self.v & 1:
            raise ValueError("half() of an odd residue")
        return Z2Int(self.n - 1, self.v >> 1)

    def bit(self, i: int) -> int:
        if i >= self.n:
            raise PrecisionError(f"bit {i} beyond precision {self.n}")
        return (self.v >> i) & 1

    def reduce(self, n: int) -> "Z2Int":
        if n > self.n:
            raise PrecisionError("cannot raise precision")
        return Z2Int(n, self.v)

    def signed(self) -> int:
        """Representative in (-2^(n-1), 2^(n-1)]."""
        half = 1 << (self.n - 1)
        return self.v - (1 << self.n) if self.v > half else self.v

    def __str__(self):
        return f"{self.v} mod 2^{self.n}"


@dataclass(frozen=True)
class WittInt:
    """a + b*z in (Z/2^n)[z]/(z^2+z+1)."""

    n: int
    a: int
    b: int

    def __post_init__(self):
        m = (1 << self.n) - 1
        object.__setattr__(self, "a", self.a & m)
        object.__setattr__(self, "b", self.b & m)

    def _match(self, other: "WittInt") -> None:
        if self.n != other.n:
            raise PrecisionError(f"precision mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        self._match(other)
        return WittInt(self.n, self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        self._match(other)
        return WittInt(self.n, self.a - other.a, self.b - other.b)

    def __neg__(self):
        return WittInt(self.n, -self.a, -self.b)

    def __mul__(self, other):
        # (a1 + b1 z)(a2 + b2 z) with z^2 = -1 - z
        self._match(other)
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return WittInt(self.n, a1 * a2 - b1 * b2, a1 * b2 + b1 * a2 - b1 * b2)

    def conj(self) -> "WittInt":
        """sigma(a + b*z) = (a - b) - b*z; ring automorphism of order 2."""
        return WittInt(self.n, self.a - self.b, -self.b)

    def norm(self) -> Z2Int:
        """x * sigma(x) = a^2 - a*b + b^2 in Z/2^n."""
        return Z2Int(self.n, self.a * self.a - self.a * self.b + self.b * self.b)

    def trace(self) -> Z2Int:
        return Z2Int(self.n, 2 * self.a - self.b)

    def is_unit(self) -> bool:
        return (self.a & 1) | (self.b & 1) == 1

    def inv(self) -> "WittInt":
        nrm = self.norm()
        if not nrm.is_unit():
            raise ZeroDivisionError("inverse of a non-unit Witt integer")
        return self.conj().scale(nrm.inv().v)

    def scale(self, k: int) -> "WittInt":
        return WittInt(self.n, self.a * k, self.b * k)

    def mod2(self) -> int:
        """Reduction (Z/2^n)[z] -> F4, a ring morphism."""
        return (self.a & 1) | ((self.b & 1) << 1)

    def reduce(self, n: int) -> "WittInt":
        if n > self.n:
            raise PrecisionError("cannot raise precision")
        return WittInt(n, self.a, self.b)

    def is_real(self) -> bool:
        return self.b == 0

    def real(self) -> Z2Int:
        if self.b != 0:
            raise ValueError("not in the fixed ring of sigma")
        return Z2Int(self.n, self.a)

    def __str__(self):
        return f"{self.a}+{self.b}*z mod 2^{self.n}"


def witt_from_z2(x: Z2Int) -> WittInt:
    return WittInt(x.n, x.v, 0)


def witt_zero(n: int) -> WittInt:
    return WittInt(n, 0, 0)


def witt_one(n: int) -> WittInt:
    return WittInt(n, 1, 0)


def teichmuller(c: int, n: int) -> WittInt:
    """The multiplicative lift F4 -> W(F4)/2^n: t = 0 or t^3 = 1."""
    if c == gf4.ZERO:
        return WittInt(n, 0, 0)
    if c == gf4.ONE:
        return WittInt(n, 1, 0)
    if c == gf4.ZETA:
        return WittInt(n, 0, 1)
    return WittInt(n, -1, -1)  # z^2 = -1 - z


def hensel_sqrt(target: Z2Int, residue_condition: int) -> Z2Int:
    """Square root of a 1-mod-8 residue, pinned by its value mod 4.

    Solving mod 2^n only determines the root mod 2^(n-1) (the +-r ambiguity
    costs one bit), so the result carries one bit less precision than the
    input.
    """
    if residue_condition not in (1, 3):
        raise ValueError("residue condition must be 1 or 3 mod 4")
    p = target.n
    if p < 4:
        raise PrecisionError("need at least 4 bits to take a square root")
    if target.v % 8 != 1:
        raise ValueError(f"{target} is not a square in Z2 (not 1 mod 8)")
    r = 1
    for k in range(3, p):
        if ((r * r - target.v) >> k) & 1:
            r += 1 << (k - 1)
    if r % 4 != residue_condition:
        r = (1 << p) - r
    if r % 4 != residue_condition:
        raise ValueError("no square root with the requested residue mod 4")
    return Z2Int(p - 1, r)


def mahler_binomial(k: int, n: Z2Int) -> Z2Int:
    """The Mahler basis function n -> C(n, k), evaluated 2-adically.

    C(., k) maps residues mod 2^p to well-defined residues mod 2^(p - v2(k!)),
    where v2(k!) = k - popcount(k).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    v2_kfact = k - bin(k).count("1")
    out_prec = n.n - v2_kfact
    if out_prec < 1:
        raise PrecisionError(
            f"C(n, {k}) needs more than {n.n} input bits for any output precision"
        )
    return Z2Int(out_prec, comb(n.v, k))
