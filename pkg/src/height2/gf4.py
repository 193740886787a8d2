"""Arithmetic in F4 = F2[z]/(z^2+z+1).

Elements are encoded as ints 0..3 with value c0 + 2*c1 meaning c0 + c1*z:

    0 -> 0,  1 -> 1,  2 -> z,  3 -> z^2 = 1+z

Addition is XOR; the multiplicative group is cyclic of order 3 generated
by z; Frobenius x -> x^2 swaps z and z^2.
"""

import numpy as np

ZERO = 0
ONE = 1
ZETA = 2
ZETA2 = 3

ELEMENTS = (0, 1, 2, 3)
UNITS = (1, 2, 3)


def _build_mul():
    t = np.zeros((4, 4), dtype=np.uint8)
    for a in range(4):
        for b in range(4):
            a0, a1 = a & 1, a >> 1
            b0, b1 = b & 1, b >> 1
            c0 = (a0 & b0) ^ (a1 & b1)
            c1 = (a0 & b1) ^ (a1 & b0) ^ (a1 & b1)
            t[a, b] = c0 | (c1 << 1)
    return t


MUL = _build_mul()
MUL_FLAT = MUL.reshape(16).copy()          # index (a << 2) | b
FROB = np.array([0, 1, 3, 2], dtype=np.uint8)
INV = np.array([0, 1, 3, 2], dtype=np.uint8)  # INV[0] unused

_NAMES = ("0", "1", "z", "z2")
_PARSE = {"0": 0, "1": 1, "z": 2, "z2": 3, "z^2": 3}


def gadd(a: int, b: int) -> int:
    return a ^ b


def gmul(a: int, b: int) -> int:
    return int(MUL[a, b])


def gneg(a: int) -> int:
    return a


def ginv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("inverse of 0 in F4")
    return int(INV[a])


def gdiv(a: int, b: int) -> int:
    return gmul(a, ginv(b))


def gfrob(a: int) -> int:
    return int(FROB[a])


def gpow(a: int, n: int) -> int:
    if a == 0:
        if n <= 0:
            raise ZeroDivisionError("0^n for n <= 0 in F4")
        return 0
    return {0: 1, 1: a, 2: int(FROB[a])}[n % 3]


def show(a: int) -> str:
    return _NAMES[a]


def parse(s: str) -> int:
    try:
        return _PARSE[s.strip()]
    except KeyError:
        raise ValueError(f"not an F4 element: {s!r}") from None
