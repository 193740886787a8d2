"""Dense multivariate truncated series over F4, graded by total degree.

An M4Space fixes a variable count and a total-degree bound D and owns the
index tables; an M4 value is a flat uint8 vector over the monomial basis
(ordered by total degree, then reverse-lex inside a degree) plus a precision
p <= D+1 meaning "coefficients of total degree < p are trusted".

Multiplication scatters table-driven coefficient products with bincount on
two F2 planes (F4 addition is XOR).  Squaring is the Frobenius reindexing.
Substitution of a univariate series into one variable is a tensor
contraction on the dense cube; substitution of a full multivariate series
uses precomputed powers.  Exact division by t_i + t_j is synthetic division
along an axis.
"""

from __future__ import annotations

from itertools import product as iproduct

import numpy as np

from .gf4 import MUL_FLAT, FROB, INV
from .series import NotDivisibleError, UniSeries
from .witt import PrecisionError


class M4:
    __slots__ = ("space", "v", "prec")

    def __init__(self, space, v, prec):
        self.space = space
        self.v = v
        self.prec = prec  # trusted for total degree < prec

    def copy(self):
        return M4(self.space, self.v.copy(), self.prec)

    def __repr__(self):
        return f"M4({self.space.nvars} vars, deg<={self.space.D}, prec {self.prec})"


class M4Space:
    def __init__(self, nvars, D):
        self.nvars = nvars
        self.D = D
        exps = sorted(
            (e for e in iproduct(range(D + 1), repeat=nvars) if sum(e) <= D),
            key=lambda e: (sum(e), tuple(-x for x in e)),
        )
        self.exps = np.array(exps, dtype=np.int64)
        self.M = len(exps)
        self.deg = self.exps.sum(axis=1)
        self.deg_start = np.searchsorted(self.deg, np.arange(D + 2))
        # rank array: exponent tuple -> basis index (or -1)
        rank = np.full((D + 1,) * nvars, -1, dtype=np.int64)
        rank[tuple(self.exps.T)] = np.arange(self.M)
        self.rank = rank
        self.cube_shape = (D + 1,) * nvars
        self.cube_pos = np.ravel_multi_index(tuple(self.exps.T), self.cube_shape)
        sq = 2 * self.exps
        ok = sq.sum(axis=1) <= D
        self.sq_map = np.where(ok, self._lookup(np.where(ok[:, None], sq, 0)), -1)
        self._pairs = None
        self._slices = {}

    def _lookup(self, exps):
        return self.rank[tuple(exps.T)]

    # -- constructors

    def zero(self, prec=None):
        return M4(self, np.zeros(self.M, dtype=np.uint8), self._p(prec))

    def one(self, prec=None):
        v = np.zeros(self.M, dtype=np.uint8)
        v[0] = 1
        return M4(self, v, self._p(prec))

    def _p(self, prec):
        return self.D + 1 if prec is None else min(prec, self.D + 1)

    def from_terms(self, terms, prec=None):
        v = np.zeros(self.M, dtype=np.uint8)
        for e, c in terms.items():
            if sum(e) <= self.D and c:
                v[int(self.rank[tuple(e)])] = c
        return M4(self, v, self._p(prec))

    def var(self, i, prec=None):
        e = [0] * self.nvars
        e[i] = 1
        return self.from_terms({tuple(e): 1}, prec)

    def from_univariate(self, s: UniSeries, axis, prec=None):
        """Inject sum c_k t^k as a series in variable `axis`."""
        v = np.zeros(self.M, dtype=np.uint8)
        e = np.zeros(self.nvars, dtype=np.int64)
        for k in range(min(s.prec, self.D + 1)):
            if s.c[k]:
                e[axis] = k
                v[int(self.rank[tuple(e)])] = s.c[k]
        return M4(self, v, self._p(min(prec, s.prec) if prec else s.prec))

    def embed_from(self, other: "M4Space", axes):
        """Index maps injecting a lower-variable space along the given axes."""
        exps = np.zeros((other.M, self.nvars), dtype=np.int64)
        for k, ax in enumerate(axes):
            exps[:, ax] = other.exps[:, k]
        return self._lookup(exps)

    def inject(self, a: M4, target: "M4Space", axes):
        idx = target.embed_from(self, axes)
        v = np.zeros(target.M, dtype=np.uint8)
        v[idx] = a.v
        return M4(target, v, a.prec)

    # -- multiplication

    def _pair_tables(self):
        if self._pairs is None:
            Is, Js, Ks = [], [], []
            for d1 in range(self.D + 1):
                i0, i1 = self.deg_start[d1], self.deg_start[d1 + 1]
                if i0 == i1:
                    continue
                for d2 in range(self.D + 1 - d1):
                    j0, j1 = self.deg_start[d2], self.deg_start[d2 + 1]
                    if j0 == j1:
                        continue
                    ia = np.arange(i0, i1, dtype=np.int64)
                    ja = np.arange(j0, j1, dtype=np.int64)
                    I = np.repeat(ia, j1 - j0)
                    J = np.tile(ja, i1 - i0)
                    K = self._lookup(self.exps[I] + self.exps[J])
                    Is.append(I)
                    Js.append(J)
                    Ks.append(K)
            self._pairs = (
                np.concatenate(Is).astype(np.int64),
                np.concatenate(Js).astype(np.int64),
                np.concatenate(Ks).astype(np.int64),
            )
        return self._pairs

    def mul(self, a: M4, b: M4) -> M4:
        I, J, K = self._pair_tables()
        va = a.v[I].astype(np.int16)
        vb = b.v[J]
        prod = MUL_FLAT[(va << 2) | vb]
        r0 = np.bincount(K, weights=(prod & 1), minlength=self.M).astype(np.int64) & 1
        r1 = np.bincount(K, weights=(prod >> 1), minlength=self.M).astype(np.int64) & 1
        out = (r0 | (r1 << 1)).astype(np.uint8)
        prec = min(a.prec + self._val(b), b.prec + self._val(a), self.D + 1)
        out[self.deg >= prec] = 0
        return M4(self, out, prec)

    def _val(self, a: M4) -> int:
        nz = np.nonzero(a.v)[0]
        return a.prec if nz.size == 0 else int(self.deg[nz[0]])

    def val(self, a: M4) -> int:
        return self._val(a)

    def square(self, a: M4) -> M4:
        out = np.zeros(self.M, dtype=np.uint8)
        ok = self.sq_map >= 0
        out[self.sq_map[ok]] = FROB[a.v[ok]]
        prec = min(a.prec + self._val(a), self.D + 1)
        out[self.deg >= prec] = 0
        return M4(self, out, prec)

    def add(self, a: M4, b: M4) -> M4:
        prec = min(a.prec, b.prec)
        out = a.v ^ b.v
        out[self.deg >= prec] = 0
        return M4(self, out, prec)

    def scale(self, a: M4, c: int) -> M4:
        return M4(self, MUL_FLAT[(a.v.astype(np.int16) << 2) | c].astype(np.uint8), a.prec)

    def eq(self, a: M4, b: M4, prec=None) -> bool:
        p = min(a.prec, b.prec) if prec is None else prec
        if p > min(a.prec, b.prec):
            raise PrecisionError("comparison beyond known precision")
        keep = self.deg < p
        return bool(np.array_equal(a.v[keep], b.v[keep]))

    def is_one(self, a: M4) -> bool:
        return a.v[0] == 1 and not a.v[1:].any()

    def pow_list(self, a: M4, emax: int):
        """[a^0, a^1, ..., a^emax]; even powers via Frobenius squaring."""
        out = [self.one(), a]
        for e in range(2, emax + 1):
            out.append(self.square(out[e // 2]) if e % 2 == 0 else self.mul(out[e - 1], a))
        return out

    def inverse(self, a: M4) -> M4:
        c0 = int(a.v[0])
        if c0 == 0:
            raise NotDivisibleError("constant term is not a unit")
        v = self.zero(a.prec)
        v.v[0] = INV[c0]
        known = 1
        while known <= self.D:
            v = self.mul(a, self.square(v))
            v.prec = a.prec
            known *= 2
        v.prec = a.prec
        return v

    def exact_div_unit(self, a: M4, b: M4) -> M4:
        q = self.mul(a, self.inverse(b))
        chk = self.mul(q, b)
        if not self.eq(chk, a, min(q.prec, a.prec)):
            raise NotDivisibleError("division left a remainder")
        return q

    def mul_monomial(self, a: M4, shift) -> M4:
        tgt = self.exps + np.asarray(shift, dtype=np.int64)
        ok = tgt.sum(axis=1) <= self.D
        idx = self._lookup(np.where(ok[:, None], tgt, 0))
        out = np.zeros(self.M, dtype=np.uint8)
        sel = ok & (a.v != 0)
        out[idx[sel]] = a.v[sel]
        prec = min(a.prec + int(sum(shift)), self.D + 1)
        return M4(self, out, prec)

    def div_monomial(self, a: M4, shift) -> M4:
        sh = np.asarray(shift, dtype=np.int64)
        bad = (self.exps < sh).any(axis=1) & (a.v != 0) & (self.deg < a.prec)
        if bad.any():
            raise NotDivisibleError(f"series not divisible by monomial {tuple(shift)}")
        src = self.exps + sh
        ok = src.sum(axis=1) <= self.D
        idx = self._lookup(np.where(ok[:, None], src, 0))
        out = np.zeros(self.M, dtype=np.uint8)
        out[ok] = a.v[idx[ok]]
        prec = a.prec - int(sh.sum())
        out[self.deg >= prec] = 0
        return M4(self, out, prec)

    # -- cube views and axis operations

    def to_cube(self, a: M4) -> np.ndarray:
        cube = np.zeros(self.cube_shape, dtype=np.uint8)
        cube.ravel()[self.cube_pos] = a.v
        return cube

    def from_cube(self, cube: np.ndarray, prec) -> M4:
        v = cube.ravel()[self.cube_pos].copy()
        out = M4(self, v, min(prec, self.D + 1))
        v[self.deg >= out.prec] = 0
        return out

    def subs_axis_univariate(self, a: M4, axis, pow_mat: np.ndarray) -> M4:
        """Substitute u(t) for variable `axis`; pow_mat[e, d] = [t^d] u^e.

        u must have zero constant term so that the substitution is
        filtration-preserving (pow_mat strictly lower-triangular off row 0).
        """
        cube = self.to_cube(a)
        c0 = (cube & 1).astype(np.int64)
        c1 = (cube >> 1).astype(np.int64)
        p0 = (pow_mat & 1).astype(np.int64)
        p1 = (pow_mat >> 1).astype(np.int64)
        o0 = (np.tensordot(c0, p0, axes=([axis], [0])) + np.tensordot(c1, p1, axes=([axis], [0]))) & 1
        o1 = (
            np.tensordot(c0, p1, axes=([axis], [0]))
            + np.tensordot(c1, p0, axes=([axis], [0]))
            + np.tensordot(c1, p1, axes=([axis], [0]))
        ) & 1
        out = (o0 | (o1 << 1)).astype(np.uint8)
        out = np.moveaxis(out, -1, axis)
        return self.from_cube(out, a.prec)

    def axis_slices(self, axis):
        """For each exponent e of `axis`: (source indices, indices with e -> 0)."""
        key = axis
        if key not in self._slices:
            per = []
            col = self.exps[:, axis]
            for e in range(self.D + 1):
                src = np.nonzero(col == e)[0]
                zeroed = self.exps[src].copy()
                zeroed[:, axis] = 0
                per.append((src, self._lookup(zeroed)))
            self._slices[key] = per
        return self._slices[key]

    def subs_axis_multivariate(self, a: M4, axis, h_pows) -> M4:
        """Substitute a multivariate series (powers given) for variable `axis`."""
        out = self.zero(a.prec)
        for e, (src, dst) in enumerate(self.axis_slices(axis)):
            if not a.v[src].any():
                continue
            piece = np.zeros(self.M, dtype=np.uint8)
            piece[dst] = a.v[src]
            out = self.add(out, self.mul(M4(self, piece, a.prec), h_pows[e]))
            out.prec = a.prec
        out.prec = a.prec
        out.v[self.deg >= out.prec] = 0
        return out

    def synth_div_linear(self, a: M4, i, j) -> M4:
        """Exact division by the polynomial t_i + t_j."""
        cube = self.to_cube(a).copy()
        q = np.zeros_like(cube)
        prev = None
        for d in range(self.D, 0, -1):
            sl = [slice(None)] * self.nvars
            sl[i] = d
            cur = cube[tuple(sl)]
            if prev is not None:
                cur = cur ^ self._shift_axis(prev, j if j < i else j - 1)
            sl_q = [slice(None)] * self.nvars
            sl_q[i] = d - 1
            q[tuple(sl_q)] = cur
            prev = cur
        sl = [slice(None)] * self.nvars
        sl[i] = 0
        rem = cube[tuple(sl)] ^ self._shift_axis(prev, j if j < i else j - 1)
        out = self.from_cube(q, a.prec - 1)
        if a.prec > self.D and rem.any():
            raise NotDivisibleError(f"not divisible by t_{i} + t_{j}")
        if a.prec <= self.D:
            # only low-degree part of the remainder is meaningful
            idx = np.argwhere(rem)
            if idx.size and (idx.sum(axis=1).min() < a.prec - 1):
                raise NotDivisibleError(f"not divisible by t_{i} + t_{j}")
        return out

    @staticmethod
    def _shift_axis(arr, axis):
        out = np.zeros_like(arr)
        src = [slice(None)] * arr.ndim
        dst = [slice(None)] * arr.ndim
        src[axis] = slice(0, arr.shape[axis] - 1)
        dst[axis] = slice(1, arr.shape[axis])
        out[tuple(dst)] = arr[tuple(src)]
        return out

    def permute(self, a: M4, perm) -> M4:
        cube = self.to_cube(a)
        return self.from_cube(np.transpose(cube, perm), a.prec)

    def is_symmetric(self, a: M4) -> bool:
        from itertools import permutations

        for perm in permutations(range(self.nvars)):
            if perm == tuple(range(self.nvars)):
                continue
            if not self.eq(a, self.permute(a, perm)):
                return False
        return True

    def set_var_zero(self, a: M4, axis) -> M4:
        keep = self.exps[:, axis] == 0
        v = np.where(keep, a.v, 0).astype(np.uint8)
        return M4(self, v, a.prec)

    def deg_component(self, a: M4, d):
        i0, i1 = self.deg_start[d], self.deg_start[d + 1]
        return a.v[i0:i1].copy()

    def lowest_nonzero_degree(self, a: M4):
        nz = np.nonzero(a.v)[0]
        if nz.size == 0:
            return None
        d = int(self.deg[nz[0]])
        return d if d < a.prec else None

    def show(self, a: M4, names=None) -> str:
        names = names or ("x", "y", "z", "w")[: self.nvars]
        from . import gf4 as _g

        bits = []
        for idx in np.nonzero(a.v)[0]:
            e = self.exps[idx]
            c = int(a.v[idx])
            vs = "*".join(
                names[i] if n == 1 else f"{names[i]}^{n}" for i, n in enumerate(e) if n
            )
            cs = _g.show(c)
            if not vs:
                bits.append(cs)
            elif cs == "1":
                bits.append(vs)
            else:
                bits.append(f"{cs}*{vs}")
        return " + ".join(bits) if bits else "0"


def uni_pow_matrix(u: UniSeries, D: int) -> np.ndarray:
    """pow_mat[e, d] = coefficient of t^d in u(t)^e, 0 <= e, d <= D."""
    if not u.ring.char2:
        raise ValueError("power matrices are implemented for F4 series")
    if u.prec < D + 1:
        raise PrecisionError("substitution series must be exact to the space degree")
    if u.c[0] != 0:
        raise ValueError("substitution series must have zero constant term")
    out = np.zeros((D + 1, D + 1), dtype=np.uint8)
    out[0, 0] = 1
    p = UniSeries.one(u.ring, D + 1)
    for e in range(1, D + 1):
        p = (p * u).truncate(D + 1)
        out[e, : len(p.c)] = p.c
    return out
