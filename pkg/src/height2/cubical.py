"""Cubical-structure calculus for the supersingular height-2 formal group.

The canonical 3-structure s of the curve is built from the collinearity
determinant over the Vandermonde of x-coordinates,

    s = det[[t_i, -1, w_i]] * w1 w2 w3 / prod_(i<j) (t_i w_j - t_j w_i)
        * prod_(i<j) F(t_i, t_j) / (t1 t2 t3 * t(P1 + P2 + P3)),

normalized by its constant term and machine-checked against the
k-structure axioms.  The pairwise factors are reorganized before anything
is computed: with w = t^3 * u and t_i w_j - t_j w_i = t_i t_j (t_i + t_j)
G_ij, where G_ij vanishes exactly on the inverse-diagonal t_j = iota(t_i)
-- the same divisor as F(t_i, t_j) -- the quotients u_ij = F_ij / G_ij are
unit series computable in two variables, and

    s = det * u1 u2 u3 * u_12 u_13 u_23 / ((t1+t2)(t1+t3)(t2+t3) * U)

with U = t1 +_F t2 +_F t3.  Divisions by t_i + t_j are synthetic; the
division by U substitutes z -> F(iota(x +_F y), z~), in which coordinate U
becomes exactly z~.

The twisted right-hand side attached to a group element g and the
order-by-order solver for the real 1-structure l_g with
delta^2(l_g) = rhs(g) live here too, together with the reality rewriting
b_1 = 0, b_3 = 0, b_5 = b_2, ... that eliminates odd coefficients.
"""

from __future__ import annotations

import numpy as np

from . import gf4
from .fgl import FormalGroup
from .gflinalg import mmul, solve as gf_solve
from .m4 import M4, M4Space, uni_pow_matrix
from .series import BPolyRing, F4, NotDivisibleError, UniSeries
from .witt import PrecisionError, Z2Int


class CubicalError(ArithmeticError):
    """Axiom failure or inconsistent solve; loud by design."""


class CubicalContext:
    """Caches one working degree worth of trivariate machinery.

    degree D means monomials of total degree <= D are computed and trusted
    (the internal space has bound D + 1 so that the divisor divisions in the
    s-construction land on full precision).
    """

    def __init__(self, fg: FormalGroup, D: int = 34, cocycle_deg: int = 14):
        if fg.N < D + 2:
            raise PrecisionError("formal group must be built past the working degree")
        self.fg = fg
        self.D = D
        self.Dw = D + 1
        self.sp = M4Space(3, self.Dw)
        self.sp2 = M4Space(2, self.Dw)
        self.cocycle_deg = cocycle_deg
        self._ftab = fg.f_table(self.Dw)
        self._built = {}
        self._delta_cache = {}
        self._lead_cache = {}
        self._nu_cache = None
        self._s = None
        self._s_inv = None
        self._axioms = None

    # -- basic series in the trivariate space

    def f_pair(self, i: int, j: int) -> M4:
        """F(t_i, t_j) as a trivariate series."""
        key = ("fpair", i, j)
        if key not in self._built:
            terms = {}
            for (a, b), c in self._ftab.items():
                e = [0, 0, 0]
                e[i], e[j] = a, b
                terms[tuple(e)] = c
            self._built[key] = self.sp.from_terms(terms)
        return self._built[key]

    def f_apply(self, a: M4, b: M4) -> M4:
        """F(a, b) for trivariate series with zero constant term."""
        sp = self.sp
        prec = min(a.prec, b.prec)
        apows = sp.pow_list(a, self.Dw)
        astack = np.stack([p.v for p in apows])
        coef = np.zeros((self.Dw + 1, self.Dw + 1), dtype=np.uint8)
        for (i, j), c in self._ftab.items():
            coef[j, i] = c
        rows = mmul(coef, astack)  # rows[b] = sum_a F_ab * a^a
        ks = [k for k in range(self.Dw + 1) if rows[k].any()]
        bpows = sp.pow_list(b, max(ks, default=0))
        out = sp.zero(prec)
        for k in ks:
            piece = M4(sp, rows[k], prec) if k == 0 else sp.mul(M4(sp, rows[k], prec), bpows[k])
            out = sp.add(out, piece)
            out.prec = prec
        out.prec = prec
        out.v[sp.deg >= prec] = 0
        return out

    def _base(self, name):
        """x, y, z, A = x+y, B = x+z, C = y+z (F-sums), U = x+y+z."""
        if name in self._built:
            return self._built[name]
        sp = self.sp
        if name in ("x", "y", "z"):
            out = sp.var("xyz".index(name))
        elif name == "A":
            out = self.f_pair(0, 1)
        elif name == "B":
            out = self.f_pair(0, 2)
        elif name == "C":
            out = self.f_pair(1, 2)
        elif name == "U":
            out = self.f_apply(self._base("A"), sp.var(2))
        else:
            raise KeyError(name)
        self._built[name] = out
        return out

    def _pows(self, name):
        key = ("pows", name)
        if key not in self._built:
            self._built[key] = self.sp.pow_list(self._base(name), self.Dw)
        return self._built[key]

    def _pow_stack(self, name):
        key = ("stack", name)
        if key not in self._built:
            self._built[key] = np.stack([p.v for p in self._pows(name)])
        return self._built[key]

    # -- delta of 1-structures

    def eval_one_structure(self, l: UniSeries, name: str) -> M4:
        """l(V) for V one of the cached base series; l needs prec > D."""
        if l.prec < self.Dw + 1:
            raise PrecisionError("1-structure known to too few coefficients")
        row = np.array(l.c[: self.Dw + 1], dtype=np.uint8).reshape(1, -1)
        v = mmul(row, self._pow_stack(name)).ravel()
        return M4(self.sp, v, self.Dw + 1)

    def delta2(self, l: UniSeries) -> M4:
        """delta^2 of a 1-structure with constant term 1:

        l(x) l(y) l(z) l(x+y+z) / (l(x+y) l(x+z) l(y+z)), F-sums throughout.
        """
        sp = self.sp
        if not l.c[0] == 1:
            raise ValueError("1-structures have constant term 1")
        num = sp.mul(sp.mul(self.eval_one_structure(l, "x"), self.eval_one_structure(l, "y")),
                     sp.mul(self.eval_one_structure(l, "z"), self.eval_one_structure(l, "U")))
        den = sp.mul(sp.mul(self.eval_one_structure(l, "A"), self.eval_one_structure(l, "B")),
                     self.eval_one_structure(l, "C"))
        return sp.exact_div_unit(num, den)

    # -- the canonical 3-structure

    def _unit_u12(self):
        """u(t1, t2) = F(t1, t2) / G(t1, t2) in two variables, where
        G = (v(t1) + v(t2)) / (t1 + t2) and v = w / t."""
        sp2 = self.sp2
        Dw = self.Dw
        v = self.fg.w.shift(-1).truncate(Dw + 2)
        snum = sp2.add(sp2.from_univariate(v.truncate(Dw + 1), 0),
                       sp2.from_univariate(v.truncate(Dw + 1), 1))
        # exact numerator: degree <= Dw part of an exactly known series
        G = sp2.synth_div_linear(M4(sp2, snum.v, Dw + 2), 0, 1)
        # coordinate z~ = F(t1, t2): substitute t2 = F(iota(t1), z~)
        iota = self.fg.iota.truncate(Dw + 1)
        phi_terms = {}
        ipows = _uni_pow_series(iota, Dw)
        for (a, b), c in self._ftab.items():
            if b > Dw:
                continue
            for k, ck in enumerate(ipows[a].c):
                if ck and k + b <= Dw:
                    e = (k, b)
                    phi_terms[e] = phi_terms.get(e, 0) ^ gf4.gmul(ck, c)
        phi = sp2.from_terms({e: c for e, c in phi_terms.items() if c})
        phip = sp2.pow_list(phi, Dw)
        GT = sp2.subs_axis_multivariate(G, 1, phip)
        ghat = sp2.div_monomial(GT, (0, 1))
        u_tilde = sp2.inverse(ghat)
        Fb = self.sp2.from_terms(dict(self._ftab))
        Fp = sp2.pow_list(Fb, Dw)
        u = sp2.subs_axis_multivariate(u_tilde, 1, Fp)
        if u.v[0] != 1:
            raise CubicalError("pairwise divisor unit does not start at 1")
        return u

    def three_structure(self) -> M4:
        """The canonical 3-structure, constructed and axiom-checked."""
        if self._s is not None:
            return self._s
        sp = self.sp
        Dw = self.Dw

        # det[[t_i, -1, w_i]] = D_23 + D_13 + D_12 in characteristic 2,
        # divided exactly by (t1+t2)(t1+t3)(t2+t3) in a deeper throwaway space
        deep = M4Space(3, Dw + 3)
        det_terms = {}
        wc = self.fg.w
        for (i, j) in ((1, 2), (0, 2), (0, 1)):
            for n in range(3, Dw + 4):
                c = wc.c[n] if n < wc.prec else 0
                if not c:
                    continue
                for (p, q) in ((i, j), (j, i)):
                    e = [0, 0, 0]
                    e[p] += 1
                    e[q] += n
                    e = tuple(e)
                    if sum(e) <= Dw + 3:
                        det_terms[e] = det_terms.get(e, 0) ^ c
        det = deep.from_terms({e: c for e, c in det_terms.items() if c})
        for (i, j) in ((0, 1), (0, 2), (1, 2)):
            det = deep.synth_div_linear(det, i, j)
        keep = deep.deg <= Dw
        idx = sp._lookup(deep.exps[keep])
        v = np.zeros(sp.M, dtype=np.uint8)
        v[idx] = det.v[keep]
        num = M4(sp, v, Dw + 1)

        # unit factors w_i / t_i^3 and the pairwise units u_ij
        for axis in range(3):
            what = self.fg.w.shift(-3).truncate(Dw + 1)
            num = sp.mul(num, sp.from_univariate(what, axis))
        u12 = self._unit_u12()
        for axes in ((0, 1), (0, 2), (1, 2)):
            num = sp.mul(num, self.sp2.inject(u12, sp, axes))

        # division by U via the straightening coordinate z -> F(iota(A), z~)
        iotaA = self._iota_of("A")
        phi = self.f_apply(iotaA, sp.var(2))
        phip = sp.pow_list(phi, Dw)
        numT = sp.subs_axis_multivariate(num, 2, phip)
        sT = sp.div_monomial(numT, (0, 0, 1))
        s = sp.subs_axis_multivariate(sT, 2, self._pows("U"))

        c0 = int(s.v[0])
        if c0 == 0:
            raise CubicalError("3-structure has vanishing constant term")
        s = sp.scale(s, gf4.ginv(c0))
        self._s = s
        self._axioms = self._check_axioms(s)
        return s

    def _iota_of(self, name) -> M4:
        """iota(V) = sum_k iota_k V^k for a cached base series."""
        key = ("iota", name)
        if key not in self._built:
            stack = self._pow_stack(name)
            comb = np.zeros((1, self.Dw + 1), dtype=np.uint8)
            comb[0] = self.fg.iota.c[: self.Dw + 1]
            self._built[key] = M4(self.sp, mmul(comb, stack).ravel(), self.Dw + 1)
        return self._built[key]

    def subs_gseries(self, a: M4, g: UniSeries) -> M4:
        """a(g(x), g(y), g(z)) for a univariate g with g(0) = 0."""
        pm = uni_pow_matrix(g.truncate(self.Dw + 1), self.Dw)
        out = a
        for axis in range(3):
            out = self.sp.subs_axis_univariate(out, axis, pm)
        return out

    def _check_axioms(self, s: M4):
        sp = self.sp
        report = {}
        # normalization s(0, y, z) = 1
        sl = sp.set_var_zero(s, 0)
        report["normalization"] = sp.eq(sl, sp.one(), s.prec)
        report["symmetry"] = sp.is_symmetric(s)
        report["cocycle"] = self._check_cocycle(s)
        if not all(report.values()):
            raise CubicalError(f"3-structure axiom failure: {report}")
        return report

    def _check_cocycle(self, s: M4) -> bool:
        """f(x1,x2,x3) f(x0, x1+x2, x3) = f(x0+x1, x2, x3) f(x0, x1, x3)
        in four variables at the configured degree."""
        dq = self.cocycle_deg
        sp4 = M4Space(4, dq)
        fb = {e: c for e, c in self._ftab.items() if sum(e) <= dq}

        def fsum4(i, j):
            terms = {}
            for (a, b), c in fb.items():
                e = [0, 0, 0, 0]
                e[i], e[j] = a, b
                terms[tuple(e)] = c
            return sp4.from_terms(terms)

        def inject(axes):
            # embed s (3 vars) into sp4 on the given axes
            exps = np.zeros((self.sp.M, 4), dtype=np.int64)
            for k, ax in enumerate(axes):
                exps[:, ax] = self.sp.exps[:, k]
            keep = exps.sum(axis=1) <= dq
            v = np.zeros(sp4.M, dtype=np.uint8)
            tgt = sp4.rank[tuple(exps[keep].T)]
            v[tgt] = s.v[keep]
            return M4(sp4, v, dq + 1)

        s123 = inject((1, 2, 3))
        s013 = inject((0, 1, 3))
        # f(x0+x1, x2, x3): substitute axis 1 of s(x1, x2, x3) by F(x0, x1)
        f01 = fsum4(0, 1)
        s_sum_23 = sp4.subs_axis_multivariate(s123, 1, sp4.pow_list(f01, dq))
        # f(x0, x1+x2, x3): substitute axis 1 of s(x0, x1, x3) by F(x1, x2)
        f12 = fsum4(1, 2)
        s0_sum_3 = sp4.subs_axis_multivariate(s013, 1, sp4.pow_list(f12, dq))
        lhs = sp4.mul(s123, s0_sum_3)
        rhs = sp4.mul(s_sum_23, s013)
        return sp4.eq(lhs, rhs)

    def axiom_report(self):
        self.three_structure()
        return dict(self._axioms)

    def s_inverse(self) -> M4:
        if self._s_inv is None:
            self._s_inv = self.sp.inverse(self.three_structure())
        return self._s_inv

    # -- cannibalistic right-hand side

    def normalized_series(self, g: UniSeries) -> UniSeries:
        """g(t) / (g'(0) t): the 1-structure attached to a unit series."""
        if g.c[0] != 0 or g.c[1] == 0:
            raise ValueError("need a series with g(0) = 0 and unit g'(0)")
        shifted = g.shift(-1)
        return shifted.scale(gf4.ginv(g.c[1]))

    def cannibalistic_rhs(self, g: UniSeries, det_g: Z2Int) -> M4:
        """s(g(x), g(y), g(z)) * delta^2(g/g'(0)) /
        (s^((det+1)/2) * (s o iota)^((det-1)/2))."""
        sp = self.sp
        s = self.three_structure()
        s_g = self.subs_gseries(s, g)
        ghat = self.normalized_series(g).truncate(self.Dw + 1)
        num = sp.mul(s_g, self.delta2(ghat))
        e_plus = (det_g + Z2Int(det_g.n, 1)).half()
        e_minus = (det_g - Z2Int(det_g.n, 1)).half()
        if e_plus.v == 1 and e_minus.v == 0:
            den_inv = self.s_inverse()
        else:
            s_iota = self._s_of_iota()
            den = sp.mul(self._m4_two_adic_power(s, e_plus),
                         self._m4_two_adic_power(s_iota, e_minus))
            den_inv = sp.inverse(den)
        out = sp.mul(num, den_inv)
        return out

    def _s_of_iota(self) -> M4:
        key = ("s_iota",)
        if key not in self._built:
            pm = uni_pow_matrix(self.fg.iota.truncate(self.Dw + 1), self.Dw)
            out = self.three_structure()
            for axis in range(3):
                out = self.sp.subs_axis_univariate(out, axis, pm)
            self._built[key] = out
        return self._built[key]

    def _m4_two_adic_power(self, a: M4, e: Z2Int) -> M4:
        sp = self.sp
        if a.v[0] != 1:
            raise ValueError("2-adic powers need constant term 1")
        bits = max(1, self.Dw.bit_length())
        if e.n < bits:
            raise PrecisionError("exponent known to too few bits")
        out = sp.one(a.prec)
        sq = a
        for i in range(bits):
            if e.bit(i):
                out = sp.mul(out, sq)
            sq = sp.square(sq)
            sq.prec = a.prec
        out.prec = a.prec
        return out

    def alternate_rhs_has_pole(self, g: UniSeries, det_g: Z2Int) -> bool:
        """Falsification check for the other reading of delta^2(g/g'(0)).

        Interpreted on g(t)/g'(0) (constant term zero) the right-hand side
        picks up the meromorphic factor delta^2(t) = xyzU / (ABC), whose
        denominator's lowest form (x+y)(x+z)(y+z) would have to divide the
        numerator's lowest form; it never does, so no power series -- let
        alone a real 1-structure -- can satisfy the equation.
        """
        rhs = self.cannibalistic_rhs(g, det_g)
        if rhs.v[0] != 1:
            raise CubicalError("right-hand side is not a unit series")
        # numerator lowest form of rhs * xyzU: rhs(0) * xyz * (x+y+z)
        num_poly = {(2, 1, 1): 1, (1, 2, 1): 1, (1, 1, 2): 1}
        den_poly = _poly3_mul(_poly3_mul({(1, 0, 0): 1, (0, 1, 0): 1}, {(1, 0, 0): 1, (0, 0, 1): 1}),
                              {(0, 1, 0): 1, (0, 0, 1): 1})
        # try all linear quotients a x + b y + c z over F4
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    q = {e: v for e, v in (((1, 0, 0), a), ((0, 1, 0), b), ((0, 0, 1), c)) if v}
                    if q and _poly3_mul(den_poly, q) == num_poly:
                        return False
        return True

    # -- reality relations

    def reality_relations(self, dmax: int = None):
        """Triangular rewrites expressing odd-index b's through lower ones.

        Comparing coefficients of l_b(z) and l_b(iota(z)) up to z^dmax, each
        new relation is solved for its highest odd-index variable; the
        resolved forms only involve even-index generators.
        """
        if self._nu_cache is not None and dmax is None:
            return self._nu_cache
        d = self.Dw if dmax is None else dmax
        ring = BPolyRing(d, names=tuple(f"b{i+1}" for i in range(d)))
        lb = UniSeries(ring, [ring.one] + [ring.gen(i) for i in range(d)], d + 1)
        iota = self.fg.iota.truncate(d + 1)
        iota_lift = UniSeries(ring, [ring.const(c) for c in iota.c], d + 1)
        lb_iota = lb.compose(iota_lift)
        rewrites = {}  # odd index m -> {even index n: coeff}
        for m in range(2, d + 1):
            rel = ring.add(lb_iota.c[m], lb.c[m])  # char 2 difference
            rel = _resolve(ring, rel, rewrites)
            if not rel:
                continue
            # linear in the b's by construction; variable index k carries b_(k+1)
            items = sorted(((e.index(1), c) for e, c in rel.items()), reverse=True)
            lead, lead_c = items[0]
            if (lead + 1) % 2 == 0:
                raise CubicalError(
                    f"reality relation at z^{m} leads in the even generator b{lead+1}"
                )
            inv = gf4.ginv(lead_c)
            form = {}
            for idx, c in items[1:]:
                form[idx] = gf4.gmul(inv, c)
            form = _resolve_form(form, rewrites)
            rewrites[lead] = form
        out = (ring, rewrites)
        if dmax is None:
            self._nu_cache = out
        return out

    def re_star(self, ring: BPolyRing, poly, rewrites) -> dict:
        """Rewrite odd-index generators using the reality relations."""
        out = {}
        for e, c in poly.items():
            term = {tuple(0 for _ in e): c}
            for i, k in enumerate(e):
                if not k:
                    continue
                if (i + 1) % 2 == 0 or i not in rewrites:  # b_(i+1): even stays
                    base = {tuple(k if j == i else 0 for j in range(len(e))): 1}
                else:
                    base = _form_to_poly(ring, rewrites[i])
                    base = _poly_pow(ring, base, k)
                term = _dict_mul(ring, term, base)
            for ee, cc in term.items():
                v = out.get(ee, 0) ^ cc
                if v:
                    out[ee] = v
                else:
                    out.pop(ee, None)
        return out

    def real_completion(self, n: int, c: int) -> UniSeries:
        """The real 1-structure 1 + c z^n + (forced odd coefficients)."""
        ring, rewrites = self.reality_relations()
        d = self.Dw
        coeffs = [0] * (d + 1)
        coeffs[0] = 1
        coeffs[n] = c
        for m, form in rewrites.items():
            lam = form.get(n - 1, 0)  # variable index of b_n is n - 1
            if lam:
                coeffs[m + 1] ^= gf4.gmul(lam, c)
        return UniSeries(F4, coeffs, d + 2)

    # -- the solver

    def correction_lead(self, n: int):
        """Lowest degree at which the n-th even coefficient acts on delta^2."""
        if n not in self._lead_cache:
            delta = self.delta2(self.real_completion(n, 1))
            dv = delta.copy()
            dv.v[0] ^= 1
            lead = self.sp.lowest_nonzero_degree(dv)
            self._lead_cache[n] = (lead, dv)
        return self._lead_cache[n]

    def correction(self, n: int, c: int):
        key = (n, c)
        if key not in self._delta_cache:
            mu = self.real_completion(n, c)
            delta = self.delta2(mu)
            self._delta_cache[key] = (mu, delta, self.sp.inverse(delta))
        return self._delta_cache[key]

    def solve_real_one_structure(self, rhs: M4, report_order: int = 8):
        """The unique real 1-structure l with delta^2(l) = rhs.

        Solved degree by degree: at the lowest unexplained residual degree,
        the linearized contributions of the unfixed even coefficients whose
        corrections first act there must match the residual slice; a failed
        or ambiguous match raises, which is the load-bearing arbiter for the
        convention flags.
        """
        sp = self.sp
        trust = min(rhs.prec, self.Dw + 1) - 1
        l = UniSeries.one(F4, self.Dw + 2)
        R = rhs
        fixed = {}
        guard = 0
        while True:
            guard += 1
            if guard > 64:
                raise CubicalError("solver failed to terminate")
            dv = R.copy()
            dv.v[0] ^= 1
            delta_deg = sp.lowest_nonzero_degree(dv)
            if delta_deg is None or delta_deg > trust:
                break
            cands = []
            for n in range(2, min(delta_deg, self.Dw) + 1, 2):
                if n in fixed:
                    continue
                lead, dvn = self.correction_lead(n)
                if lead == delta_deg:
                    cands.append((n, dvn))
            if not cands:
                raise CubicalError(
                    f"no correction acts at residual degree {delta_deg}; "
                    "wrong 3-structure, delta-interpretation, or commutator convention"
                )
            target = sp.deg_component(dv, delta_deg)
            cols = np.stack([sp.deg_component(dvn, delta_deg) for _, dvn in cands], axis=1)
            from .gflinalg import rank as gf_rank

            if gf_rank(cols) < len(cands):
                raise CubicalError(
                    f"dependent corrections at residual degree {delta_deg}; "
                    "solution would not be unique"
                )
            sol = gf_solve(cols, target)
            if sol is None:
                raise CubicalError(
                    f"inconsistent linear system at residual degree {delta_deg}"
                )
            progressed = False
            for (n, _), cval in zip(cands, sol):
                cval = int(cval)
                fixed[n] = cval
                if cval:
                    mu, _, dinv = self.correction(n, cval)
                    l = (l * mu).truncate(self.Dw + 2)
                    R = sp.mul(R, dinv)
                    progressed = True
            if not progressed:
                raise CubicalError(
                    f"zero solution at residual degree {delta_deg}; solver is stuck"
                )
        # verify reality of the result
        if not l.compose(self.fg.iota.truncate(self.Dw + 2)).eq_mod(l, self.Dw + 1):
            raise CubicalError("solved series is not a real 1-structure")
        return l.truncate(report_order), fixed

    def l_series(self, g: UniSeries, det_g: Z2Int, report_order: int = 8) -> UniSeries:
        rhs = self.cannibalistic_rhs(g, det_g)
        l, _ = self.solve_real_one_structure(rhs, report_order)
        return l

    # -- the twisted action on the polynomial generators

    def twisted_action(self, l_g: UniSeries, g: UniSeries, max_index: int):
        """Images of the even generators under the twist: for 2i <= 2*max_index,

            image of b~_2i = re*(coeff of z^(2i) in l_g(z) l_b(g(z))),

        returned as polynomials over F4 in the even-index generators
        (exponent tuples over b~_2, b~_4, ..., b~_(2 max_index), plus a
        constant term).
        """
        d = 2 * max_index
        ring, rewrites_full = self.reality_relations()
        ringd = BPolyRing(d, names=tuple(f"b{i+1}" for i in range(d)))
        rewrites = {m: {k: v for k, v in form.items() if k < d}
                    for m, form in rewrites_full.items() if m < d}
        lb = UniSeries(ringd, [ringd.one] + [ringd.gen(i) for i in range(d)], d + 1)
        g_lift = UniSeries(ringd, [ringd.const(c) for c in g.c[: d + 1]], d + 1)
        lg_lift = UniSeries(ringd, [ringd.const(c) for c in l_g.c[: d + 1]], d + 1)
        total = (lg_lift * lb.compose(g_lift)).truncate(d + 1)
        out = []
        for i in range(1, max_index + 1):
            poly = self.re_star(ringd, total.c[2 * i], rewrites)
            out.append(_to_even_poly(poly, max_index))
        return out


# ---------------------------------------------------------------------------
# small helpers (plain dict polynomials over F4)


def _resolve(ring: BPolyRing, rel: dict, rewrites) -> dict:
    out = {}
    for e, c in rel.items():
        deg = sum(e)
        if deg == 0:
            raise CubicalError("reality relation with a constant term")
        idx = e.index(1)
        if deg == 1 and idx in rewrites:
            for k, v in rewrites[idx].items():
                ee = tuple(1 if j == k else 0 for j in range(len(e)))
                w = out.get(ee, 0) ^ gf4.gmul(c, v)
                if w:
                    out[ee] = w
                else:
                    out.pop(ee, None)
        else:
            w = out.get(e, 0) ^ c
            if w:
                out[e] = w
            else:
                out.pop(e, None)
    return out


def _resolve_form(form: dict, rewrites) -> dict:
    out = {}
    for idx, c in form.items():
        if idx in rewrites:
            for k, v in rewrites[idx].items():
                w = out.get(k, 0) ^ gf4.gmul(c, v)
                if w:
                    out[k] = w
                else:
                    out.pop(k, None)
        else:
            w = out.get(idx, 0) ^ c
            if w:
                out[idx] = w
            else:
                out.pop(idx, None)
    return out


def _form_to_poly(ring: BPolyRing, form: dict) -> dict:
    return {tuple(1 if j == k else 0 for j in range(ring.nvars)): c for k, c in form.items()}


def _dict_mul(ring: BPolyRing, a: dict, b: dict) -> dict:
    return ring.mul(a, b)


def _poly_pow(ring: BPolyRing, a: dict, k: int) -> dict:
    out = ring.one
    for _ in range(k):
        out = ring.mul(out, a)
    return out


def _to_even_poly(poly: dict, max_index: int) -> dict:
    """Re-key a polynomial in b_1..b_2i onto the even generators only."""
    out = {}
    for e, c in poly.items():
        if any(e[i] for i in range(len(e)) if i % 2 == 0):
            raise CubicalError("odd generator survived the reality rewriting")
        key = tuple(e[2 * j - 1] for j in range(1, max_index + 1))
        v = out.get(key, 0) ^ c
        if v:
            out[key] = v
        else:
            out.pop(key, None)
    return out


def _poly3_mul(a: dict, b: dict) -> dict:
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            v = out.get(e, 0) ^ gf4.gmul(c1, c2)
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def _uni_pow_series(u: UniSeries, emax: int):
    out = [UniSeries.one(F4, u.prec), u]
    for e in range(2, emax + 1):
        if e % 2 == 0:
            out.append(out[e // 2].square().truncate(u.prec))
        else:
            out.append((out[e - 1] * u).truncate(u.prec))
    return out
