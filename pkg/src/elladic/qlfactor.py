"""Certified factorization of exact integer polynomials over Q_l.

Inputs are monic, squarefree and irreducible over Q (callers factor over Q
first); the output is the list of Q_l-irreducible pieces, each carrying a
validated LocalRing presentation of its field and the image of the root
inside it.  Working precision is escalated internally from the exact
integers until every certificate holds, so nothing is ever silently lost.

The engine is a slope/Newton-polygon recursion:

* residually coprime factorizations lift by (verified) Hensel;
* a residually irreducible reduction certifies an unramified extension;
* higher residual multiplicities shift to the residual root and read the
  Newton polygon: integral slopes substitute x -> c + l^a y and recurse,
  a single segment whose slope denominator equals the degree certifies an
  Eisenstein extension, and other single segments are refined through the
  residual polynomial (splitting over an auxiliary Eisenstein base when it
  is separable);
* residual polynomials that are proper irreducible powers (second-order
  types) are reported as unresolved blocks rather than guessed.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd as _gcd

from . import linalg
from .arith import int_val
from .errors import CertificateError, PrecisionError, RingConstructionError
from .padic import (
    LocalRing,
    PrimePower,
    RingElement,
    make_ring,
    rp_divmod,
    rp_eval,
    rp_from_ints,
    rp_mul,
    rp_normalize,
    rp_sub,
)


class _Escalate(Exception):
    """Internal: working precision is insufficient for a certificate."""


@dataclass
class QlPiece:
    """One Q_l-irreducible factor (or an unresolved block) of the input."""

    degree: int  # absolute degree over Q_l
    e: int
    f: int
    ring: LocalRing | None  # at working precision; None when unresolved
    theta: RingElement | None  # image of the root in `ring`
    embed_gen: RingElement | None  # image of the working-base generator
    resolved: bool
    attained_N: int  # certified normalized precision of the data
    note: str = ""

    def sort_key(self):
        if self.ring is not None:
            return (0, self.degree, self.ring.poly, self.theta.coords)
        return (1, self.degree, self.note)


# ---------------------------------------------------------------------------
# polynomial helpers over a finite field presented as a LocalRing at N = 1


def rp_add(a, b, ring):
    n = max(len(a), len(b))
    z = ring.zero
    return [(a[i] if i < len(a) else z) + (b[i] if i < len(b) else z) for i in range(n)]


def rp_gcd(a, b):
    a, b = rp_normalize(list(a)), rp_normalize(list(b))
    while b:
        a, b = b, rp_divmod(a, b)[1]
    if a:
        inv = a[-1].ring.invert(a[-1])
        a = [c * inv for c in a]
    return a


def rp_xgcd(a, b):
    ring = (a or b)[0].ring
    one = ring.one
    r0, r1 = rp_normalize(list(a)), rp_normalize(list(b))
    s0, s1 = [one], []
    t0, t1 = [], [one]
    while r1:
        q, r = rp_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, rp_normalize(rp_sub(s0, rp_mul(q, s1)))
        t0, t1 = t1, rp_normalize(rp_sub(t0, rp_mul(q, t1)))
    if r0:
        inv = ring.invert(r0[-1])
        r0 = [c * inv for c in r0]
        s0 = [c * inv for c in s0]
        t0 = [c * inv for c in t0]
    return r0, s0, t0


def rp_powmod(f, k: int, modpoly):
    ring = modpoly[-1].ring
    result = [ring.one]
    base = rp_divmod(f, modpoly)[1]
    while k:
        if k & 1:
            result = rp_divmod(rp_mul(result, base), modpoly)[1]
        base = rp_divmod(rp_mul(base, base), modpoly)[1]
        k >>= 1
    return result


def _pth_root_poly(f, field: LocalRing):
    """p-th root of a polynomial lying in K[x^p], K = F_{p^m}."""
    p = field.ell
    q = p**field.degree
    return [f[i] ** (q // p) for i in range(0, len(f), p)]


def factor_field_poly(f, field: LocalRing) -> list[tuple[tuple, int]]:
    """Monic irreducible factorization over the finite field K = `field`.

    Deterministic (fixed-seed equal-degree splitting); returns a sorted list
    of (factor as a tuple of K-elements low -> high, multiplicity).
    """
    p = field.ell
    q = p**field.degree
    f = rp_normalize(list(f))
    if len(f) <= 1:
        return []
    inv = field.invert(f[-1])
    f = [c * inv for c in f]
    found: dict[tuple, int] = {}

    def record(fac, mult):
        key = tuple(c.coords for c in fac)
        found[key] = found.get(key, 0) + mult

    def sqf_factor(g, outer):
        # char-p squarefree decomposition, then DDF/EDF on each part
        g = rp_normalize(g)
        while len(g) > 1:
            dg = rp_normalize([i * c for i, c in enumerate(g)][1:])
            if not dg:
                g = _pth_root_poly(g, field)
                outer *= p
                continue
            T = rp_gcd(g, dg)
            V = rp_divmod(g, T)[0]
            k = 0
            while len(V) > 1:
                k += 1
                W = rp_gcd(T, V)
                S = rp_divmod(V, W)[0]
                if len(S) > 1:
                    for fac in _ddf_edf(S):
                        record(fac, outer * k)
                V = W
                T = rp_divmod(T, W)[0]
            g = T
        return

    def _ddf_edf(g):
        factors = []
        x = [field.zero, field.one]
        h = list(x)
        d = 0
        rest = list(g)
        while len(rest) - 1 >= 2 * (d + 1):
            d += 1
            h = rp_powmod(h, q, rest)
            gd = rp_gcd(rp_normalize(rp_sub(h, x)), rest)
            if len(gd) > 1:
                factors.extend(_edf(gd, d))
                rest = rp_divmod(rest, gd)[0]
                h = rp_divmod(h, rest)[1]
        if len(rest) > 1:
            factors.append(rest)
        return factors

    def _edf(g, d):
        n = len(g) - 1
        if n == d:
            return [g]
        rng = _random.Random(0xE11AD1C + 1009 * n + d)
        pieces, result = [g], []
        while pieces:
            cur = pieces.pop()
            if len(cur) - 1 == d:
                result.append(cur)
                continue
            while True:
                a = rp_normalize(
                    [field.from_coords([rng.randrange(p) for _ in range(field.degree)]) for _ in range(len(cur) - 1)]
                )
                if len(a) < 2:
                    continue
                if p == 2:
                    acc = list(a)
                    t = list(a)
                    for _ in range(d * field.degree - 1):
                        t = rp_divmod(rp_mul(t, t), cur)[1]
                        acc = rp_normalize(rp_add(acc, t, field))
                    cand = rp_gcd(acc, cur)
                else:
                    b = rp_powmod(a, (q**d - 1) // 2, cur)
                    cand = rp_gcd(rp_normalize(rp_sub(b, [field.one])), cur)
                if 1 < len(cand) < len(cur):
                    pieces.extend([cand, rp_divmod(cur, cand)[0]])
                    break
        result.sort(key=lambda fac: tuple(c.coords for c in fac))
        return result

    sqf_factor(f, 1)
    items = [([field.from_coords(list(c)) for c in key], m) for key, m in found.items()]
    items.sort(key=lambda t: (len(t[0]), tuple(c.coords for c in t[0])))
    return [(tuple(fac), m) for fac, m in items]


# ---------------------------------------------------------------------------
# Hensel lifting of a residually coprime monic factorization


def hensel_coprime_parts(P, parts_bar, ring: LocalRing):
    """Lift monic P = prod(parts) from coprime residual parts; verified."""
    if len(parts_bar) == 1:
        return [list(P)]
    rest_bar = parts_bar[1]
    for extra in parts_bar[2:]:
        rest_bar = rp_normalize(rp_mul(rest_bar, extra))
    U, V = _hensel_pair(P, parts_bar[0], rest_bar, ring)
    out = [U]
    if len(parts_bar) > 2:
        out.extend(hensel_coprime_parts(V, parts_bar[1:], ring))
    else:
        out.append(V)
    prod = out[0]
    for f in out[1:]:
        prod = rp_mul(prod, f)
    if rp_normalize(rp_sub(prod, P)):
        raise CertificateError("Hensel factorization failed verification")
    return out


def _hensel_pair(P, Ubar, Vbar, ring: LocalRing):
    """Monic P = U*V over the ring from coprime residual factors, by linear
    lambda-adic lifting (s*Ubar + t*Vbar = 1 corrections)."""
    d, s, t = rp_xgcd(list(Ubar), list(Vbar))
    if len(d) != 1:
        raise CertificateError("residual parts are not coprime")
    lam = ring.uniformizer
    w = ring.lambda_precision
    U = [ring.lift_residue(c) for c in Ubar]
    V = [ring.lift_residue(c) for c in Vbar]
    lam_pow = ring.one
    for m in range(1, w):
        lam_pow = lam_pow * lam
        defect = rp_normalize(rp_sub(P, rp_mul(U, V)))
        if not defect:
            break
        dbar = []
        for c in defect:
            u = _divide_elem(ring, c, lam_pow)
            if u is None:
                raise _Escalate("Hensel defect is not divisible by lambda^m")
            dbar.append(ring.residue(u))
        dbar = rp_normalize(dbar)
        if not dbar:
            continue
        # corrections: A*Vbar + B*Ubar = dbar with deg A < deg Ubar
        a0 = rp_normalize(rp_mul(t, dbar))
        qa, A = rp_divmod(a0, list(Ubar))
        B = rp_normalize(rp_add(rp_mul(s, dbar), rp_mul(qa, list(Vbar)), Ubar[0].ring))
        U = _poly_add_scaled(U, A, lam_pow, ring)
        V = _poly_add_scaled(V, B, lam_pow, ring)
    if rp_normalize(rp_sub(P, rp_mul(U, V))):
        raise _Escalate("Hensel pair did not converge at working precision")
    return rp_normalize(U), rp_normalize(V)


def _poly_add_scaled(F, corr_bar, lam_pow, ring: LocalRing):
    out = list(F)
    for i, c in enumerate(corr_bar):
        lifted = lam_pow * ring.lift_residue(c)
        if i < len(out):
            out[i] = out[i] + lifted
        else:
            out.append(lifted)
    return out


def _divide_elem(ring: LocalRing, z: RingElement, w: RingElement):
    """Some u with w*u = z over the ring, or None."""
    if z.is_zero:
        return ring.zero
    mw = ring.mult_matrix(w)
    sol = linalg.solve_left(mw, list(z.coords), ring.ell, ring.precision)
    if sol is None:
        return None
    return ring.from_coords(sol)


# ---------------------------------------------------------------------------
# validated ring extensions (compositum presentation over Z/l^M)


@dataclass
class RingExtension:
    ring: LocalRing
    base_image: RingElement  # image of the base generator in `ring`
    root: RingElement  # image of the factor's root in `ring`
    base: LocalRing

    def map_base(self, z: RingElement) -> RingElement:
        acc = self.ring.zero
        for c in reversed(z.coords):
            acc = acc * self.base_image + self.ring.from_int(c)
        return acc

    def map_poly(self, poly):
        return [self.map_base(c) for c in poly]


def extend_ring(base: LocalRing, factor, e_factor: int, slope: tuple[int, int] | None = None) -> RingExtension:
    """Extension of `base` by a monic factor (degree >= 2), validated.

    e_factor is the relative ramification index; for e_factor > 1 (only
    supported over unramified bases) `slope` = (p, q) gives the valuation
    p/q of the factor's root in base-lambda units.  The module used is the
    maximal-order basis t^k / l^(p*floor(k/q)) (plain powers when the
    residual degree is 1), a primitive element z = t + c1*omega + c2*g is
    swept deterministically, and the compositum is presented by its
    characteristic polynomial, validated through make_ring.
    """
    ell, M = base.ell, base.precision
    mod = base.modulus
    dF = len(factor) - 1
    if dF < 2:
        raise ValueError("extend_ring expects a factor of degree >= 2")
    if e_factor > 1 and base.ramification_e != 1:
        raise CertificateError("ramified extensions are only built over unramified bases")
    D = base.degree * dF
    e_new = base.ramification_e * e_factor
    if e_factor > 1:
        if slope is None:
            raise CertificateError("ramified extension requires slope data")
        p_sl, q_sl = slope
    else:
        p_sl, q_sl = 0, 1
    u_res = dF // q_sl  # residual degree of the factor over the base

    # module basis: B_k x^j with B_k = t^k / l^(p*floor(k/q)); mult by t sends
    # B_k -> l^(p*(floor((k+1)/q)-floor(k/q))) B_(k+1), with the top row given
    # by the factor's coefficients scaled down accordingly (exact by the
    # Newton polygon).
    def denom(k: int) -> int:
        return p_sl * (k // q_sl)

    rows_t = []
    rows_g = []
    g = base.gen
    for k in range(dF):
        for j in range(base.degree):
            bj = _basis_elem(base, j)
            row = [0] * D
            if k + 1 < dF:
                scale = ell ** (p_sl * (((k + 1) // q_sl) - (k // q_sl)))
                for jj, c in enumerate(bj.coords):
                    row[(k + 1) * base.degree + jj] = (scale * c) % mod
            else:
                # t * B_(dF-1) = t^dF / l^(p(u-1)) = -sum factor_i t^i / l^(p(u-1))
                for i in range(dF):
                    shift = p_sl * ((u_res - 1) - (i // q_sl))
                    coeff = (-factor[i]) * bj
                    if shift > 0:
                        scaled = []
                        for c in coeff.coords:
                            if c % ell**shift:
                                raise _Escalate("factor coefficient below the certified segment")
                            scaled.append(c // ell**shift)
                    else:
                        scaled = [(c * ell**-shift) % mod for c in coeff.coords] if shift < 0 else list(coeff.coords)
                    for jj, c in enumerate(scaled):
                        row[i * base.degree + jj] = (row[i * base.degree + jj] + c) % mod
            rows_t.append(row)
            prod = g * bj
            grow = [0] * D
            for jj, c in enumerate(prod.coords):
                grow[k * base.degree + jj] = c
            rows_g.append(grow)

    # multiplication by omega = B_q = t^q / l^p (the unramified direction)
    rows_w = None
    if u_res > 1:
        mt_q = rows_t
        for _ in range(q_sl - 1):
            mt_q = linalg.mat_mul(mt_q, rows_t, mod)
        rows_w = []
        for row in mt_q:
            out = []
            for c in row:
                if c % ell**p_sl:
                    raise _Escalate("omega direction is not integral at working precision")
                out.append(c // ell**p_sl)
            rows_w.append(out)

    saw_escalate = False
    for c1, c2 in _sweep_pairs(4 * D + 2):
        if rows_w is None and c1:
            continue
        Z = rows_t
        if c1 and rows_w is not None:
            Z = linalg.mat_add(Z, linalg.mat_scale(rows_w, c1, mod), mod)
        if c2:
            Z = linalg.mat_add(Z, linalg.mat_scale(rows_g, c2, mod), mod)
        krylov = []
        v = [0] * D
        v[0] = 1
        for _ in range(D):
            krylov.append(v)
            v = linalg.mat_vec(linalg.transpose(Z), v, mod)
        try:
            inv = linalg.inv_unit_matrix(linalg.transpose(krylov), mod)
        except ValueError:
            continue
        q_z = linalg.charpoly(Z, mod)
        t_vec = [0] * D
        t_vec[base.degree] = 1
        g_vec = [0] * D
        if base.degree > 1:
            g_vec[1] = 1
        else:
            g_vec[0] = base.gen.coords[0]
        t_coords = linalg.mat_vec(inv, t_vec, mod)
        g_coords = linalg.mat_vec(inv, g_vec, mod)
        try:
            pi_hint = _uniformizer_coords(ell, M, q_z, e_new, base, t_coords, g_coords, e_factor, slope)
            ring = make_ring(ell, M, q_z, e_new, uniformizer=pi_hint)
        except _Escalate:
            saw_escalate = True
            continue
        except (RingConstructionError, PrecisionError, CertificateError):
            continue
        ext = RingExtension(ring=ring, base_image=ring.from_coords(g_coords), root=ring.from_coords(t_coords), base=base)
        if not rp_eval(ext.map_poly(factor), ext.root).is_zero:
            continue
        if not rp_eval([ext.ring.from_int(c) for c in base.poly], ext.base_image).is_zero:
            continue
        return ext
    if saw_escalate:
        raise _Escalate("ring extension certificates failed at working precision")
    raise CertificateError("no primitive element found for the ring extension")


def _sweep_pairs(bound: int):
    """Deterministic sweep order for primitive-element coefficients."""
    yield (0, 0)
    for s in range(1, bound):
        for c1 in range(s + 1):
            c2 = s - c1
            yield (c1, c2)


def _basis_elem(base: LocalRing, j: int) -> RingElement:
    v = [0] * base.degree
    v[j] = 1
    return base.from_coords(v)


def _uniformizer_coords(ell, M, q_z, e_new, base, t_coords, g_coords, e_factor, slope):
    if e_new == 1:
        return None
    shell = LocalRing(PrimePower(ell, M), tuple(c % ell**M for c in q_z), e_new, tuple([0] * (len(q_z) - 1)))
    t_img = shell.from_coords(t_coords)
    g_img = shell.from_coords(g_coords)

    def map_base(z):
        acc = shell.zero
        for c in reversed(z.coords):
            acc = acc * g_img + shell.from_int(c)
        return acc

    pi_base = map_base(base.uniformizer)
    if e_factor == 1:
        return list(pi_base.coords)
    if slope is None:
        raise CertificateError("ramified extension requires slope data")
    a, q = slope
    # v(root) = a, v(l) = q in new lambda units; pi = root^s / l^k, sa - kq = 1
    s = pow(a, -1, q)
    k = (s * a - 1) // q
    cand = _divide_elem(shell, t_img**s, pi_base**k)
    if cand is None:
        raise _Escalate("uniformizer division failed at working precision")
    return list(cand.coords)


# ---------------------------------------------------------------------------
# Newton polygon at finite precision


def newton_polygon(vals: list, lambda_cap: int):
    """Lower-hull segments of {(i, vals[i])}; vals[i] = None means >= cap.

    Returns [(slope_num, slope_den, i_start, i_end)] left to right in
    decreasing slope order.  When the leading low-order coefficients all
    vanish at working precision (a root cluster at the expansion center
    tighter than the precision), a pseudo segment (None, None, 0, x_k) is
    emitted for that block, provided its slope bound certifiably exceeds
    the first real slope; otherwise _Escalate is raised.
    """
    L = len(vals) - 1
    if vals[-1] != 0:
        raise CertificateError("polygon expects v(leading) = 0")
    pseudo = None
    start = 0
    if vals[0] is None:
        start = next(i for i, v in enumerate(vals) if v is not None)
        pseudo = (None, None, 0, start)
    pts = [(i, v) for i, v in enumerate(vals) if v is not None]
    hull = [pts[0]]
    for pnt in pts[1:]:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pnt[0] - x1) >= (pnt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pnt)
    for i, v in enumerate(vals):
        if v is None and start < i != L:
            hv = _hull_value(hull, i)
            if hv is not None and hv > lambda_cap:
                raise _Escalate("unknown coefficient could cut the Newton polygon")
    segs = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        num, den = y1 - y2, x2 - x1
        g = _gcd(num, den)
        if g:
            num, den = num // g, den // g
        segs.append((num, den, x1, x2))
    if pseudo is not None:
        if not segs:
            raise _Escalate("all low-order coefficients vanish at working precision")
        x_k, y_k = hull[0]
        # unknown block slope is at least (cap - y_k)/x_k; it must certifiably
        # exceed the first real slope
        num, den, _, _ = segs[0]
        if (lambda_cap - y_k) * den <= num * x_k:
            raise _Escalate("root cluster at the center is not separated at working precision")
        segs = [pseudo] + segs
    return segs


def _hull_value(hull, i):
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= i <= x2:
            return Fraction(y1) + Fraction(y2 - y1, x2 - x1) * (i - x1)
    return None


# ---------------------------------------------------------------------------
# the refinement engine


class _Refiner:
    def __init__(self, ell: int, M: int, target_N: int, allow_unresolved: bool):
        self.ell = ell
        self.M = M
        self.target_N = target_N
        self.allow_unresolved = allow_unresolved
        self.base0 = make_ring(ell, M, [0, 1], 1)

    def _val(self, c: RingElement):
        v = c.ring.valuation(c)
        if not v.is_exact:
            return None
        return v.lambda_units(c.ring.ramification_e)

    def refine(self, P, ring: LocalRing) -> list[QlPiece]:
        P = rp_normalize(P)
        L = len(P) - 1
        if L == 0:
            return []
        if L == 1:
            return [
                QlPiece(
                    ring.degree,
                    ring.ramification_e,
                    ring.residue_degree_f,
                    ring,
                    -P[0],
                    ring.gen,
                    True,
                    self.M,
                )
            ]
        field = ring.residue_field
        parts = factor_field_poly([ring.residue(c) for c in P], field)
        if len(parts) >= 2:
            out = []
            for Q in hensel_coprime_parts(P, _part_polys(parts, field), ring):
                out.extend(self.refine(Q, ring))
            return out
        wbar, mult = parts[0]
        if mult == 1:
            ext = extend_ring(ring, P, 1)
            return [self._cert_piece(ext, ext.root)]
        if len(wbar) - 1 >= 2:
            return self._unramified_descent(P, ring, wbar)
        # single linear residual factor: shift to the residual root
        center = ring.lift_residue(-wbar[0])
        Pc = _rp_shift(P, center)
        segs = newton_polygon([self._val(c) for c in Pc], ring.lambda_precision)
        if len(segs) == 1 and segs[0][0] is not None:
            num, den, _, _ = segs[0]
            if den == L:
                ext = extend_ring(ring, Pc, L, slope=(num, den))
                return [self._cert_piece(ext, ext.map_base(center) + ext.root)]
            if den == 1:
                Q = _rescale(Pc, num, ring)
                return [self._affine_piece(p, center, num) for p in self.refine(Q, ring)]
            return self._fractional_segment(P, Pc, center, num, den, ring)
        if segs[-1][0] is None:
            return self._unresolved(P, ring, "root cluster unseparated at working precision")
        num, den, _, _ = segs[-1]
        factors = self._split_at_slope(Pc, num, den, ring)
        out = []
        for Q in factors:
            out.extend(self._affine_piece(p, center, 0) for p in self.refine(Q, ring))
        return out

    # -- piece constructors / transforms ----------------------------------------

    def _cert_piece(self, ext: RingExtension, theta: RingElement) -> QlPiece:
        R = ext.ring
        return QlPiece(R.degree, R.ramification_e, R.residue_degree_f, R, theta, ext.base_image, True, self.M)

    def _affine_piece(self, piece: QlPiece, center: RingElement, a: int) -> QlPiece:
        """theta -> center + l^a * theta, mapping the center up the tower."""
        if not piece.resolved:
            return piece
        c_img = _embed(piece, center)
        scale = piece.ring.from_int(self.ell**a) if a else None
        piece.theta = c_img + (piece.theta * scale if scale is not None else piece.theta)
        return piece

    def _unresolved(self, P, ring, note) -> list[QlPiece]:
        if not self.allow_unresolved:
            raise _Escalate(note)
        deg = (len(P) - 1) * ring.degree
        return [QlPiece(deg, 0, 0, None, None, None, False, self.target_N, note=note)]

    def _unramified_descent(self, P, ring: LocalRing, wbar) -> list[QlPiece]:
        """Residual pattern w^b with deg w >= 2: pass to the unramified
        extension where w gains a root and recurse on the canonical branch."""
        ext = extend_ring(ring, [ring.lift_residue(c) for c in wbar], 1)
        ring2 = ext.ring
        field2 = ring2.residue_field
        P2 = ext.map_poly(P)
        parts2 = factor_field_poly([ring2.residue(c) for c in P2], field2)
        if len(parts2) < 2:
            return self._unresolved(P, ring, "residual factor failed to split over its own field")
        rho0 = ring2.residue(ext.root)
        rep = None
        for idx, (fac, _) in enumerate(parts2):
            if len(fac) == 2 and -fac[0] == rho0:
                rep = idx
                break
        if rep is None:
            return self._unresolved(P, ring, "canonical residual branch not found")
        lifted = hensel_coprime_parts(P2, _part_polys(parts2, field2), ring2)
        pieces = self.refine(lifted[rep], ring2)
        for piece in pieces:
            if piece.resolved:
                piece.embed_gen = _embed_elem(piece, ext.base_image)
        return pieces

    # -- slope machinery ----------------------------------------------------------

    def _split_at_slope(self, Pc, p, q, ring: LocalRing):
        """Split Pc at its rightmost slope p/q; returns factors over `ring`."""
        if q == 1:
            Q = _rescale(Pc, p, ring)
            field = ring.residue_field
            parts = factor_field_poly([ring.residue(c) for c in Q], field)
            if len(parts) < 2:
                raise CertificateError("slope substitution produced no split")
            lifted = hensel_coprime_parts(Q, _part_polys(parts, field), ring)
            return [_unscale(f, p, ring) for f in lifted]
        eis = [ring.from_int(-self.ell)] + [ring.zero] * (q - 1) + [ring.one]
        ext = extend_ring(ring, eis, q, slope=(1, q))
        E = ext.ring
        pi = ext.root
        PE = ext.map_poly(Pc)
        QE = _pi_rescale(PE, pi, p, E)
        parts = _fractional_parts(QE, q, E)
        if len(parts) < 2:
            raise CertificateError("fractional slope substitution produced no split")
        lifted = hensel_coprime_parts(QE, parts, E)
        out = []
        for f in lifted:
            out.append(_descend(_pi_unscale(f, pi, p, E), ext, ring))
        return out

    def _fractional_segment(self, P, Pc, center, p, q, ring: LocalRing) -> list[QlPiece]:
        L = len(Pc) - 1
        u = L // q
        field = ring.residue_field
        rbar = []
        for j in range(u + 1):
            c = Pc[j * q]
            want = p * (u - j)
            v = self._val(c)
            if v is None or v > want:
                rbar.append(field.zero)
            elif v == want:
                rbar.append(ring.residue(_divide_by_lambda_power(ring, c, want)))
            else:
                raise CertificateError("coefficient below the Newton segment")
        rparts = factor_field_poly(rp_normalize(rbar), field)
        if len(rparts) == 1 and rparts[0][1] == 1:
            ext = extend_ring(ring, Pc, q, slope=(p, q))
            return [self._cert_piece(ext, ext.map_base(center) + ext.root)]
        if len(rparts) >= 2 and all(m == 1 for _, m in rparts):
            out = []
            for Q in self._split_at_slope(Pc, p, q, ring):
                out.extend(self._affine_piece(piece, center, 0) for piece in self.refine(Q, ring))
            return out
        return self._unresolved(P, ring, "residual polynomial is an irreducible power (higher-order type)")


def _embed(piece: QlPiece, z: RingElement) -> RingElement:
    return _embed_elem(piece, z)


def _embed_elem(piece: QlPiece, z: RingElement) -> RingElement:
    """Image in piece.ring of an element of the refine-call's base ring."""
    acc = piece.ring.zero
    for c in reversed(z.coords):
        acc = acc * piece.embed_gen + piece.ring.from_int(c)
    return acc


def _part_polys(parts, field):
    bars = []
    for fac, mult in parts:
        q = [field.one]
        for _ in range(mult):
            q = rp_normalize(rp_mul(q, list(fac)))
        bars.append(q)
    return bars


def _rp_shift(P, c: RingElement):
    ring = c.ring
    out = [ring.zero] * len(P)
    for a in reversed(P):
        new = [ring.zero] * len(out)
        for i in range(len(out) - 1, 0, -1):
            new[i] = out[i - 1] + out[i] * c
        new[0] = out[0] * c + a
        out = new
    return out


def _rescale(Pc, a: int, ring: LocalRing):
    """Q(z) = Pc(l^a z) / l^(a L), exact integral division."""
    L = len(Pc) - 1
    out = []
    for i, c in enumerate(Pc):
        k = a * (L - i)
        out.append(c if k == 0 else _exact_div_l(ring, c, k))
    return out


def _exact_div_l(ring: LocalRing, c: RingElement, k: int) -> RingElement:
    if any(x % ring.ell**k for x in c.coords):
        raise _Escalate("coefficient not divisible during rescale")
    return ring.from_coords([x // ring.ell**k for x in c.coords])


def _unscale(Q, a: int, ring: LocalRing):
    """P(y) = l^(a deg Q) * Q(y / l^a)."""
    m = len(Q) - 1
    return [c * ring.from_int(ring.ell ** (a * (m - i))) for i, c in enumerate(Q)]


def _pi_rescale(PE, pi: RingElement, p: int, E: LocalRing):
    L = len(PE) - 1
    pw = [E.one]
    for _ in range(p * L):
        pw.append(pw[-1] * pi)
    out = []
    for i, c in enumerate(PE):
        k = p * (L - i)
        if k == 0:
            out.append(c)
            continue
        u = _divide_elem(E, c, pw[k])
        if u is None:
            raise _Escalate("pi-rescale division failed")
        out.append(u)
    return out


def _pi_unscale(Q, pi: RingElement, p: int, E: LocalRing):
    m = len(Q) - 1
    return [c * pi ** (p * (m - i)) for i, c in enumerate(Q)]


def _fractional_parts(QE, q: int, E: LocalRing):
    """Coprime residual parts of Q-bar = z^m0 * S(z^q), grouped so that every
    part descends to the base (never split inside an S-irreducible)."""
    field = E.residue_field
    qbar = rp_normalize([E.residue(c) for c in QE])
    m0 = 0
    while m0 < len(qbar) and qbar[m0].is_zero:
        m0 += 1
    rest = qbar[m0:]
    sbar = []
    for i, c in enumerate(rest):
        if i % q == 0:
            sbar.append(c)
        elif not c.is_zero:
            raise CertificateError("residual support is not on the slope lattice")
    parts = []
    if m0:
        parts.append([field.zero] * m0 + [field.one])
    for fac, mult in factor_field_poly(sbar, field):
        spread = _spread_poly(list(fac), q, field)
        part = [field.one]
        for _ in range(mult):
            part = rp_normalize(rp_mul(part, spread))
        parts.append(part)
    return parts


def _spread_poly(fac, q: int, field):
    out = [field.zero] * ((len(fac) - 1) * q + 1)
    for i, c in enumerate(fac):
        out[i * q] = c
    return out


def _descend(g, ext: RingExtension, ring: LocalRing):
    """Project a polynomial over the extension back to base coefficients."""
    basis = []
    cur = ext.ring.one
    for _ in range(ring.degree):
        basis.append(list(cur.coords))
        cur = cur * ext.base_image
    out = []
    for c in g:
        sol = linalg.solve_left(basis, list(c.coords), ext.ring.ell, ext.ring.precision)
        if sol is None:
            raise _Escalate("factor does not descend to the base ring at working precision")
        out.append(ring.from_coords(sol))
    return out


def _divide_by_lambda_power(ring: LocalRing, c: RingElement, k: int) -> RingElement:
    pw = ring.one
    for _ in range(k):
        pw = pw * ring.uniformizer
    out = _divide_elem(ring, c, pw)
    if out is None:
        raise _Escalate("lambda-power division failed")
    return out


# ---------------------------------------------------------------------------
# top level


def disc_valuation(h: list[int], ell: int) -> int:
    """v_l of Res(h, h') from the exact Sylvester determinant."""
    n = len(h) - 1
    hp = [i * c for i, c in enumerate(h)][1:]
    m = n - 1
    size = n + m
    rows = []
    for i in range(m):
        row = [0] * size
        for j, c in enumerate(reversed(h)):
            row[i + j] = c
        rows.append(row)
    for i in range(n):
        row = [0] * size
        for j, c in enumerate(reversed(hp)):
            row[i + j] = c
        rows.append(row)
    det = _int_det(rows)
    if det == 0:
        raise ValueError("polynomial is not squarefree")
    return int_val(det, ell)


def _int_det(rows) -> int:
    n = len(rows)
    m = [[Fraction(x) for x in r] for r in rows]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(col + 1, n):
            if m[r][col]:
                c = m[r][col]
                m[r] = [v - c * w for v, w in zip(m[r], m[col])]
    assert det.denominator == 1
    return int(det)


def qell_factor(h: list[int], ell: int, N: int, cap: int | None = None) -> tuple[list[QlPiece], int]:
    """Q_l-irreducible pieces of a monic squarefree integer polynomial.

    Returns (pieces, M): resolved pieces carry rings at working precision
    M >= N.  Precision escalates from the exact integers until certificates
    hold or `cap` (normalized units) is reached; blocks still ambiguous at
    the cap come back flagged unresolved.
    """
    h = [int(c) for c in h]
    if not h or h[-1] != 1:
        raise ValueError("expected a monic polynomial")
    deg = len(h) - 1
    if deg == 0:
        return [], N
    if deg == 1:
        ring = make_ring(ell, N, [0, 1], 1)
        return [QlPiece(1, 1, 1, ring, ring.from_int(-h[0]), ring.gen, True, N)], N
    delta = disc_valuation(h, ell)
    M = N + 2 * delta + 4
    cap = cap if cap is not None else max(8 * M, 64)
    while True:
        try:
            return _factor_at(h, ell, M, N, delta, allow_unresolved=False), M
        except _Escalate:
            if 2 * M > cap:
                break
            M *= 2
    M = min(M, cap)
    return _factor_at(h, ell, M, N, delta, allow_unresolved=True), M


def _factor_at(h, ell, M, N, delta, allow_unresolved):
    refiner = _Refiner(ell, M, N, allow_unresolved)
    ring = refiner.base0
    pieces = refiner.refine(rp_from_ints(ring, h), ring)
    total = sum(p.degree for p in pieces)
    if total != len(h) - 1:
        raise CertificateError(f"piece degrees sum to {total}, expected {len(h) - 1}")
    for p in pieces:
        if not p.resolved:
            continue
        residue = rp_eval(rp_from_ints(p.ring, h), p.theta)
        if residue.is_zero:
            p.attained_N = M
            continue
        # theta may be a cluster approximation: certify it to the target
        # precision through v(h(theta)) >= N + v_l(disc)
        v = p.ring.valuation(residue)
        if v.value < N + delta:
            raise _Escalate("piece root fails to satisfy the input at target precision")
        p.attained_N = N
    pieces.sort(key=QlPiece.sort_key)
    return pieces
