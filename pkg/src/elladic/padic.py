"""Exact arithmetic in Z/l^N and finite local extensions O/lambda^w.

A ring is presented by a single monic defining polynomial g over Z/l^N with
a declared ramification index e (so deg g = e*f).  Elements are coefficient
vectors in the power basis; all arithmetic is polynomial arithmetic modulo
(g, l^N), with explicit valuation semantics normalised so v(l) = 1.

Zero at working precision is always reported as an "at least" valuation,
never as an exact one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from . import gfpoly, linalg
from .arith import ceil_div, int_val, is_prime
from .errors import CertificateError, PrecisionError, RingConstructionError


@dataclass(frozen=True)
class PrimePower:
    """The coefficient ring Z/ell^precision_N."""

    ell: int
    precision_N: int

    def __post_init__(self):
        if not is_prime(self.ell):
            raise RingConstructionError(f"{self.ell} is not prime")
        if self.precision_N < 1:
            raise RingConstructionError("precision must be >= 1")

    @property
    def modulus(self) -> int:
        return self.ell**self.precision_N


@dataclass(frozen=True)
class Valuation:
    """A normalised valuation (v(ell) = 1), exact or an at-least sentinel.

    Exact values lie in [0, N) with denominator dividing the ramification
    index; the at-least kind marks zero at working precision and always
    carries the precision itself as its value.
    """

    kind: str  # "exact" | "at-least"
    value: Fraction

    @staticmethod
    def exact(v) -> "Valuation":
        return Valuation("exact", Fraction(v))

    @staticmethod
    def at_least(v) -> "Valuation":
        return Valuation("at-least", Fraction(v))

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def lambda_units(self, e: int) -> int:
        u = self.value * e
        if u.denominator != 1:
            raise ValueError(f"valuation {self.value} is not integral in lambda-units for e={e}")
        return int(u)

    def __le__(self, other: "Valuation") -> bool:
        return self.value <= other.value

    def __lt__(self, other: "Valuation") -> bool:
        return self.value < other.value

    def __str__(self) -> str:
        return f"{'>=' if self.kind == 'at-least' else ''}{self.value}"


def min_valuation(vals) -> Valuation:
    vals = list(vals)
    if not vals:
        raise ValueError("min of no valuations")
    best = vals[0]
    for v in vals[1:]:
        if v.value < best.value or (v.value == best.value and v.is_exact and not best.is_exact):
            best = v
    return best


def quotient_exponent(e: int, m: int) -> int:
    """Lambda-adic precision w = e(m-1)+1 making O/lambda^w extend Z/l^m."""
    if e < 1 or m < 1:
        raise ValueError("e and m must be positive")
    return e * (m - 1) + 1


@dataclass(frozen=True)
class RingElement:
    """An element of a LocalRing, as a coefficient tuple in the power basis."""

    ring: "LocalRing"
    coords: tuple[int, ...]

    def __add__(self, other):
        other = self.ring.coerce(other)
        return self.ring.from_coords([a + b for a, b in zip(self.coords, other.coords)])

    __radd__ = __add__

    def __sub__(self, other):
        other = self.ring.coerce(other)
        return self.ring.from_coords([a - b for a, b in zip(self.coords, other.coords)])

    def __rsub__(self, other):
        return self.ring.coerce(other) - self

    def __mul__(self, other):
        other = self.ring.coerce(other)
        return self.ring._mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.ring.from_coords([-a for a in self.coords])

    def __pow__(self, k: int):
        if k < 0:
            return self.ring.invert(self) ** (-k)
        result = self.ring.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return isinstance(other, RingElement) and self.ring.key == other.ring.key and self.coords == other.coords

    def __hash__(self):
        return hash((self.ring.key, self.coords))

    @property
    def is_zero(self) -> bool:
        return not any(self.coords)

    def valuation(self) -> Valuation:
        return self.ring.valuation(self)

    def __repr__(self):
        return f"RingElement({list(self.coords)} in {self.ring})"


class LocalRing:
    """The finite coefficient ring Z/l^N[x]/(g(x)) with ramification index e.

    The trivial presentation g = x - 0, e = f = 1 is Z/l^N itself.  Use
    :func:`make_ring` to construct validated instances.
    """

    def __init__(self, base: PrimePower, poly: tuple[int, ...], e: int, uniformizer_coords: tuple[int, ...]):
        self.base = base
        self.poly = poly
        self.ramification_e = e
        self.degree = len(poly) - 1
        self.residue_degree_f = self.degree // e
        self.key = (base.ell, base.precision_N, poly, e)
        self._red_table = self._build_reduction_table()
        self.uniformizer = RingElement(self, tuple(c % base.modulus for c in uniformizer_coords))
        self._pi_filtration: list | None = None

    # -- construction helpers ------------------------------------------------

    @property
    def ell(self) -> int:
        return self.base.ell

    @property
    def precision(self) -> int:
        return self.base.precision_N

    @property
    def modulus(self) -> int:
        return self.base.modulus

    @property
    def lambda_precision(self) -> int:
        """Working precision in lambda-units: the ring is O/lambda^(e*N)."""
        return self.ramification_e * self.base.precision_N

    @property
    def is_base_ring(self) -> bool:
        return self.degree == 1 and self.ramification_e == 1

    @cached_property
    def residual_poly(self) -> tuple[int, ...]:
        """The irreducible p with g = p^e mod l."""
        fac = gfpoly.factor_fp(list(self.poly), self.ell)
        return fac[0][0]

    def _build_reduction_table(self):
        # red[k] = coefficients of x^(deg + k) reduced mod (g, l^N)
        mod = self.base.modulus
        deg = self.degree
        top = [(-c) % mod for c in self.poly[:-1]]
        table = [tuple(top)]
        for _ in range(1, deg - 1 if deg > 1 else 0):
            prev = table[-1]
            shifted = [0] + list(prev[:-1])
            carry = prev[-1]
            if carry:
                shifted = [(a + carry * b) % mod for a, b in zip(shifted, top)]
            table.append(tuple(x % mod for x in shifted))
        return table

    # -- element constructors ------------------------------------------------

    def from_coords(self, coords) -> RingElement:
        mod = self.base.modulus
        c = [x % mod for x in coords]
        if len(c) != self.degree:
            raise ValueError(f"expected {self.degree} coordinates, got {len(c)}")
        return RingElement(self, tuple(c))

    def from_int(self, n: int) -> RingElement:
        return self.from_coords([n] + [0] * (self.degree - 1))

    def coerce(self, x) -> RingElement:
        if isinstance(x, RingElement):
            if x.ring.key != self.key:
                raise ValueError("element belongs to a different ring")
            return x
        if isinstance(x, int):
            return self.from_int(x)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self}")

    @cached_property
    def zero(self) -> RingElement:
        return self.from_int(0)

    @cached_property
    def one(self) -> RingElement:
        return self.from_int(1)

    @cached_property
    def gen(self) -> RingElement:
        if self.degree == 1:
            return self.from_int((-self.poly[0]) % self.modulus)
        return self.from_coords([0, 1] + [0] * (self.degree - 2))

    # -- arithmetic ------------------------------------------------------------

    def _mul(self, a: RingElement, b: RingElement) -> RingElement:
        mod = self.base.modulus
        deg = self.degree
        if deg == 1:
            return RingElement(self, ((a.coords[0] * b.coords[0]) % mod,))
        prod = [0] * (2 * deg - 1)
        for i, x in enumerate(a.coords):
            if x:
                for j, y in enumerate(b.coords):
                    prod[i + j] += x * y
        out = [c % mod for c in prod[:deg]]
        for k in range(deg, 2 * deg - 1):
            c = prod[k] % mod
            if c:
                red = self._red_table[k - deg]
                out = [(u + c * v) % mod for u, v in zip(out, red)]
        return RingElement(self, tuple(out))

    def mult_matrix(self, z: RingElement) -> list[list[int]]:
        """Matrix of multiplication by z on the power basis (row convention:
        row i = coordinates of z * x^i)."""
        rows = []
        cur = z
        for i in range(self.degree):
            rows.append(list(cur.coords))
            if i + 1 < self.degree:
                cur = self._mul(cur, self.gen) if self.degree > 1 else cur
        return rows

    def invert(self, z: RingElement) -> RingElement:
        """Inverse of a unit; raises ZeroDivisionError for non-units."""
        ell, N = self.ell, self.precision
        zbar = gfpoly.normalize(list(z.coords), ell)
        gbar = gfpoly.normalize(list(self.poly), ell)
        d, s, _ = gfpoly.xgcd(zbar, gbar, ell)
        if d != [1]:
            raise ZeroDivisionError("element is not a unit")
        w = self.from_coords(s + [0] * (self.degree - len(s)))
        steps = max(1, (N - 1).bit_length())
        for _ in range(steps):
            w = w * (self.from_int(2) - z * w)
        if not (z * w == self.one):
            raise CertificateError("unit inversion failed to converge")
        return w

    def divide_exact(self, z: RingElement, ell_power: int) -> RingElement:
        """One w with l^k * w = z (requires l^k | z coordinate-wise)."""
        if any(c % self.ell**ell_power for c in z.coords):
            raise ValueError("element is not divisible by the requested power of l")
        return self.from_coords([c // self.ell**ell_power for c in z.coords])

    # -- residue field ----------------------------------------------------------

    @cached_property
    def residue_field(self) -> "LocalRing":
        """F_{l^f} = F_l[x]/(p), itself a LocalRing at precision 1."""
        if self.residue_degree_f == 1 and self.precision == 1 and self.ramification_e == 1:
            return self
        p = self.residual_poly
        return LocalRing(PrimePower(self.ell, 1), p, 1, tuple([0] * (len(p) - 1)))

    def residue(self, z: RingElement) -> RingElement:
        """Image of z in the residue field."""
        k = self.residue_field
        zbar = gfpoly.normalize(list(z.coords), self.ell)
        rem = gfpoly.divmod_poly(zbar, list(self.residual_poly), self.ell)[1]
        return k.from_coords(rem + [0] * (k.degree - len(rem)))

    def lift_residue(self, r: RingElement) -> RingElement:
        """A representative lift of a residue-field element."""
        coords = list(r.coords) + [0] * (self.degree - len(r.coords))
        return self.from_coords(coords)

    # -- valuation ---------------------------------------------------------------

    def _filtration(self):
        if self._pi_filtration is None:
            ell, N = self.ell, self.precision
            mods = []
            pk = self.one
            for _ in range(self.lambda_precision + 1):
                rows = [list(self._mul(pk, self.from_coords(_unit_vec(self.degree, i))).coords) for i in range(self.degree)]
                mods.append(linalg.howell(rows, ell, N))
                pk = pk * self.uniformizer
            self._pi_filtration = mods
        return self._pi_filtration

    def valuation(self, z: RingElement) -> Valuation:
        e, N = self.ramification_e, self.precision
        if z.is_zero:
            return Valuation.at_least(N)
        if e == 1:
            v = min(int_val(c, self.ell) for c in z.coords if c)
            return Valuation.exact(v)
        mods = self._filtration()
        vec = list(z.coords)
        # z != 0, so v(z) in [0, e*N); membership in (pi^k) is monotone in k
        lo, hi = 0, self.lambda_precision
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if linalg.in_span(vec, mods[mid], self.ell, N):
                lo = mid
            else:
                hi = mid
        return Valuation.exact(Fraction(lo, e))

    # -- misc ----------------------------------------------------------------------

    def reduce_precision(self, new_N: int) -> "LocalRing":
        """The same presentation at a lower precision."""
        if new_N > self.precision:
            raise ValueError("can only reduce precision")
        if new_N == self.precision:
            return self
        mod = self.ell**new_N
        return LocalRing(
            PrimePower(self.ell, new_N),
            tuple(c % mod for c in self.poly),
            self.ramification_e,
            tuple(c % mod for c in self.uniformizer.coords),
        )

    def map_to(self, other: "LocalRing", z: RingElement) -> RingElement:
        """Map z into a lower-precision copy of the same presentation."""
        return other.from_coords(list(z.coords))

    def __repr__(self):
        if self.is_base_ring:
            return f"Z/{self.ell}^{self.precision}"
        return f"Z/{self.ell}^{self.precision}[x]/(deg {self.degree}, e={self.ramification_e})"

    def __eq__(self, other):
        return isinstance(other, LocalRing) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


def _unit_vec(n: int, i: int) -> list[int]:
    v = [0] * n
    v[i] = 1
    return v


# ---------------------------------------------------------------------------
# ring construction


def make_ring(
    ell: int,
    N: int,
    poly,
    e: int,
    uniformizer=None,
) -> LocalRing:
    """Construct and validate a LocalRing Z/l^N[x]/(g) with ramification e.

    The reduction of g mod l must be p^e for a single irreducible p of degree
    deg(g)/e.  A uniformizer (element of normalised valuation 1/e) is derived
    for unramified and totally ramified presentations; for mixed (e > 1 and
    f > 1) rings a deterministic search is attempted and a `uniformizer` hint
    (coordinate list) is accepted.
    """
    base = PrimePower(ell, N)
    mod = base.modulus
    g = [c % mod for c in poly]
    if len(g) < 2:
        raise RingConstructionError("defining polynomial must have degree >= 1")
    if g[-1] != 1:
        raise RingConstructionError("defining polynomial must be monic")
    deg = len(g) - 1
    if e < 1 or deg % e:
        raise RingConstructionError(f"ramification index {e} does not divide the degree {deg}")
    f = deg // e

    fac = gfpoly.factor_fp(g, ell)
    if len(fac) != 1:
        raise RingConstructionError(
            f"inconsistent split: g factors into {len(fac)} coprime parts mod {ell}, expected a single irreducible power"
        )
    pbar, mult = fac[0]
    if mult != e or len(pbar) - 1 != f:
        raise RingConstructionError(
            f"inconsistent split: g = p^{mult} with deg p = {len(pbar) - 1} mod {ell}, expected e={e}, f={f}"
        )

    ring = LocalRing(base, tuple(g), e, tuple([0] * deg))  # uniformizer patched below
    if e == 1:
        pi = ring.from_int(ell)
    elif uniformizer is not None:
        pi = ring.from_coords(list(uniformizer))
        _validate_uniformizer(ring, pi)
    elif f == 1:
        pi = _totally_ramified_uniformizer(ring, pbar)
    else:
        pi = _mixed_uniformizer(ring, pbar)
    ring.uniformizer = pi
    ring._pi_filtration = None
    return ring


def _norm_val(ring: LocalRing, z: RingElement) -> int:
    """l-valuation of Norm(z), or raises PrecisionError when it overflows."""
    m = ring.mult_matrix(z)
    cp = linalg.charpoly(m, ring.modulus)
    det = cp[0] if ring.degree % 2 == 0 else (-cp[0]) % ring.modulus
    if det == 0:
        raise PrecisionError("norm vanishes at working precision")
    return int_val(det, ring.ell)


def _validate_uniformizer(ring: LocalRing, pi: RingElement):
    e, f = ring.ramification_e, ring.residue_degree_f
    nv = _norm_val(ring, pi)
    if nv != f:
        raise RingConstructionError(
            f"claimed uniformizer has normalised valuation {Fraction(nv, e * f)}, expected 1/{e}"
        )


def _totally_ramified_uniformizer(ring: LocalRing, pbar) -> RingElement:
    ell, N, deg = ring.ell, ring.precision, ring.degree
    c = (-pbar[0]) % ell
    # shift: h(y) = g(y + c); single Newton segment of slope a/deg, gcd(a, deg) = 1
    h = _int_poly_shift(list(ring.poly), c, ring.modulus)
    if h[0] == 0:
        raise RingConstructionError("shifted polynomial vanishes at working precision; cannot certify ramification")
    a = int_val(h[0], ell)
    for i in range(1, deg):
        need = ceil_div(a * (deg - i), deg)
        if h[i] and int_val(h[i], ell) < need:
            raise RingConstructionError("defining polynomial is not totally ramified (Newton polygon breaks)")
    from math import gcd as _gcd

    if _gcd(a, deg) != 1:
        raise RingConstructionError(
            f"inconsistent split: generator valuation {a}/{deg} is not primitive; the quotient is not a field order"
        )
    s = pow(a, -1, deg)
    t = (1 - s * a) // deg  # <= 0
    xshift = ring.gen - ring.from_int(c)
    zs = xshift**s
    return ring.divide_exact(zs, -t)


def _mixed_uniformizer(ring: LocalRing, pbar) -> RingElement:
    # lift the unramified generator, then treat x - zeta as the ramified direction
    zeta = _lift_residual_root(ring, pbar)
    cand = ring.gen - zeta
    e, f = ring.ramification_e, ring.residue_degree_f
    try:
        nv = _norm_val(ring, cand)
    except PrecisionError as exc:
        raise RingConstructionError("cannot derive a uniformizer at this precision; pass one explicitly") from exc
    frac = Fraction(nv, e * f)
    a, q = frac.numerator, frac.denominator
    if q != e:
        raise RingConstructionError(
            f"inconsistent split: ramified direction has valuation {frac}, incompatible with e={e}"
        )
    s = pow(a, -1, e)
    t = (1 - s * a) // e
    return ring.divide_exact(cand**s, -t)


def _lift_residual_root(ring: LocalRing, pbar) -> RingElement:
    """Hensel-lift the residual root x of p inside the ring (p separable)."""
    ell = ring.ell
    p_elems = [ring.from_int(c) for c in pbar]
    z = ring.gen
    dp = rp_derivative(p_elems)
    for _ in range(max(1, (ring.lambda_precision).bit_length() + 1)):
        fz = rp_eval(p_elems, z)
        if fz.is_zero:
            return z
        z = z - fz * ring.invert(rp_eval(dp, z))
    if not rp_eval(p_elems, z).is_zero:
        raise CertificateError("residual root lifting did not converge")
    return z


def _int_poly_shift(coeffs: list[int], c: int, mod: int) -> list[int]:
    """g(x + c) mod `mod`, coefficients low -> high."""
    out = [0] * len(coeffs)
    for a in reversed(coeffs):
        carry = 0
        # multiply out by (x + c): out' = out * x + out * c, then add a
        new = [0] * len(out)
        for i in range(len(out) - 1, 0, -1):
            new[i] = (out[i - 1] + out[i] * c) % mod
        new[0] = (out[0] * c + a) % mod
        out = new
    return out


# ---------------------------------------------------------------------------
# polynomials with RingElement coefficients (low -> high)


def rp_from_ints(ring: LocalRing, coeffs) -> list[RingElement]:
    return [ring.from_int(int(c)) for c in coeffs]


def rp_normalize(f: list[RingElement]) -> list[RingElement]:
    out = list(f)
    while out and out[-1].is_zero:
        out.pop()
    return out


def rp_eval(f, z: RingElement) -> RingElement:
    acc = z.ring.zero
    for c in reversed(f):
        acc = acc * z + c
    return acc


def rp_derivative(f):
    return [i * c for i, c in enumerate(f)][1:]


def rp_add(f, g):
    n = max(len(f), len(g))
    ring = (f or g)[0].ring
    z = ring.zero
    return [(f[i] if i < len(f) else z) + (g[i] if i < len(g) else z) for i in range(n)]


def rp_sub(f, g):
    n = max(len(f), len(g))
    ring = (f or g)[0].ring
    z = ring.zero
    return [(f[i] if i < len(f) else z) - (g[i] if i < len(g) else z) for i in range(n)]


def rp_mul(f, g):
    if not f or not g:
        return []
    ring = f[0].ring
    out = [ring.zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if not a.is_zero:
            for j, b in enumerate(g):
                out[i + j] = out[i + j] + a * b
    return out


def rp_divmod(f, g):
    """Division by a polynomial with unit leading coefficient."""
    ring = g[-1].ring
    ginv = ring.invert(g[-1])
    r = list(f)
    q = [ring.zero] * max(len(f) - len(g) + 1, 0)
    while len(rp_normalize(r)) >= len(g):
        r = rp_normalize(r)
        c = r[-1] * ginv
        d = len(r) - len(g)
        q[d] = q[d] + c
        for i, a in enumerate(g):
            r[d + i] = r[d + i] - c * a
        r = r[:-1]
    return q, rp_normalize(r)


# ---------------------------------------------------------------------------
# Hensel root lifting (Newton with an explicit Bezout certificate)


def hensel_lift_root(f, a0: RingElement, cert) -> RingElement:
    """Lift an approximate root a0 of f to an exact root at full precision.

    `f` is a polynomial over the ring (list of RingElements, low -> high);
    `cert` is a pair (a, b) with 1 = a*f + b*f' in R[X] (a may be a constant).
    The Newton step a_n = a_{n-1} - f(a_{n-1}) b(a_{n-1}) at least doubles the
    valuation of f(a_n) each iteration.
    """
    ring = a0.ring
    a_poly, b_poly = cert
    if isinstance(a_poly, RingElement):
        a_poly = [a_poly]
    if isinstance(b_poly, RingElement):
        b_poly = [b_poly]
    fprime = rp_derivative(f)
    ident = rp_normalize(rp_add(rp_mul(a_poly, f), rp_mul(b_poly, fprime)))
    if not (len(ident) == 1 and ident[0] == ring.one):
        raise ValueError("invalid Bezout certificate: a*f + b*f' != 1 at working precision")

    fa = rp_eval(f, a0)
    if fa.is_zero:
        return a0
    v0 = ring.valuation(fa)
    r = v0.lambda_units(ring.ramification_e)
    if r < 1:
        raise ValueError("f(a0) must have positive valuation")
    w = ring.lambda_precision
    max_steps = max(1, ceil_div(w, r).bit_length() + 1)
    a = a0
    for _ in range(max_steps):
        fa = rp_eval(f, a)
        if fa.is_zero:
            return a
        a = a - fa * rp_eval(b_poly, a)
    if not rp_eval(f, a).is_zero:
        raise CertificateError("Hensel iteration failed to converge within the certified bound")
    return a
