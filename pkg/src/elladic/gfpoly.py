"""Dense univariate polynomial arithmetic over F_p, plus factorization.

Polynomials are coefficient lists low -> high with no trailing zeros; the
empty list is the zero polynomial.  Factorization (over F_p and over Z) is
delegated to sympy, whose canonically sorted factor lists keep the output
deterministic; everything else is hand-rolled so the hot paths stay cheap.
"""

from __future__ import annotations

from sympy import GF, Poly, Symbol, ZZ

from .linalg import identity, inv_mod, mat_add, mat_mul, mat_scale

_X = Symbol("x")


def normalize(coeffs, p: int) -> list[int]:
    out = [c % p for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return out


def degree(f) -> int:
    """Degree, with deg 0 = -1 by the usual convention."""
    return len(f) - 1


def is_monic(f) -> bool:
    return bool(f) and f[-1] == 1


def add(f, g, p: int):
    n = max(len(f), len(g))
    out = [((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)) % p for i in range(n)]
    return normalize(out, p)


def sub(f, g, p: int):
    n = max(len(f), len(g))
    out = [((f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)) % p for i in range(n)]
    return normalize(out, p)


def mul(f, g, p: int):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return normalize(out, p)


def scale(f, c: int, p: int):
    return normalize([c * a for a in f], p)


def shift_pow(f, k: int):
    """Multiply by x^k."""
    return [0] * k + list(f) if f else []


def divmod_poly(f, g, p: int):
    """(q, r) with f = q g + r, deg r < deg g; g must be nonzero."""
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    inv = inv_mod(g[-1], p)
    r = [c % p for c in f]
    q = [0] * max(len(f) - len(g) + 1, 0)
    while len(r) >= len(g) and any(r):
        while r and r[-1] == 0:
            r.pop()
        if len(r) < len(g):
            break
        c = (r[-1] * inv) % p
        d = len(r) - len(g)
        q[d] = c
        for i, a in enumerate(g):
            r[d + i] = (r[d + i] - c * a) % p
        r.pop()
    return normalize(q, p), normalize(r, p)


def gcd(f, g, p: int):
    a, b = normalize(f, p), normalize(g, p)
    while b:
        a, b = b, divmod_poly(a, b, p)[1]
    if a:
        a = scale(a, inv_mod(a[-1], p), p)
    return a


def xgcd(f, g, p: int):
    """(d, s, t) with s f + t g = d, d monic (or zero)."""
    a, b = normalize(f, p), normalize(g, p)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while b:
        q, r = divmod_poly(a, b, p)
        a, b = b, r
        s0, s1 = s1, sub(s0, mul(q, s1, p), p)
        t0, t1 = t1, sub(t0, mul(q, t1, p), p)
    if a:
        c = inv_mod(a[-1], p)
        a, s0, t0 = scale(a, c, p), scale(s0, c, p), scale(t0, c, p)
    return a, s0, t0


def eval_at(f, x: int, p: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % p
    return acc


def eval_matrix(f, m, mod: int):
    """Evaluate the polynomial at a square matrix, entries mod `mod`."""
    n = len(m)
    acc = [[0] * n for _ in range(n)]
    for c in reversed(f):
        acc = mat_mul(acc, m, mod)
        if c:
            acc = mat_add(acc, mat_scale(identity(n), c), mod)
    return acc


def powmod(f, e: int, modpoly, p: int):
    result = [1]
    base = divmod_poly(f, modpoly, p)[1]
    while e:
        if e & 1:
            result = divmod_poly(mul(result, base, p), modpoly, p)[1]
        base = divmod_poly(mul(base, base, p), modpoly, p)[1]
        e >>= 1
    return result


def derivative(f, p: int):
    return normalize([(i * c) % p for i, c in enumerate(f)][1:], p)


# ---------------------------------------------------------------------------
# factorization (sympy-backed; output canonically re-sorted)


def factor_fp(f, p: int) -> list[tuple[tuple[int, ...], int]]:
    """Monic irreducible factorization over F_p: [(coeffs low->high, mult)]."""
    f = normalize(f, p)
    if degree(f) < 1:
        return []
    poly = Poly(list(reversed(f)), _X, domain=GF(p))
    _, factors = poly.factor_list()
    out = []
    for fac, mult in factors:
        coeffs = [int(c) % p for c in reversed(fac.all_coeffs())]
        coeffs = normalize(coeffs, p)
        if coeffs[-1] != 1:
            coeffs = scale(coeffs, inv_mod(coeffs[-1], p), p)
        out.append((tuple(coeffs), int(mult)))
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out


def is_irreducible_fp(f, p: int) -> bool:
    fac = factor_fp(f, p)
    return len(fac) == 1 and fac[0][1] == 1


def roots_fp(f, p: int) -> list[int]:
    """All roots in F_p (by factoring; exhaustive only as a last resort)."""
    return sorted(((-fac[0]) % p) for fac, mult in factor_fp(f, p) if len(fac) == 2)


def factor_int(f) -> list[tuple[tuple[int, ...], int]]:
    """Irreducible factorization over Q of a monic integer polynomial.

    Returns [(monic-or-primitive integer coeffs low->high, mult)], sorted.
    For monic input every factor comes out monic.
    """
    if len(f) < 2:
        return []
    poly = Poly(list(reversed([int(c) for c in f])), _X, domain=ZZ)
    _, factors = poly.factor_list()
    out = []
    for fac, mult in factors:
        coeffs = [int(c) for c in reversed(fac.all_coeffs())]
        if coeffs[-1] < 0:
            coeffs = [-c for c in coeffs]
        out.append((tuple(coeffs), int(mult)))
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out


# ---------------------------------------------------------------------------
# CRT idempotent polynomials


def crt_idempotent_polys(parts, p: int) -> list[list[int]]:
    """For pairwise coprime monic parts q_1..q_k with product m, return
    polynomials phi_i with phi_i = 1 mod q_i, 0 mod q_j (j != i), mod m."""
    m = [1]
    for q in parts:
        m = mul(m, q, p)
    out = []
    for q in parts:
        u, _ = divmod_poly(m, q, p)
        d, s, _ = xgcd(u, q, p)
        if d != [1]:
            raise ValueError("parts are not pairwise coprime")
        phi = divmod_poly(mul(u, s, p), m, p)[1]
        out.append(phi)
    return out
