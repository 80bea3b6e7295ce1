"""Genuine weight-2 level-11 Hecke data from an elliptic-curve point count.

The curve y^2 + y = x^3 - x^2 - 10x - 20 has conductor 11; its Frobenius
traces a_p = p + 1 - #E(F_p) (p - #E_ns(F_p) at the bad prime 11) are the
Hecke eigenvalues of the unique weight-2 newform of level 11, so the
generated HMAT file carries real modular data without a modular-symbols
engine.  The count is a direct brute-force loop over F_p x F_p, which keeps
it independent of the character-sum shortcut used in the tests.
"""

from __future__ import annotations

from .arith import primes_up_to
from .orbits import HeckeSpace

# y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6
CURVE_11A = (0, -1, 1, -10, -20)
LEVEL = 11
WEIGHT = 2


def smooth_affine_points(p: int, curve=CURVE_11A) -> int:
    """Number of affine F_p-points where the curve is smooth."""
    a1, a2, a3, a4, a6 = curve
    count = 0
    for x in range(p):
        for y in range(p):
            f = (y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6)) % p
            if f:
                continue
            # partial derivatives: smooth unless both vanish
            fy = (2 * y + a1 * x + a3) % p
            fx = (a1 * y - (3 * x * x + 2 * a2 * x + a4)) % p
            if fy == 0 and fx == 0:
                continue
            count += 1
    return count


def trace_of_frobenius(p: int, curve=CURVE_11A, level: int = LEVEL) -> int:
    """a_p from the point count; p - #E_ns at the bad prime."""
    pts = smooth_affine_points(p, curve) + 1  # plus the point at infinity
    if level % p == 0:
        return p - pts
    return p + 1 - pts


def hecke_eigenvalues(bound: int, curve=CURVE_11A, level: int = LEVEL) -> dict[int, int]:
    """a_n for 1 <= n <= bound via the weight-2 Hecke recursions."""
    a = {1: 1}
    for p in primes_up_to(bound):
        a[p] = trace_of_frobenius(p, curve, level)
        pk = p * p
        while pk <= bound:
            below = a[pk // p]
            lower = a[pk // (p * p)]
            if level % p == 0:
                a[pk] = a[p] * below
            else:
                a[pk] = a[p] * below - p * lower
            pk *= p
    for n in range(2, bound + 1):
        if n in a:
            continue
        m = _coprime_split(n)
        a[n] = a[m] * a[n // m]
    return a


def _coprime_split(n: int) -> int:
    """The largest prime-power factor of a composite n (coprime to the rest)."""
    p = next(q for q in range(2, n + 1) if n % q == 0)
    m = 1
    while n % p == 0:
        m *= p
        n //= p
    return m


def level11_space(bound: int) -> HeckeSpace:
    """The level-11 weight-2 Hecke space as 1 x 1 integer matrices."""
    a = hecke_eigenvalues(bound)
    matrices = {n: [[a[n]]] for n in range(1, bound + 1)}
    return HeckeSpace(
        LEVEL,
        WEIGHT,
        1,
        bound,
        matrices,
        provenance="point counts on y^2 + y = x^3 - x^2 - 10x - 20",
    )
