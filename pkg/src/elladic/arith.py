"""Small exact integer helpers shared across the package.

Everything here is plain `int` arithmetic; nothing ever goes through floats.
"""

from __future__ import annotations


def is_prime(n: int) -> bool:
    """Trial-division primality check (desk scale)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_up_to(bound: int) -> list[int]:
    """All primes p <= bound, by sieve."""
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, int(bound**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = b"\x00" * len(range(p * p, bound + 1, p))
    return [p for p in range(2, bound + 1) if sieve[p]]


def factorize(n: int) -> list[tuple[int, int]]:
    """Trial-division factorization of n >= 1 as [(prime, exponent), ...]."""
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out = []
    for p in range(2, n + 1):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        out.append((n, 1))
    return out


def int_val(x: int, ell: int) -> int:
    """ell-adic valuation of a nonzero integer."""
    if x == 0:
        raise ValueError("valuation of 0 is not a finite integer")
    v = 0
    while x % ell == 0:
        x //= ell
        v += 1
    return v


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)
