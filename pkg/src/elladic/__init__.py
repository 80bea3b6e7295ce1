"""Exact l-adic decomposition of Hecke algebras and congruences mod prime powers."""

__version__ = "0.1.0"

from .padic import (  # noqa: F401
    LocalRing,
    PrimePower,
    RingElement,
    Valuation,
    hensel_lift_root,
    make_ring,
    quotient_exponent,
)
