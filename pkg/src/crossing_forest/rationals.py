"""Exact rational arithmetic helpers shared by every module.

gmpy2's mpq is used when available (roughly an order of magnitude faster
than fractions.Fraction on small operands); everything degrades to the
stdlib transparently.  All public values print as "p" or "p/q".
"""
from __future__ import annotations

import decimal
import hashlib
import math
from fractions import Fraction

try:
    from gmpy2 import mpq as _rat
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _rat = Fraction

_MASK64 = (1 << 64) - 1


def Q(num=0, den=None):
    """Build an exact rational from ints, rationals or strings.

    Strings may be "p/q" or decimal ("0.25", "1e-3").  Floats are refused:
    binary floats silently misrepresent decimal inputs.
    """
    if den is not None:
        return _rat(num, den)
    if isinstance(num, float):
        raise TypeError("refusing float %r; pass a string or a rational" % num)
    if isinstance(num, str):
        if "/" in num:
            return _rat(Fraction(num))
        return _rat(Fraction(decimal.Decimal(num)))
    return _rat(num)


ZERO = Q(0)
ONE = Q(1)


def q_str(q) -> str:
    """Canonical "p/q" (or "p") rendering, used in reports and LP dumps."""
    return str(q)


def sqrt_floor_bits(q, bits: int = 60):
    """floor(sqrt(q) * 2**bits) / 2**bits for a nonnegative rational q.

    Deterministic fixed-precision stand-in for irrational Euclidean lengths;
    the precision is recorded alongside any output that depends on it.
    """
    num = int(q.numerator)
    den = int(q.denominator)
    if num < 0:
        raise ValueError("sqrt of negative rational")
    k = math.isqrt((num << (2 * bits)) // den)
    return Q(k, 1 << bits)


def mix64(*parts: int) -> int:
    """Stable 64-bit hash of integer parts (seed chains, namespacing)."""
    h = hashlib.sha256()
    for p in parts:
        h.update((int(p) & _MASK64).to_bytes(8, "big"))
    return int.from_bytes(h.digest()[:8], "big")
