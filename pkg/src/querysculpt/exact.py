"""Exact comparison of the few kinds of real numbers H-indices produce.

Values are nonnegative and take one of these forms:

* ``int`` / ``Fraction``               rationals
* ``Sqrt(c)``                          square root of a nonnegative rational
* ``Log2(k)``                          log2 of a positive integer
* ``LogScaled(r, base)``               ``r * log2(base)`` for rational ``r``

Comparisons between rationals and scaled logarithms reduce to comparing
integer powers, so they are exact.  A square root is compared against a
logarithm numerically: an irrational algebraic number never equals a
transcendental one, and a near-tie below 1e-60 raises instead of guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key, lru_cache

import mpmath

_DPS = 80


def _is_pow2(k: int) -> bool:
    return k > 0 and k & (k - 1) == 0


def _isqrt_exact(q: Fraction) -> Fraction | None:
    a, b = q.numerator, q.denominator
    ra, rb = math.isqrt(a), math.isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None


@dataclass(frozen=True)
class Sqrt:
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        if self.c < 0:
            raise ValueError("negative radicand")

    def __float__(self):
        return math.sqrt(self.c)

    def __str__(self):
        return f"sqrt({self.c})"


@dataclass(frozen=True)
class Log2:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("log2 of a non-positive integer")

    def __float__(self):
        return math.log2(self.k)

    def __str__(self):
        return f"log2({self.k})"


@dataclass(frozen=True)
class LogScaled:
    r: Fraction
    base: int

    def __post_init__(self):
        object.__setattr__(self, "r", Fraction(self.r))
        if self.r < 0 or self.base < 1:
            raise ValueError("LogScaled needs r >= 0 and base >= 1")

    def __float__(self):
        return float(self.r) * math.log2(self.base)

    def __str__(self):
        return f"{self.r}*log2({self.base})"


def canonical(v):
    """Reduce ``v`` to ('rat', q) | ('sqrt', c) | ('log', r, base)."""
    if isinstance(v, (int, Fraction)):
        return ("rat", Fraction(v))
    return _canonical_obj(v)


@lru_cache(maxsize=1 << 14)
def _canonical_obj(v):
    if isinstance(v, Sqrt):
        s = _isqrt_exact(v.c)
        return ("rat", s) if s is not None else ("sqrt", v.c)
    if isinstance(v, Log2):
        v = LogScaled(Fraction(1), v.k)
    if isinstance(v, LogScaled):
        if v.r == 0 or v.base == 1:
            return ("rat", Fraction(0))
        if _is_pow2(v.base):
            return ("rat", v.r * (v.base.bit_length() - 1))
        return ("log", v.r, v.base)
    if isinstance(v, float):
        raise TypeError("floats are not exact; pass a Fraction")
    raise TypeError(f"unsupported exact value {v!r}")


def to_mp(v):
    c = canonical(v)
    with mpmath.workdps(_DPS):
        if c[0] == "rat":
            return mpmath.mpf(c[1].numerator) / c[1].denominator
        if c[0] == "sqrt":
            return mpmath.sqrt(mpmath.mpf(c[1].numerator) / c[1].denominator)
        return (mpmath.mpf(c[1].numerator) / c[1].denominator) * mpmath.log(c[2], 2)


def to_float(v) -> float:
    return float(v) if not isinstance(v, (Sqrt, Log2, LogScaled)) else v.__float__()


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _cmp_pow(b1: int, e1: int, b2: int, e2: int) -> int:
    """Compare b1**e1 with b2**e2 for positive integer bases."""
    if e1 * math.log2(b1) - e2 * math.log2(b2) > 1e-6 * (1 + e1 + e2):
        return 1
    if e2 * math.log2(b2) - e1 * math.log2(b1) > 1e-6 * (1 + e1 + e2):
        return -1
    return _sign(b1 ** e1 - b2 ** e2)


def _cmp_rat_log(t: Fraction, r: Fraction, base: int) -> int:
    """Compare t with r*log2(base), base not a power of two, t, r >= 0."""
    if r == 0:
        return _sign(t)
    if t < 0:
        return -1
    # t < r log2 N  <=>  2^(a q) < N^(b p)  with t = a/b, r = p/q
    a, b = t.numerator, t.denominator
    p, q = r.numerator, r.denominator
    return _cmp_pow(2, a * q, base, b * p)


def _cmp_numeric(a, b) -> int:
    with mpmath.workdps(_DPS):
        d = to_mp(a) - to_mp(b)
        if abs(d) < mpmath.mpf(10) ** -60:
            raise ArithmeticError(f"cannot separate {a} and {b}")
        return 1 if d > 0 else -1


def cmp(a, b) -> int:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return _sign(a - b)
    ca, cb = canonical(a), canonical(b)
    ka, kb = ca[0], cb[0]
    if ka == "rat" and kb == "rat":
        return _sign(ca[1] - cb[1])
    if ka == "sqrt" and kb == "sqrt":
        return _sign(ca[1] - cb[1])
    if ka == "sqrt" and kb == "rat":
        return _sign(ca[1] - cb[1] * cb[1])
    if ka == "rat" and kb == "sqrt":
        return -cmp(b, a)
    if ka == "rat" and kb == "log":
        return _cmp_rat_log(ca[1], cb[1], cb[2])
    if ka == "log" and kb == "rat":
        return -_cmp_rat_log(cb[1], ca[1], ca[2])
    if ka == "log" and kb == "log":
        (r1, n1), (r2, n2) = ca[1:], cb[1:]
        # r1 log N1 vs r2 log N2  <=>  N1^(p1 q2) vs N2^(p2 q1)
        return _cmp_pow(n1, r1.numerator * r2.denominator, n2, r2.numerator * r1.denominator)
    return _cmp_numeric(a, b)


def lt(a, b) -> bool:
    return cmp(a, b) < 0


def le(a, b) -> bool:
    return cmp(a, b) <= 0


def eq(a, b) -> bool:
    return cmp(a, b) == 0


def exact_max(*vals):
    best = vals[0]
    for v in vals[1:]:
        if cmp(v, best) > 0:
            best = v
    return best


def exact_min(*vals):
    best = vals[0]
    for v in vals[1:]:
        if cmp(v, best) < 0:
            best = v
    return best


sort_key = cmp_to_key(cmp)


def square(v):
    """v**2 for the forms above, where it stays in the family."""
    c = canonical(v)
    if c[0] == "rat":
        return c[1] * c[1]
    if c[0] == "sqrt":
        return c[1]
    raise TypeError(f"square of {v} is not representable exactly")


def scale(v, factor):
    """Exact product of a level with a rational or ``LogScaled`` factor."""
    cv = canonical(v)
    cf = canonical(factor)
    if cv[0] == "rat" and cf[0] == "rat":
        return cv[1] * cf[1]
    if cv[0] == "rat" and cf[0] == "log":
        return LogScaled(cv[1] * cf[1], cf[2])
    if cv[0] == "log" and cf[0] == "rat":
        return LogScaled(cv[1] * cf[1], cv[2])
    raise TypeError(f"cannot scale {v} by {factor} exactly")


def floor_sqrt(v) -> int:
    """Largest integer k with k*k <= v."""
    k = max(0, int(math.isqrt(max(0, int(math.floor(to_float(v)))))))
    while k > 0 and cmp(k * k, v) > 0:
        k -= 1
    while cmp((k + 1) * (k + 1), v) <= 0:
        k += 1
    return k


def floor_square(v) -> int:
    """Largest integer s with s <= v**2, i.e. sqrt(s) <= v."""
    s = int(math.floor(to_float(v) ** 2))
    while s > 0 and cmp(Sqrt(s), v) > 0:
        s -= 1
    while cmp(Sqrt(s + 1), v) <= 0:
        s += 1
    return s


def render(v) -> str:
    c = canonical(v)
    if c[0] == "rat":
        q = c[1]
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    return str(v)


def plus_int(v, k: int):
    """``v + k`` for an integer ``k >= 0``; ``log2(c) + k`` stays exact as ``log2(c * 2**k)``."""
    c = canonical(v)
    if c[0] == "rat":
        return c[1] + k
    if c[0] == "log" and c[1] == 1:
        return Log2(c[2] << k)
    raise TypeError(f"cannot add {k} to {v} exactly")


def le_square(a, b) -> bool:
    """``a <= b**2`` for nonnegative ``a`` and ``b``."""
    cb = canonical(b)
    if cb[0] == "rat":
        return cmp(a, cb[1] * cb[1]) <= 0
    if cb[0] == "sqrt":
        return cmp(a, cb[1]) <= 0
    ca = canonical(a)
    if ca[0] == "rat":
        return cmp(Sqrt(ca[1]), b) <= 0
    with mpmath.workdps(_DPS):
        d = to_mp(a) - to_mp(b) ** 2
        if abs(d) < mpmath.mpf(10) ** -60:
            raise ArithmeticError(f"cannot separate {a} and ({b})^2")
        return d < 0
