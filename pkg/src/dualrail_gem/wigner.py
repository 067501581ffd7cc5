"""Wigner 3-j and 6-j symbols via the Racah formulae.

All factorial ratios are carried out in exact rational arithmetic
(:class:`fractions.Fraction`); conversion to float happens exactly once, at the
end, so alternating sums do not lose precision.
"""
from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt

__all__ = ["wigner_3j", "wigner_6j", "clebsch_gordan"]


def _twice(x):
    """Return 2*x as an int, rejecting anything that is not a half-integer."""
    two_x = 2 * Fraction(x).limit_denominator(1000)
    if two_x.denominator != 1 or abs(float(two_x) - 2 * float(x)) > 1e-9:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return int(two_x)


def _triangle_ok(a, b, c):
    # arguments doubled
    return (a + b + c) % 2 == 0 and abs(a - b) <= c <= a + b


def _delta_sq(a, b, c):
    """Triangle coefficient Delta(abc)^2 from doubled arguments."""
    return Fraction(
        factorial((a + b - c) // 2) * factorial((a - b + c) // 2) * factorial((-a + b + c) // 2),
        factorial((a + b + c) // 2 + 1),
    )


def _signed_sqrt(sign_sum, sq):
    # value = sign_sum * sqrt(sq); sq exact, sqrt taken in float at the end
    if sign_sum == 0:
        return 0.0
    mag = sqrt(float(sign_sum * sign_sum * sq))
    return mag if sign_sum > 0 else -mag


@lru_cache(maxsize=65536)
def _w3j(j1, j2, j3, m1, m2, m3):
    if m1 + m2 + m3 != 0:
        return 0.0
    if not _triangle_ok(j1, j2, j3):
        return 0.0
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        if abs(m) > j or (j + m) % 2:
            return 0.0
    # Racah: t runs over all integers keeping every factorial argument >= 0
    t1 = (j2 - j3 - m1) // 2
    t2 = (j1 - j3 + m2) // 2
    t3 = (j1 + j2 - j3) // 2
    t4 = (j1 - m1) // 2
    t5 = (j2 + m2) // 2
    s = Fraction(0)
    for t in range(max(0, t1, t2), min(t3, t4, t5) + 1):
        den = (factorial(t) * factorial(t - t1) * factorial(t - t2)
               * factorial(t3 - t) * factorial(t4 - t) * factorial(t5 - t))
        s += Fraction((-1) ** t, den)
    pref = _delta_sq(j1, j2, j3)
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        pref *= factorial((j + m) // 2) * factorial((j - m) // 2)
    phase = (j1 - j2 - m3) // 2
    if phase % 2:
        s = -s
    return _signed_sqrt(s, pref)


def wigner_3j(j1, j2, j3, m1, m2, m3):
    """Wigner 3-j symbol ``(j1 j2 j3; m1 m2 m3)``.

    Arguments may be ints, floats or Fractions but must be integers or
    half-integers (``ValueError`` otherwise).  Returns exactly ``0.0`` whenever a
    selection rule (triangle, m-sum, |m| <= j, parity) fails.
    """
    return _w3j(*(_twice(x) for x in (j1, j2, j3, m1, m2, m3)))


@lru_cache(maxsize=65536)
def _w6j(j1, j2, j3, j4, j5, j6):
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    if not all(_triangle_ok(*t) for t in triads):
        return 0.0
    a = [sum(t) // 2 for t in triads]
    b = [(j1 + j2 + j4 + j5) // 2, (j2 + j3 + j5 + j6) // 2, (j3 + j1 + j6 + j4) // 2]
    s = Fraction(0)
    for t in range(max(a), min(b) + 1):
        den = 1
        for ai in a:
            den *= factorial(t - ai)
        for bi in b:
            den *= factorial(bi - t)
        s += Fraction((-1) ** t * factorial(t + 1), den)
    pref = Fraction(1)
    for t in triads:
        pref *= _delta_sq(*t)
    return _signed_sqrt(s, pref)


def wigner_6j(j1, j2, j3, j4, j5, j6):
    """Wigner 6-j symbol ``{j1 j2 j3; j4 j5 j6}``; zero when any triad fails."""
    return _w6j(*(_twice(x) for x in (j1, j2, j3, j4, j5, j6)))


def clebsch_gordan(j1, m1, j2, m2, j, m):
    """<j1 m1; j2 m2 | j m> in the Condon-Shortley convention."""
    d = _twice(j1) - _twice(j2) + _twice(m)
    phase = -1 if (d // 2) % 2 else 1
    return phase * sqrt(2 * float(j) + 1) * wigner_3j(j1, j2, j, m1, m2, -m)
