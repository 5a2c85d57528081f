"""Exact and enclosed evaluation of the Takagi-Van der Waerden functions.

With ``g_n(x) = dist(x, D_n)`` and ``D_n = {k / r**(n-1)}`` the function is
``f_r(x) = sum_{n>=1} g_n(x)``. For a rational ``x = p/q`` the orbit
``r**k x mod 1`` is eventually periodic, so the series collapses to a finite
preperiod sum plus one geometric cycle sum, giving the exact value.

Truncating after ``N`` terms leaves a tail bounded by::

    sum_{n>N} g_n(x) <= sum_{n>N} r**(1-n) / 2 = r**(1-N) / (2 (r-1))

since each ``g_n`` is at most half the mesh ``r**(1-n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor, gcd

from .digits import (CYCLE_CAP, LOOKAHEAD_CAP, DigitStream, PointClass, _order_mod, _powers_mod,
                     as_stream, check_radix, classify_point, middle_digit, word_to_int)
from .errors import CycleCapError, LookaheadCapError, PointError


@dataclass(frozen=True)
class Enclosure:
    """Closed interval ``[lo, hi]`` with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty enclosure [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, v) -> "Enclosure":
        return cls(v, v)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, v) -> bool:
        return self.lo <= v <= self.hi

    def __sub__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo - other.hi, self.hi - other.lo)

    def __truediv__(self, other: "Enclosure") -> "Enclosure":
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("divisor enclosure contains 0")
        ends = [a / b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        return Enclosure(min(ends), max(ends))


def tail_bound(r: int, N: int) -> Fraction:
    """Upper bound on ``sum_{n>N} g_n``."""
    return Fraction(1, 2 * (r - 1) * r ** (N - 1))


def phi_dist(x) -> Fraction:
    """Distance from ``x`` to the nearest integer."""
    x = Fraction(x)
    frac = x - floor(x)
    return min(frac, 1 - frac)


def g_n(x, n: int, r: int) -> Fraction:
    """Distance from ``x`` to ``D_n = {k / r**(n-1)}``."""
    if n < 1:
        raise PointError("g_n is indexed from n = 1")
    scale = check_radix(r) ** (n - 1)
    return phi_dist(Fraction(x) * scale) / scale


def _horner(values: list, r: int) -> int:
    """``sum values[i] * r**(len-1-i)``, split recursively to stay subquadratic."""
    if len(values) <= 64:
        acc = 0
        for v in values:
            acc = acc * r + v
        return acc
    mid = len(values) // 2
    lo = values[mid:]
    return _horner(values[:mid], r) * r ** len(lo) + _horner(lo, r)


def _unit(x) -> Fraction:
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise PointError(f"point {x} outside [0, 1]")
    return x


def _orbit(x: Fraction, r: int, cap: int):
    """Remainders ``p r**k mod q`` up to the end of the first cycle.

    Returns ``(rems, mu, q)``: the cycle is ``rems[mu:]``.
    """
    p, q = x.numerator, x.denominator
    mu, q2 = 0, q
    g = gcd(q2, r)
    while g > 1:
        q2 //= g
        mu += 1
        g = gcd(q2, r)
    lam = 1 if q2 == 1 else _order_mod(r, q2, cap)
    if mu + lam > cap:
        raise CycleCapError(f"orbit of {x} under x -> {r}x mod 1 exceeds {cap} states")
    p %= q
    if q < 2**31:
        rems = (p * _powers_mod(r, q, mu + lam) % q).tolist()
    else:
        rems = []
        for _ in range(mu + lam):
            rems.append(p)
            p = p * r % q
    return rems, mu, q


def _orbit_series(x: Fraction, r: int, weight, cap: int) -> Fraction:
    """``sum_k r**-k w(rem_k) / (2q)`` over the whole (infinite) orbit."""
    rems, mu, q = _orbit(x, r, cap)
    w = [weight(v, q) for v in rems]
    lam = len(w) - mu
    cycle = r**lam - 1
    head = _horner(w[:mu], r) if mu else 0
    num = r * (head * cycle + _horner(w[mu:], r))
    return Fraction(num, 2 * q * r**mu * cycle)


def _phi_weight(rem, q):
    return 2 * min(rem, q - rem)


def _mid_weight(rem, q):
    return abs(2 * rem - q)


def eval_exact(x, r: int, cap: int = CYCLE_CAP) -> Fraction:
    """Exact ``f_r(x)`` for a rational ``x`` (number, stream, or point string).

    >>> eval_exact(Fraction(1, 3), 2)
    Fraction(2, 3)
    """
    r = check_radix(r)
    return _orbit_series(_rational(x, r), r, _phi_weight, cap)


def dtilde_series(x, r: int, cap: int = CYCLE_CAP) -> Fraction:
    """Exact ``sum_n dist(x, D~_n)``, D~_n being the midpoints of D_n.

    Summed directly over the orbit (distance of ``r**(n-1) x mod 1`` to 1/2),
    so the identity ``dtilde_series + eval_exact == r / (2 (r-1))`` is a
    genuine check rather than a definition.
    """
    r = check_radix(r)
    return _orbit_series(_rational(x, r), r, _mid_weight, cap)


def _rational(x, r) -> Fraction:
    if isinstance(x, DigitStream):
        if x.radix != r:
            raise PointError(f"stream has radix {x.radix}, expected {r}")
        return x.value()
    if isinstance(x, str):
        return as_stream(x, r).value()
    return _unit(x)


def partial_sum(x: Fraction, r: int, N: int) -> Fraction:
    """Exact ``S_N(x) = sum_{n<=N} g_n(x)`` for rational ``x``."""
    p, q = x.numerator, x.denominator
    p %= q
    w = []
    for _ in range(N):
        w.append(min(p, q - p))
        p = p * r % q
    return Fraction(_horner(w, r), q * r ** (N - 1))


def eval_partial(x, r: int, N: int) -> Enclosure:
    """Enclosure of ``f_r(x)`` from the first ``N`` terms.

    Rational points give ``[S_N - t, S_N + t]`` with ``t = tail_bound(r, N)``.
    Non-periodic streams (irrational points) are truncated to ``M`` digits
    with ``N r**-M <= t/2``; as every ``g_n`` is 1-Lipschitz and the tail is
    nonnegative, the enclosure is ``[S_N(y) - e, S_N(y) + e + t]`` with
    ``y`` the truncation and ``e = N r**-M``. Width stays at most ``2t``.
    """
    r = check_radix(r)
    if N < 1:
        raise PointError("N must be >= 1")
    t = tail_bound(r, N)
    if isinstance(x, DigitStream) and not x.is_periodic:
        if x.radix != r:
            raise PointError(f"stream has radix {x.radix}, expected {r}")
        M = N
        while r ** (M + 1 - N) < 4 * N * (r - 1):
            M += 1
        y = Fraction(word_to_int(x.digits(M), r), r**M)
        e = Fraction(N, r**M)
        s = partial_sum(y, r, N)
        return Enclosure(s - e, s + e + t)
    s = partial_sum(_rational(x, r), r, N)
    return Enclosure(s - t, s + t)


def next_grid_point(s: DigitStream, n: int) -> Fraction:
    """Smallest point of ``D_n`` or ``D~_n`` strictly greater than the point.

    ``D_n`` together with its midpoints is the grid ``j / (2 r**(n-1))``.
    For rule-generated streams the floor of ``2 r**(n-1) x`` is read off the
    first ``n - 1`` digits plus the comparison of the tail with 1/2, which
    may need the next digit different from the middle one.
    """
    r = s.radix
    scale = 2 * r ** (n - 1)
    if s.is_periodic:
        x = s.value()
        j = floor(x * scale) + 1
    else:
        eps = s.digit(n)
        mid = middle_digit(r)
        if mid is None:
            upper = 2 * eps >= r
        elif eps != mid:
            upper = eps > mid
        else:
            k = s.find(n + 1, [d for d in range(r) if d != mid])
            upper = True if k is None else s.digit(k) > mid
        j = 2 * word_to_int(s.digits(n - 1), r) + int(upper) + 1
    if j > scale:
        raise PointError("no grid point to the right of 1")
    return Fraction(j, scale)


def d_n(s, n: int, r: int | None = None):
    """Distance from a generic point to the next point of ``D_n`` or ``D~_n``.

    Exact for rational points. For rule-generated streams the point itself
    is irrational, so an :class:`Enclosure` is returned instead, with a
    strictly positive lower end.
    """
    s = as_stream(s, r)
    if n < 1:
        raise PointError("d_n is indexed from n = 1")
    if classify_point(s) is not PointClass.GENERIC:
        raise PointError("d_n needs a point outside D and D~")
    y = next_grid_point(s, n)
    if s.is_periodic:
        return y - s.value()
    # y only depends on a short prefix, but y - x can be far below r**-n
    # (long middle runs), so the digit count doubles until the gap is resolved
    M = 2 * n + 64
    while True:
        x = point_bounds(s, M)
        if y > x.hi:
            break
        if M > 4 * LOOKAHEAD_CAP:
            raise LookaheadCapError(f"d_{n} not resolved within {M} digits")
        M *= 2
    x = point_bounds(s, M + 64)
    return Enclosure(y - x.hi, y - x.lo)


def point_bounds(s: DigitStream, M: int) -> Enclosure:
    """Enclosure of the point's value from its first ``M`` digits."""
    if s.is_periodic:
        return Enclosure.point(s.value())
    lo = Fraction(word_to_int(s.digits(M), s.radix), s.radix**M)
    return Enclosure(lo, lo + Fraction(1, s.radix**M))


def f_enclosure(s: DigitStream, N: int) -> Enclosure:
    """``f_r`` at the point: exact when rational, else ``eval_partial(N)``."""
    if s.is_periodic:
        return Enclosure.point(eval_exact(s.value(), s.radix))
    return eval_partial(s, s.radix, N)


__all__ = [
    "Enclosure", "tail_bound", "phi_dist", "g_n", "eval_exact", "dtilde_series",
    "partial_sum", "eval_partial", "next_grid_point", "d_n", "point_bounds",
    "f_enclosure",
]
