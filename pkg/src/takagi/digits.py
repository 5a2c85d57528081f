"""Base-r digit streams and exact conversion between rationals and digits.

A point of [0, 1] is carried around as a :class:`DigitStream`, the sequence
of its base-``r`` digits ``eps_1, eps_2, ...`` with ``x = sum eps_n r**-n``.
Three concrete kinds exist:

* :class:`PeriodicDigits`: eventually periodic, i.e. a rational point.
  Always stored in canonical form (minimal period, minimal preperiod).
* :class:`SparseDigits`: ``on`` at the positions ``b**k`` (``k >= start``),
  ``off`` everywhere else.
* :class:`RuleDigits`: any digit callback; the escape hatch for other
  rule-generated expansions.

Rationals are :class:`fractions.Fraction` throughout.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Optional, Union

import numpy as np

from .errors import CycleCapError, GrammarError, LookaheadCapError, PointError

try:
    import gmpy2
except ImportError:  # pragma: no cover - exercised only without gmpy2
    gmpy2 = None

MAX_RADIX = 256
CYCLE_CAP = 10**6
LOOKAHEAD_CAP = 10**4

DIGIT_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"
_TO_CHARS = bytes(range(256)).maketrans(
    bytes(range(len(DIGIT_CHARS))), DIGIT_CHARS.encode())

Rational = Union[Fraction, int]


class PointClass(str, enum.Enum):
    IN_D = "InD"
    IN_DTILDE = "InDTilde"
    GENERIC = "Generic"


def check_radix(r) -> int:
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)):
        raise PointError(f"radix must be an integer, got {r!r}")
    r = int(r)
    if not 2 <= r <= MAX_RADIX:
        raise PointError(f"radix must lie in [2, {MAX_RADIX}], got {r}")
    return r


def middle_digit(r: int) -> Optional[int]:
    """(r-1)/2 when r is odd, None for even r (no digit sits in the middle)."""
    return (r - 1) // 2 if r % 2 else None


def word_to_int(word: bytes, r: int) -> int:
    """Integer whose base-r digits (most significant first) are ``word``."""
    if not word:
        return 0
    if gmpy2 is not None and r <= 36:
        return int(gmpy2.mpz(word.translate(_TO_CHARS).decode(), r))
    return _word_to_int_split(word, r)


def _word_to_int_split(word, r):
    if len(word) <= 48:
        v = 0
        for d in word:
            v = v * r + d
        return v
    mid = len(word) // 2
    lo = word[mid:]
    return _word_to_int_split(word[:mid], r) * r ** len(lo) + _word_to_int_split(lo, r)


def _reduced(num: int, den: int) -> Fraction:
    # Fraction's own gcd is quadratic; large periods need GMP.
    if gmpy2 is not None and den.bit_length() > 4096:
        q = gmpy2.mpq(num, den)
        return Fraction(int(q.numerator), int(q.denominator))
    return Fraction(num, den)


def _as_word(digits, r: int) -> bytes:
    if isinstance(digits, str):
        try:
            word = bytes(DIGIT_CHARS.index(c) for c in digits.lower())
        except ValueError:
            raise PointError(f"bad digit character in {digits!r}") from None
    elif isinstance(digits, (bytes, bytearray)):
        word = bytes(digits)
    else:
        word = bytes(int(d) for d in digits)
    if word and max(word) >= r:
        raise PointError(f"digit out of range for radix {r}: {list(word)}")
    return word


def _minimal_period(per: bytes) -> bytes:
    n = len(per)
    for d in range(1, n + 1):
        if n % d == 0 and per == per[:d] * (n // d):
            return per[:d]
    return per


class DigitStream:
    """Common interface of all digit streams (1-based digit positions)."""

    radix: int
    is_periodic = False

    def digit(self, n: int) -> int:
        raise NotImplementedError

    def digits(self, count: int) -> bytes:
        """The first ``count`` digits."""
        return bytes(self.digit(n) for n in range(1, count + 1))

    def find(self, start: int, accept: Iterable[int]) -> Optional[int]:
        """Smallest position ``j >= start`` whose digit lies in ``accept``.

        Returns None when no such position exists (only decidable for the
        structured stream kinds; :class:`RuleDigits` raises at the cap).
        """
        raise NotImplementedError

    def value(self) -> Fraction:
        raise PointError(f"{type(self).__name__} does not represent a rational point")


@dataclass(frozen=True)
class PeriodicDigits(DigitStream):
    """Eventually periodic expansion ``0.pre(per)`` in base ``radix``.

    Digit words may be given as ``bytes``, a sequence of ints, or a string
    of digit characters; they are normalized to canonical form.
    """

    radix: int
    preperiod: bytes
    period: bytes

    is_periodic = True

    def __post_init__(self):
        r = check_radix(self.radix)
        pre = _as_word(self.preperiod, r)
        per = _as_word(self.period, r)
        if not per:
            raise PointError("period must be nonempty")
        per = _minimal_period(per)
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        object.__setattr__(self, "radix", r)
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    def digit(self, n: int) -> int:
        m = len(self.preperiod)
        if n <= m:
            return self.preperiod[n - 1]
        return self.period[(n - 1 - m) % len(self.period)]

    def digits(self, count: int) -> bytes:
        m = len(self.preperiod)
        if count <= m:
            return self.preperiod[:count]
        reps = -(-(count - m) // len(self.period))
        return (self.preperiod + self.period * reps)[:count]

    def find(self, start, accept):
        accept = set(accept)
        if not accept.intersection(self.period):
            for j in range(start, len(self.preperiod) + 1):
                if self.preperiod[j - 1] in accept:
                    return j
            return None
        j = start
        while self.digit(j) not in accept:
            j += 1
        return j

    def value(self) -> Fraction:
        r = self.radix
        lam = len(self.period)
        big = r**lam - 1
        num = word_to_int(self.preperiod, r) * big + word_to_int(self.period, r)
        return _reduced(num, r ** len(self.preperiod) * big)

    def __str__(self):
        return format_point(self)


@dataclass(frozen=True)
class SparseDigits(DigitStream):
    """Digit ``on`` at positions ``base**k`` for ``k >= start``, ``off`` elsewhere."""

    radix: int
    base: int
    on: int
    off: int
    start: int = 0

    def __post_init__(self):
        r = check_radix(self.radix)
        object.__setattr__(self, "radix", r)
        if self.base < 2:
            raise PointError(f"sparse base must be >= 2, got {self.base}")
        if self.start < 0:
            raise PointError("sparse start exponent must be >= 0")
        for d in (self.on, self.off):
            if not 0 <= d < r:
                raise PointError(f"digit {d} out of range for radix {r}")

    def is_marked(self, n: int) -> bool:
        k = 0
        while n % self.base == 0:
            n //= self.base
            k += 1
        return n == 1 and k >= self.start

    def marks(self, upto: int) -> list[int]:
        """Positions ``base**k <= upto`` carrying the ``on`` digit."""
        out = []
        p = self.base**self.start
        while p <= upto:
            out.append(p)
            p *= self.base
        return out

    def digit(self, n: int) -> int:
        return self.on if self.is_marked(n) else self.off

    def digits(self, count: int) -> bytes:
        buf = bytearray([self.off]) * count
        for p in self.marks(count):
            buf[p - 1] = self.on
        return bytes(buf)

    def find(self, start, accept):
        accept = set(accept)
        if self.off in accept:
            j = start
            while self.is_marked(j) and self.on not in accept:
                j += 1
            return j
        if self.on in accept:
            p = self.base**self.start
            while p < start:
                p *= self.base
            return p
        return None

    def __str__(self):
        return format_point(self)


class RuleDigits(DigitStream):
    """Digit stream defined by a callback ``rule(n) -> digit`` (n >= 1).

    Rule streams cannot be classified or searched exhaustively: searches
    stop after ``lookahead_cap`` positions with :class:`LookaheadCapError`,
    and :func:`classify_point` assumes they are generic.
    """

    def __init__(self, radix: int, rule: Callable[[int], int], label: str = "rule",
                 lookahead_cap: int = LOOKAHEAD_CAP):
        self.radix = check_radix(radix)
        self.rule = rule
        self.label = label
        self.lookahead_cap = lookahead_cap

    def digit(self, n):
        d = int(self.rule(n))
        if not 0 <= d < self.radix:
            raise PointError(f"rule {self.label} produced digit {d} at n={n}")
        return d

    def find(self, start, accept):
        accept = set(accept)
        for j in range(start, start + self.lookahead_cap):
            if self.digit(j) in accept:
                return j
        raise LookaheadCapError(
            f"no digit in {sorted(accept)} within {self.lookahead_cap} positions of {start}")

    def __repr__(self):
        return f"RuleDigits(radix={self.radix}, label={self.label!r})"


# ---------------------------------------------------------------- conversion

def _check_unit(x) -> Fraction:
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise PointError(f"point {x} outside [0, 1]")
    return x


def _powers_mod(r: int, m: int, count: int) -> np.ndarray:
    """r**k mod m for k < count, int64; needs m < 2**31."""
    out = np.empty(count, dtype=np.int64)
    out[0] = 1 % m
    filled = 1
    while filled < count:
        step = min(filled, count - filled)
        out[filled:filled + step] = out[:step] * pow(r, filled, m) % m
        filled += step
    return out


def _order_mod(r: int, m: int, cap: int) -> int:
    """Multiplicative order of r modulo m (gcd(r, m) = 1, m > 1)."""
    if m < 2**31:
        size = 1024
        while True:
            pw = _powers_mod(r, m, min(size, cap) + 1)
            hits = np.flatnonzero(pw[1:] == 1)
            if hits.size:
                return int(hits[0]) + 1
            if size >= cap:
                break
            size *= 4
    else:
        v = r % m
        for k in range(1, cap + 1):
            if v == 1:
                return k
            v = v * r % m
    raise CycleCapError(f"period of base-{r} expansion with modulus {m} exceeds {cap}")


def _long_division(p: int, q: int, r: int, count: int) -> bytes:
    """First ``count`` base-r digits of p/q (0 <= p < q)."""
    if count == 0:
        return b""
    if q < 2**31:
        rems = p * _powers_mod(r, q, count) % q
        return (rems * r // q).astype(np.uint8).tobytes()
    out = bytearray(count)
    for i in range(count):
        p *= r
        out[i], p = divmod(p, q)
    return bytes(out)


def digits_of(x: Rational, r: int, upper: bool = False,
              cap: int = CYCLE_CAP) -> PeriodicDigits:
    """Canonical base-``r`` expansion of a rational ``x`` in [0, 1].

    Points of D (r-adic rationals) get the all-zeros tail unless ``upper``
    asks for the all-``(r-1)`` tail. ``x = 1`` only has the latter.

    >>> digits_of(Fraction(1, 3), 2)
    PeriodicDigits(radix=2, preperiod=b'', period=b'\\x00\\x01')
    """
    r = check_radix(r)
    x = _check_unit(x)
    top = bytes([r - 1])
    if x == 1:
        return PeriodicDigits(r, b"", top)
    p, q = x.numerator, x.denominator
    mu, q2 = 0, q
    g = gcd(q2, r)
    while g > 1:
        q2 //= g
        mu += 1
        g = gcd(q2, r)
    if q2 == 1:
        pre = _long_division(p, q, r, mu)
        if upper and p:
            return PeriodicDigits(r, pre[:-1] + bytes([pre[-1] - 1]), top)
        return PeriodicDigits(r, pre, b"\x00")
    lam = _order_mod(r, q2, cap)
    word = _long_division(p, q, r, mu + lam)
    return PeriodicDigits(r, word[:mu], word[mu:])


def digit_at(s: DigitStream, n: int) -> int:
    if n < 1:
        raise PointError(f"digit positions start at 1, got {n}")
    return s.digit(n)


def prefix_value(s: DigitStream, n: int) -> Fraction:
    """Exact truncation ``sum_{k<=n} eps_k r**-k`` (the point x-hat_{n+1})."""
    if n < 0:
        raise PointError("prefix length must be >= 0")
    return _reduced(word_to_int(s.digits(n), s.radix), s.radix**n)


def classify_point(s: DigitStream) -> PointClass:
    """Place the point in D, in D-tilde (odd radix only), or neither."""
    r = s.radix
    mid = middle_digit(r)
    if isinstance(s, PeriodicDigits):
        tail = set(s.period)
    elif isinstance(s, SparseDigits):
        tail = {s.on, s.off}
    else:
        return PointClass.GENERIC
    if tail == {0} or tail == {r - 1}:
        return PointClass.IN_D
    if mid is not None and tail == {mid}:
        return PointClass.IN_DTILDE
    return PointClass.GENERIC


def as_stream(point, r: Optional[int] = None, upper: bool = False) -> DigitStream:
    """Coerce a stream, a rational, or a grammar string into a DigitStream."""
    if isinstance(point, DigitStream):
        if r is not None and check_radix(r) != point.radix:
            raise PointError(f"stream has radix {point.radix}, expected {r}")
        return point
    if isinstance(point, str):
        return parse_point(point, r, upper=upper)
    if r is None:
        raise PointError("a radix is needed to expand a rational point")
    return digits_of(Fraction(point), r, upper=upper)


def as_fraction(point, r: Optional[int] = None) -> Fraction:
    """Exact value of a rational point given as a number, string or stream."""
    if isinstance(point, (Fraction, int)) and not isinstance(point, bool):
        return _check_unit(point)
    return as_stream(point, r).value()


# ------------------------------------------------------------------- grammar

_RATIONAL_RE = re.compile(r"^(\d+)(?:/(\d+))?$")
_EXPLICIT_RE = re.compile(r"^0\.([0-9a-z]*)\(([0-9a-z]+)\)_(\d+)$")
_SPARSE_RE = re.compile(r"^sparse:(.*)$")


def parse_point(text: str, r: Optional[int] = None, upper: bool = False) -> DigitStream:
    """Parse one of the point grammars.

    ``p/q`` (or a bare integer), ``0.<digits>(<period>)_<r>``, and
    ``sparse:b=<int>,on=<digit>,off=<digit>[,start=<int>]``. The first and
    last need ``r``; the explicit form carries its own radix.
    """
    text = text.strip()
    m = _EXPLICIT_RE.match(text)
    if m:
        rr = int(m.group(3))
        if r is not None and int(r) != rr:
            raise GrammarError(f"point {text!r} is base {rr}, expected base {r}")
        try:
            return PeriodicDigits(rr, m.group(1), m.group(2))
        except PointError as exc:
            raise GrammarError(str(exc)) from None
    if r is None:
        raise GrammarError(f"point {text!r} needs a radix")
    m = _RATIONAL_RE.match(text)
    if m:
        den = int(m.group(2) or 1)
        if den == 0:
            raise GrammarError("zero denominator")
        try:
            return digits_of(Fraction(int(m.group(1)), den), r, upper=upper)
        except PointError as exc:
            raise GrammarError(str(exc)) from None
    m = _SPARSE_RE.match(text)
    if m:
        fields = {}
        for item in m.group(1).split(","):
            key, sep, val = item.partition("=")
            if not sep or not val.isdigit() or key in fields:
                raise GrammarError(f"bad sparse field {item!r}")
            fields[key] = int(val)
        if not {"b", "on", "off"} <= fields.keys() <= {"b", "on", "off", "start"}:
            raise GrammarError(f"sparse point needs b, on, off (optional start): {text!r}")
        try:
            return SparseDigits(r, fields["b"], fields["on"], fields["off"],
                                fields.get("start", 0))
        except PointError as exc:
            raise GrammarError(str(exc)) from None
    raise GrammarError(f"unrecognized point {text!r}")


def format_point(s: DigitStream) -> str:
    """Canonical grammar string; ``parse_point(format_point(s)) == s``."""
    if isinstance(s, PeriodicDigits):
        if s.radix > len(DIGIT_CHARS):
            raise PointError(f"explicit digit grammar only covers radix <= {len(DIGIT_CHARS)}")
        pre = s.preperiod.translate(_TO_CHARS).decode()
        per = s.period.translate(_TO_CHARS).decode()
        return f"0.{pre}({per})_{s.radix}"
    if isinstance(s, SparseDigits):
        text = f"sparse:b={s.base},on={s.on},off={s.off}"
        return text + (f",start={s.start}" if s.start else "")
    raise PointError(f"{s!r} has no grammar form")
