"""Derivative signs, infinite-derivative criteria and verdicts.

Off ``D`` and ``D~`` every piece ``g_n`` has derivative ``+1`` or ``-1`` at
the point, read off the digits: ``+1`` below the middle digit, ``-1`` above
it, and a middle digit (odd radix only) copies the sign of the next digit
that is not in the middle. Replacing every middle digit by that next digit
is the map ``phi_r``.

One-sided infinite derivatives are decided by four criteria, each built on
an anchor sequence of digit positions:

=============  ============================  =================================
side, sign     anchors                       term at anchor ``a``, gap ``g``
=============  ============================  =================================
right, plus    digit != middle  (``i_n``)    ``S_a - g + log_r g  -> +inf``
left, plus     digit != 0       (``n_k``)    ``S_a - g + log_r g  -> +inf``
right, minus   digit != r-1     (``p_n``)    ``S_a + g - log_r g  -> -inf``
left, minus    digit != middle  (``i_n``)    ``S_a + g - log_r g  -> -inf``
=============  ============================  =================================

with ``S_a`` the partial sum of signs up to the anchor.

Certification of eventually periodic points
-------------------------------------------
For a generic eventually periodic point every anchor condition holds at
least once per period (otherwise the tail would be all middle, all 0 or
all ``r-1`` digits, i.e. the point lies in ``D~`` or ``D``). So gaps are at
most the period length ``L``, the log and gap terms stay within ``L`` of
zero, and every criterion term equals ``S_a + O(L)``. Past the preperiod
``S`` grows by the per-period drift ``delta`` every ``L`` digits, hence each
plus criterion diverges iff ``delta > 0`` and each minus criterion iff
``delta < 0``. Drift zero leaves all four terms bounded.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Optional, Union

import numpy as np

from .digits import (LOOKAHEAD_CAP, DigitStream, PeriodicDigits, PointClass, RuleDigits,
                     SparseDigits, as_stream, classify_point, middle_digit, word_to_int)
from .errors import LookaheadCapError, PointError
from .series import (Enclosure, eval_exact, eval_partial, next_grid_point, partial_sum,
                     point_bounds)


class Side(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"


class Sign(str, enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"


class Result(str, enum.Enum):
    PLUS_INFINITY = "PlusInfinity"
    MINUS_INFINITY = "MinusInfinity"
    NOT_INFINITE = "NotInfinite"


class IndexKind(str, enum.Enum):
    I_SEQ = "I_SEQ"  # digit != (r-1)/2
    N_SEQ = "N_SEQ"  # digit != 0
    P_SEQ = "P_SEQ"  # digit != r-1


ANCHORS = {
    (Side.RIGHT, Sign.PLUS): IndexKind.I_SEQ,
    (Side.LEFT, Sign.PLUS): IndexKind.N_SEQ,
    (Side.RIGHT, Sign.MINUS): IndexKind.P_SEQ,
    (Side.LEFT, Sign.MINUS): IndexKind.I_SEQ,
}

TREND_THRESHOLD = 10.0


@dataclass(frozen=True)
class Certified:
    reason: str
    drift: Optional[int] = None
    period: Optional[int] = None


@dataclass(frozen=True)
class Heuristic:
    depth: int
    criterion: str
    tail_window_min: float
    tail_window_max: float


@dataclass(frozen=True)
class Verdict:
    side: Side
    result: Result
    certainty: Union[Certified, Heuristic]

    @property
    def certified(self) -> bool:
        return isinstance(self.certainty, Certified)


@dataclass(frozen=True)
class IndexSeq:
    kind: IndexKind
    indices: tuple


@dataclass(frozen=True)
class CriterionTerm:
    anchor: int
    sum_part: int
    gap: int
    value: float


@dataclass(frozen=True)
class DerivTrace:
    """Signs ``g'_1..g'_N`` with their running sums.

    ``O`` and ``I`` count the raw digits below and above the middle, as in
    the digit definition of O_N, I_N (so ``O + I < N`` is possible for odd r).
    """

    signs: np.ndarray
    partial_sums: np.ndarray
    O: int
    I: int
    O_resolved: int = field(default=0)
    I_resolved: int = field(default=0)

    @property
    def N(self) -> int:
        return len(self.signs)

    @property
    def S(self) -> int:
        return int(self.partial_sums[-1]) if len(self.partial_sums) else 0


def _non_middle(r: int) -> list[int]:
    mid = middle_digit(r)
    return [d for d in range(r) if d != mid]


def _require_generic(s: DigitStream, what: str):
    cls = classify_point(s)
    if cls is not PointClass.GENERIC:
        raise PointError(f"{what} needs a point outside D and D~, got {cls.value}")


def resolved_digits(s: DigitStream, count: int) -> bytes:
    """First ``count`` digits of ``phi_r`` applied to the stream."""
    r = s.radix
    word = bytearray(s.digits(count))
    mid = middle_digit(r)
    if mid is None or count == 0:
        return bytes(word)
    carry = None
    if word[-1] == mid:
        k = s.find(count + 1, _non_middle(r))
        if k is None:
            raise PointError("middle digits never end: the point lies in D~")
        carry = s.digit(k)
    for j in range(count - 1, -1, -1):
        if word[j] == mid:
            word[j] = carry
        else:
            carry = word[j]
    return bytes(word)


def phi_r_map(s: DigitStream) -> DigitStream:
    """Replace each middle digit by the next non-middle digit (odd r).

    Identity for even radix. Eventually periodic input stays eventually
    periodic; other streams come back as a :class:`RuleDigits` wrapper.
    """
    r = s.radix
    if middle_digit(r) is None:
        return s
    if classify_point(s) is PointClass.IN_DTILDE:
        raise PointError("phi_r is undefined on D~ (all-middle tail)")
    if isinstance(s, PeriodicDigits):
        m, L = len(s.preperiod), len(s.period)
        word = resolved_digits(s, m + L)
        return PeriodicDigits(r, word[:m], word[m:])
    non_mid = _non_middle(r)
    mid = middle_digit(r)

    def rule(n):
        d = s.digit(n)
        if d != mid:
            return d
        k = s.find(n + 1, non_mid)
        if k is None:
            raise PointError("middle digits never end: the point lies in D~")
        return s.digit(k)

    return RuleDigits(r, rule, label=f"phi_r({getattr(s, 'label', s)})")


def _signs_from_resolved(word: bytes, r: int) -> np.ndarray:
    arr = np.frombuffer(word, dtype=np.uint8).astype(np.int16)
    return np.where(2 * arr < r - 1, 1, -1).astype(np.int8)


def deriv_signs(s, N: int, r: Optional[int] = None) -> DerivTrace:
    """Derivative signs of ``g_1..g_N`` at a generic point."""
    s = as_stream(s, r)
    if N < 1:
        raise PointError("N must be >= 1")
    _require_generic(s, "deriv_signs")
    raw = np.frombuffer(s.digits(N), dtype=np.uint8).astype(np.int16)
    res = resolved_digits(s, N)
    signs = _signs_from_resolved(res, s.radix)
    r = s.radix
    resolved = np.frombuffer(res, dtype=np.uint8).astype(np.int16)
    return DerivTrace(
        signs=signs,
        partial_sums=np.cumsum(signs, dtype=np.int64),
        O=int(np.count_nonzero(2 * raw < r - 1)),
        I=int(np.count_nonzero(2 * raw > r - 1)),
        O_resolved=int(np.count_nonzero(2 * resolved < r - 1)),
        I_resolved=int(np.count_nonzero(2 * resolved > r - 1)),
    )


def _accepted(kind: IndexKind, r: int) -> list[int]:
    if kind is IndexKind.I_SEQ:
        return _non_middle(r)
    if kind is IndexKind.N_SEQ:
        return list(range(1, r))
    return list(range(r - 1))


def _anchors(s: DigitStream, kind: IndexKind, count: Optional[int] = None,
             upto: Optional[int] = None) -> list[int]:
    """Anchor positions: the first ``count``, or all ``<= upto`` plus one more."""
    accept = _accepted(IndexKind(kind), s.radix)
    if isinstance(s, PeriodicDigits):
        period_hits = sum(d in accept for d in s.period)
        if not period_hits:
            out = [j for j in range(1, len(s.preperiod) + 1) if s.preperiod[j - 1] in accept]
            _finite(out)
        m, L = len(s.preperiod), len(s.period)
        if count is not None:
            horizon = m + L * (count // period_hits + 2)
        else:
            horizon = max(upto, m) + L + 1
        word = np.frombuffer(s.digits(horizon), dtype=np.uint8)
        hits = (np.flatnonzero(np.isin(word, accept)) + 1).tolist()
    elif isinstance(s, SparseDigits) and (s.off not in accept):
        if s.on not in accept:
            _finite([])
        hits = []
        p = s.base**s.start
        while (count is not None and len(hits) <= count) or (upto is not None and (not hits or hits[-1] <= upto)):
            hits.append(p)
            p *= s.base
    else:
        hits = []
        j = 1
        while (count is not None and len(hits) < count) or (upto is not None and (not hits or hits[-1] <= upto)):
            j = s.find(j, accept)
            if j is None:
                _finite(hits)
            hits.append(j)
            j += 1
    if count is not None:
        return hits[:count]
    cut = next(i for i, a in enumerate(hits) if a > upto)
    return hits[:cut + 1]


def _finite(hits):
    raise PointError(f"anchor condition holds only finitely often (found {len(hits)})")


def index_seq(s, kind, count: int, r: Optional[int] = None) -> IndexSeq:
    """First ``count`` positions satisfying the digit condition of ``kind``."""
    s = as_stream(s, r)
    kind = IndexKind(kind)
    return IndexSeq(kind, tuple(_anchors(s, kind, count=count)))


def _terms(s: DigitStream, side: Side, sign: Sign, anchors: list[int]) -> list[CriterionTerm]:
    horizon = anchors[-2] if len(anchors) > 1 else 0
    sums = np.cumsum(_signs_from_resolved(resolved_digits(s, horizon), s.radix),
                     dtype=np.int64) if horizon else np.zeros(0, np.int64)
    r = s.radix
    out = []
    for a, b in zip(anchors, anchors[1:]):
        gap = b - a
        S = int(sums[a - 1])
        slack = gap - (math.log(gap, r) if gap > 1 else 0.0)
        out.append(CriterionTerm(a, S, gap, S - slack if sign is Sign.PLUS else S + slack))
    return out


def criterion_sequence(s, side, sign, count: int, r: Optional[int] = None) -> list[CriterionTerm]:
    """The first ``count`` terms of the (side, sign) infinite-derivative criterion."""
    s = as_stream(s, r)
    side, sign = Side(side), Sign(sign)
    _require_generic(s, "criterion_sequence")
    return _terms(s, side, sign, _anchors(s, ANCHORS[side, sign], count=count + 1))


def criterion_upto(s: DigitStream, side, sign, horizon: int) -> list[CriterionTerm]:
    """All criterion terms whose anchor is at most ``horizon``."""
    side, sign = Side(side), Sign(sign)
    _require_generic(s, "criterion_upto")
    return _terms(s, side, sign, _anchors(s, ANCHORS[side, sign], upto=horizon))


# ------------------------------------------------------------------ verdicts

def to_periodic(s: DigitStream) -> Optional[PeriodicDigits]:
    """The equivalent eventually periodic stream, when the rule makes one."""
    if isinstance(s, PeriodicDigits):
        return s
    if isinstance(s, SparseDigits) and s.on == s.off:
        return PeriodicDigits(s.radix, b"", bytes([s.off]))
    return None


def period_drift(s: PeriodicDigits) -> int:
    """Sum of the derivative signs over one period of the tail."""
    m, L = len(s.preperiod), len(s.period)
    res = resolved_digits(s, m + L)
    return int(_signs_from_resolved(res[m:], s.radix).sum())


def certify(s, r: Optional[int] = None) -> tuple[Verdict, Verdict]:
    """Certified (left, right) verdicts for points of D, D~, or rational points."""
    s = as_stream(s, r)
    cls = classify_point(s)
    L, R = Side.LEFT, Side.RIGHT
    if cls is PointClass.IN_D:
        c = Certified("point of D")
        return Verdict(L, Result.MINUS_INFINITY, c), Verdict(R, Result.PLUS_INFINITY, c)
    if cls is PointClass.IN_DTILDE:
        c = Certified("point of D~")
        return Verdict(L, Result.PLUS_INFINITY, c), Verdict(R, Result.MINUS_INFINITY, c)
    ep = to_periodic(s)
    if ep is None:
        raise PointError("only eventually periodic streams can be certified; "
                         "use heuristic_verdict")
    drift = period_drift(ep)
    c = Certified("period drift", drift=drift, period=len(ep.period))
    if drift > 0:
        res = Result.PLUS_INFINITY
    elif drift < 0:
        res = Result.MINUS_INFINITY
    else:
        res = Result.NOT_INFINITE
    return Verdict(L, res, c), Verdict(R, res, c)


def _window(values) -> list:
    k = max(1, ceil(len(values) / 4))
    return values[-k:]


def _trend(s: DigitStream, side: Side, sign: Sign, horizon: int):
    """(diverges, window_min, window_max) for one criterion."""
    checkpoints = [max(1, horizon >> k) for k in (3, 2, 1, 0)]
    terms = criterion_upto(s, side, sign, horizon)
    stats = []
    for cp in checkpoints:
        vals = [t.value for t in terms if t.anchor <= cp]
        if not vals:
            return False, math.nan, math.nan
        w = _window(vals)
        stats.append(min(w) if sign is Sign.PLUS else max(w))
    w = _window([t.value for t in terms])
    if sign is Sign.PLUS:
        ok = all(a < b for a, b in zip(stats, stats[1:])) and stats[-1] > TREND_THRESHOLD
    else:
        ok = all(a > b for a, b in zip(stats, stats[1:])) and stats[-1] < -TREND_THRESHOLD
    return ok, min(w), max(w)


def heuristic_verdict(s, depth: int, r: Optional[int] = None) -> tuple[Verdict, Verdict]:
    """Trend verdicts from criterion terms with anchors up to ``10**depth``.

    A plus criterion is declared divergent when the minimum over the last
    quarter of its terms exceeds ``TREND_THRESHOLD`` and these minima grow
    strictly across the dyadic checkpoints ``H/8, H/4, H/2, H`` (``H`` the
    horizon); minus criteria mirror this with maxima.
    """
    s = as_stream(s, r)
    if depth < 1:
        raise PointError("depth must be >= 1")
    _require_generic(s, "heuristic_verdict")
    horizon = 10**depth
    out = []
    for side in (Side.LEFT, Side.RIGHT):
        up, up_lo, up_hi = _trend(s, side, Sign.PLUS, horizon)
        down, dn_lo, dn_hi = _trend(s, side, Sign.MINUS, horizon)
        if up:
            res, info = Result.PLUS_INFINITY, (Sign.PLUS, up_lo, up_hi)
        elif down:
            res, info = Result.MINUS_INFINITY, (Sign.MINUS, dn_lo, dn_hi)
        else:
            res, info = Result.NOT_INFINITE, (Sign.PLUS, up_lo, up_hi)
        out.append(Verdict(side, res, Heuristic(depth, info[0].value, info[1], info[2])))
    return out[0], out[1]


# -------------------------------------------------------------------- probes

@dataclass(frozen=True)
class ProbeStep:
    """One difference quotient ``(f(target) - f(x)) / (target - x)``."""

    level: int
    target: Fraction
    h: Enclosure
    quotient: Enclosure


def left_grid_point(s: DigitStream, n: int) -> Fraction:
    """Largest point of ``D_n`` strictly below the point."""
    r = s.radix
    scale = r ** (n - 1)
    if s.is_periodic:
        j = math.ceil(s.value() * scale) - 1
        if j < 0:
            raise PointError("no grid point to the left of 0")
        return Fraction(j, scale)
    return Fraction(word_to_int(s.digits(n - 1), r), scale)


def _quotient(s: DigitStream, target: Fraction, level: int) -> tuple[Enclosure, Enclosure]:
    r = s.radix
    f_t = eval_exact(target, r)
    if s.is_periodic:
        x = s.value()
        h = abs(target - x)
        return Enclosure.point(h), Enclosure.point((f_t - eval_exact(x, r)) / (target - x))
    # find the scale p of h ~ r**-p, then evaluate with N = p + 64 digits
    M = level + 64
    while True:
        dx = Enclosure.point(target) - point_bounds(s, M)
        if dx.lo > 0 or dx.hi < 0:
            break
        if M > 4 * LOOKAHEAD_CAP:
            raise LookaheadCapError(f"step to {target} not resolved within {M} digits")
        M *= 2
    h = dx if dx.lo > 0 else Enclosure(-dx.hi, -dx.lo)
    p = 0
    while h.lo * r ** (p + 1) < 1:
        p += 1
    N = max(M, p + 64)
    dx = Enclosure.point(target) - point_bounds(s, N)
    h = dx if dx.lo > 0 else Enclosure(-dx.hi, -dx.lo)
    q = (Enclosure.point(f_t) - eval_partial(s, r, N)) / dx
    return h, q


def quotient_probe(s, side, steps: int, r: Optional[int] = None,
                   max_level: int = LOOKAHEAD_CAP) -> list[ProbeStep]:
    """Difference quotients of ``f_r`` along the exact grid ladders.

    Right: steps ``h`` run over the distinct values of ``d_j``, the distance
    to the next point of ``D_j`` or ``D~_j``. Left: over the distinct
    distances to the largest point of ``D_j`` strictly below the point.
    """
    s = as_stream(s, r)
    side = Side(side)
    out: list[ProbeStep] = []
    last = None
    for level in range(1, max_level + 1):
        if len(out) >= steps:
            break
        try:
            target = (next_grid_point(s, level) if side is Side.RIGHT
                      else left_grid_point(s, level))
        except PointError:
            if level == 1:
                raise
            continue
        if target == last:
            continue
        last = target
        h, q = _quotient(s, target, level)
        out.append(ProbeStep(level, target, h, q))
    if not out:
        raise PointError("degenerate ladder")
    return out


def component_bracket(s, n: int, r: Optional[int] = None) -> tuple[Fraction, int, Fraction]:
    """Chord slopes to both ends of the ``D_n`` gap around a generic rational point.

    Returns ``(slope_to_right_end, S_n, slope_to_left_end)``; the first
    never exceeds ``S_n`` and the last is never below it.
    """
    s = as_stream(s, r)
    _require_generic(s, "component_bracket")
    x = s.value()
    r = s.radix
    a = left_grid_point(s, n)
    b = a + Fraction(1, r ** (n - 1))
    fx = eval_exact(x, r)
    S = int(deriv_signs(s, n).S)
    return (eval_exact(b, r) - fx) / (b - x), S, (eval_exact(a, r) - fx) / (a - x)


def grid_ladder(s: DigitStream, count: int) -> list[Fraction]:
    """``[d_1, ..., d_count]`` for a rational point."""
    x = s.value()
    return [next_grid_point(s, j) - x for j in range(1, count + 1)]


def series_ladder_step(s, n: int, r: Optional[int] = None) -> Fraction:
    """Right step ``h_n`` of the series-to-quotient ladder at a generic rational point.

    The ``d_j`` ladder splits into constant blocks ``(m_k, m_{k+1}]`` with
    common target ``x_{k+1}``. At a block end ``h_n = d_n``. Inside a block
    whose target is a midpoint of ``D_{m_{k+1}}`` every sign in the block is
    ``+1`` and the step is ``d_{m_{k+1}}``. Otherwise only the first sign of
    the block can be ``+1`` and the step is the previous block's
    ``d_{m_k}``; this also covers the even-radix case of a target that is a
    midpoint of ``D_{m_k + 1}`` and hence a grid point further down. For
    these steps the right quotient is at least ``S_n - r/(r-1) - 1``, except
    inside the first block when its target is not a midpoint (there is no
    previous block); ``d_n`` is returned there.
    """
    s = as_stream(s, r)
    _require_generic(s, "series_ladder_step")
    r = s.radix
    x = s.value()
    d = {}

    def dist(j):
        if j not in d:
            d[j] = next_grid_point(s, j) - x
        return d[j]

    if dist(n + 1) < dist(n):
        return dist(n)
    mk = n - 1
    while mk >= 1 and not dist(mk + 1) < dist(mk):
        mk -= 1
    end = n + 1
    while not dist(end + 1) < dist(end):
        end += 1
    target = x + dist(n)
    midpoint = (target * 2 * r ** (end - 1)).denominator == 1 and \
        (target * r ** (end - 1)).denominator != 1
    if midpoint or mk == 0:
        return dist(n)
    return dist(mk)


def ladder_blocks(s, upto: int, r: Optional[int] = None) -> list[int]:
    """Block ends ``m_1 < m_2 < ...`` of the ``d_j`` ladder up to ``upto``."""
    s = as_stream(s, r)
    x = s.value()
    d = [next_grid_point(s, j) - x for j in range(1, upto + 2)]
    return [j for j in range(1, upto + 1) if d[j] < d[j - 1]]


__all__ = [
    "Side", "Sign", "Result", "IndexKind", "Certified", "Heuristic", "Verdict",
    "IndexSeq", "CriterionTerm", "DerivTrace", "ProbeStep", "ANCHORS",
    "resolved_digits", "phi_r_map", "deriv_signs", "index_seq", "criterion_sequence",
    "criterion_upto", "to_periodic", "period_drift", "certify", "heuristic_verdict",
    "left_grid_point", "quotient_probe", "component_bracket", "grid_ladder",
    "series_ladder_step", "ladder_blocks",
]
