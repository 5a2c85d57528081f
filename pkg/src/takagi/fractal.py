"""Self-similar subsets of the infinite-derivative sets.

For odd ``n >= 3`` the alphabet ``B_n^+`` (``B_n^-``) holds the nonzero
length-``n`` digit words (``B_n^-`` also drops the all-``(r-1)`` word, the
mirror image of the zero word) whose last digit is not the middle one and whose
``phi_r``-resolved digits have at least one more digit below (above) the
middle than above (below) it. The attractor ``A_n^+`` of the maps
``x -> d + x / r**n``, ``d`` in ``B_n^+``, is the set of points whose every
length-``n`` digit block lies in the alphabet; each block then contributes
drift at least one to the sign series.

Counts: ``#B_n^+ = #B_n^- = r**(n-1) (r-1)/2 - 1`` for odd r and
``(r**n - 2)/2`` for even r.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import log
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .derivatives import Sign
from .digits import (DIGIT_CHARS, PeriodicDigits, PointClass, check_radix, classify_point,
                     middle_digit)
from .errors import IntervalCapError, PointError

INTERVAL_CAP = 10**7
ENUM_CAP = 5 * 10**7

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _check_block(n: int, r: int) -> int:
    r = check_radix(r)
    if n < 3 or n % 2 == 0:
        raise PointError(f"block length must be an odd integer >= 3, got {n}")
    return r


def _resolved_columns(words: np.ndarray, r: int, tail: int = 0) -> np.ndarray:
    """phi_r applied row-wise; a trailing middle run resolves to ``tail``."""
    mid = middle_digit(r)
    if mid is None:
        return words
    out = words.copy()
    carry = np.full(words.shape[0], tail, dtype=words.dtype)
    for j in range(words.shape[1] - 1, -1, -1):
        col = words[:, j]
        carry = np.where(col == mid, carry, col)
        out[:, j] = carry
    return out


def block_drift(words: np.ndarray, r: int) -> np.ndarray:
    """``O_n - I_n`` of the resolved words (one value per row)."""
    res = _resolved_columns(words, r).astype(np.int16)
    return (2 * res < r - 1).sum(axis=1) - (2 * res > r - 1).sum(axis=1)


def _as_rows(words: Iterable, n: int, r: int) -> np.ndarray:
    rows = []
    for w in words:
        if isinstance(w, str):
            w = [DIGIT_CHARS.index(c) for c in w.lower()]
        w = list(w)
        if len(w) != n or any(not 0 <= d < r for d in w):
            raise PointError(f"invalid length-{n} base-{r} word {w!r}")
        rows.append(w)
    return np.array(rows, dtype=np.uint8).reshape(len(rows), n)


def _in_alphabet(rows: np.ndarray, r: int, sign: Sign) -> np.ndarray:
    mid = middle_digit(r)
    drift = block_drift(rows, r)
    ok = rows.any(axis=1)
    if sign is Sign.MINUS:
        # mirror of z > 0: the all-(r-1) word (the point 1) is left out
        ok &= (rows != r - 1).any(axis=1)
    if mid is not None:
        ok &= rows[:, -1] != mid
    return ok & (drift >= 1 if sign is Sign.PLUS else drift <= -1)


@dataclass(frozen=True)
class WordSet:
    """Digit alphabet ``B_n^±``; ``words`` rows are in increasing numeric order."""

    n: int
    radix: int
    sign: Sign
    words: np.ndarray

    def __len__(self):
        return self.words.shape[0]

    def values(self) -> list[int]:
        """Word values as integers (the point is ``value / r**n``)."""
        powers = [self.radix ** (self.n - 1 - j) for j in range(self.n)]
        if self.radix**self.n < 2**62:
            return (self.words.astype(np.int64) @ np.array(powers, dtype=np.int64)).tolist()
        return [sum(int(d) * p for d, p in zip(row, powers)) for row in self.words.tolist()]

    def strings(self) -> list[str]:
        return ["".join(DIGIT_CHARS[d] for d in row) for row in self.words.tolist()]

    def __contains__(self, word) -> bool:
        row = _as_rows([word], self.n, self.radix)
        return bool(_in_alphabet(row, self.radix, self.sign)[0])


def enum_B(n: int, r: int, sign=Sign.PLUS) -> WordSet:
    """Brute-force enumeration of ``B_n^±`` over all ``r**n`` words."""
    r = _check_block(n, r)
    sign = Sign(sign)
    total = r**n
    if total > ENUM_CAP:
        raise IntervalCapError(f"{total} words exceed the enumeration cap {ENUM_CAP}")
    idx = np.arange(total, dtype=np.int64)
    words = np.empty((total, n), dtype=np.uint8)
    for j in range(n):
        words[:, n - 1 - j] = idx % r
        idx //= r
    keep = _in_alphabet(words, r, sign)
    return WordSet(n, r, sign, words[keep])


def count_B(n: int, r: int, sign=Sign.PLUS) -> int:
    """``#B_n^±`` by dynamic programming over (carried sign, running drift).

    Digits are scanned right to left so that a middle digit can pick up the
    sign of the next non-middle one.
    """
    r = _check_block(n, r)
    sign = Sign(sign)
    below = r // 2
    above = r // 2
    middle = r % 2
    states = {(1, 0): 1}
    for pos in range(n, 0, -1):
        nxt: dict = {}
        for (carry, total), c in states.items():
            for s, mult in ((1, below), (-1, above)):
                key = (s, total + s)
                nxt[key] = nxt.get(key, 0) + c * mult
            if middle and pos != n:
                key = (carry, total + carry)
                nxt[key] = nxt.get(key, 0) + c
        states = nxt
    if sign is Sign.PLUS:
        # the all-zero word has drift n but is excluded (z > 0)
        return sum(c for (_, t), c in states.items() if t >= 1) - 1
    # the all-(r-1) word has drift -n and is excluded by symmetry
    return sum(c for (_, t), c in states.items() if t <= -1) - 1


def count_formula(n: int, r: int) -> int:
    r = _check_block(n, r)
    if r % 2:
        return r ** (n - 1) * (r - 1) // 2 - 1
    return (r**n - 2) // 2


class DimBounds(NamedTuple):
    exact_ratio: float
    lemma_bound: float
    count: int


def dim_bounds(n: int, r: int, sign=Sign.PLUS) -> DimBounds:
    """Similarity dimension ``log #B / (n log r)`` and the closed-form lower bound."""
    r = _check_block(n, r)
    count = count_B(n, r, sign)
    exact = log(count) / (n * log(r))
    if r % 2:
        bound = ((n - 1) * log(r) - 1) / (n * log(r))
    else:
        bound = 1 - (2 + log(2)) / (n * log(r))
    return DimBounds(exact, bound, count)


@dataclass(frozen=True)
class IntervalSet:
    """Intervals ``[s / scale, (s + 1) / scale]`` for the sorted integers ``s``.

    All intervals share the length ``1 / scale``. Generation-``K``
    approximations of an attractor are stored unmerged; distinct
    generation intervals only ever meet at endpoints.
    """

    starts: np.ndarray
    scale: int
    radix: int
    depth: int = 0

    @classmethod
    def unit(cls, r: int) -> "IntervalSet":
        return cls(np.zeros(1, dtype=np.int64), 1, check_radix(r), 0)

    def __len__(self):
        return len(self.starts)

    @property
    def length(self) -> Fraction:
        return Fraction(1, self.scale)

    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        return [(Fraction(int(s), self.scale), Fraction(int(s) + 1, self.scale))
                for s in self.starts]

    def endpoint_rows(self) -> list[tuple[int, int, int, int]]:
        """``(lo_num, lo_den, hi_num, hi_den)`` per interval, reduced."""
        rows = []
        for lo, hi in self.intervals():
            rows.append((lo.numerator, lo.denominator, hi.numerator, hi.denominator))
        return rows

    def same_set(self, other: "IntervalSet") -> bool:
        return (self.scale == other.scale
                and np.array_equal(np.asarray(self.starts, dtype=object),
                                   np.asarray(other.starts, dtype=object)))


def _starts_dtype(scale: int):
    return np.int64 if scale < 2**62 else object


def ifs_approx(n: int, r: int, sign=Sign.PLUS, K: int = 1,
               cap: int = INTERVAL_CAP) -> IntervalSet:
    """Depth-``K`` image of [0, 1] under the maps ``x -> d + x / r**n``, d in ``B_n^±``."""
    r = _check_block(n, r)
    if K < 1:
        raise PointError("depth K must be >= 1")
    alphabet = enum_B(n, r, sign)
    if len(alphabet) ** K > cap:
        raise IntervalCapError(f"{len(alphabet)}**{K} intervals exceed the cap {cap}")
    base = r**n
    dtype = _starts_dtype(base**K)
    vals = np.array(alphabet.values(), dtype=dtype)
    starts = np.zeros(1, dtype=dtype)
    for _ in range(K):
        starts = (starts[:, None] * base + vals[None, :]).ravel()
    return IntervalSet(starts, base**K, r, K)


def apply_maps(iset: IntervalSet, alphabet: WordSet) -> IntervalSet:
    """``union_d (d + iset / r**n)``; one more IFS generation."""
    base = iset.radix**alphabet.n
    scale = iset.scale * base
    dtype = _starts_dtype(scale)
    vals = np.array([v * iset.scale for v in alphabet.values()], dtype=dtype)
    starts = (vals[:, None] + np.asarray(iset.starts, dtype=dtype)[None, :]).ravel()
    return IntervalSet(np.sort(starts), scale, iset.radix, iset.depth + 1)


def box_counts(iset: IntervalSet, m_list: Sequence[int]) -> list[int]:
    """Number of grid cells of size ``r**-m`` whose interior meets the set."""
    if not len(iset):
        raise PointError("empty interval set")
    counts = []
    for m in m_list:
        cells = iset.radix**m
        if iset.scale * cells < 2**62:
            st = np.asarray(iset.starts, dtype=np.int64)
            lo = st * cells // iset.scale
            hi = -((-(st + 1) * cells) // iset.scale) - 1
            # starts are sorted, so a running maximum of hi clips the overlaps
            prev = np.concatenate(([-1], np.maximum.accumulate(hi)[:-1]))
            lo = np.maximum(lo, prev + 1)
            counts.append(int(np.clip(hi - lo + 1, 0, None).sum()))
            continue
        total, reach = 0, -1
        for st in iset.starts:
            lo = int(st) * cells // iset.scale
            hi = -((-(int(st) + 1) * cells) // iset.scale) - 1
            lo = max(lo, reach + 1)
            if hi >= lo:
                total += hi - lo + 1
                reach = hi
        counts.append(total)
    return counts


def box_count_dim(iset: IntervalSet, m_list: Sequence[int]) -> float:
    """Least-squares slope of ``log N(m)`` against ``m log r``."""
    m_list = list(m_list)
    if len(m_list) < 2:
        raise PointError("need at least two grid exponents")
    counts = box_counts(iset, m_list)
    x = np.array(m_list, dtype=float) * log(iset.radix)
    y = np.log(np.array(counts, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def membership_witness(n: int, r: int, sign, address: Sequence) -> PeriodicDigits:
    """The point whose length-``n`` blocks cycle through ``address``."""
    r = _check_block(n, r)
    sign = Sign(sign)
    if not len(address):
        raise PointError("address must hold at least one word")
    rows = _as_rows(address, n, r)
    bad = ~_in_alphabet(rows, r, sign)
    if bad.any():
        raise PointError(f"address letter {rows[int(np.argmax(bad))].tolist()} "
                         f"is not in B_{n}^{'+' if sign is Sign.PLUS else '-'}")
    stream = PeriodicDigits(r, b"", rows.ravel().tobytes())
    if classify_point(stream) is not PointClass.GENERIC:
        raise PointError(f"address gives {stream}, a point of D")
    return stream


# ---------------------------------------------------------------- Monte Carlo

def splitmix64(states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One SplitMix64 step per lane: returns ``(new_states, outputs)``."""
    states = states + _GOLDEN
    z = states.copy()
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return states, z ^ (z >> np.uint64(31))


def random_digits(r: int, N: int, seeds: np.ndarray) -> np.ndarray:
    """``N`` digits per seed, digit ``k`` being the ``k``-th SplitMix64 output mod r."""
    states = np.asarray(seeds, dtype=np.uint64).copy()
    out = np.empty((len(states), N), dtype=np.uint8)
    for k in range(N):
        states, z = splitmix64(states)
        out[:, k] = z % np.uint64(r)
    return out


def walk_sums(digits: np.ndarray, r: int) -> np.ndarray:
    """``S_N`` per row, the last column only serving as lookahead."""
    res = _resolved_columns(digits, r)[:, :-1].astype(np.int16)
    return (2 * res < r - 1).sum(axis=1) - (2 * res > r - 1).sum(axis=1)


def sample_null_measure(r: int, N: int, samples: int, seed: int = 1,
                        chunk: int = 20000, workers: int = 1) -> dict:
    """Distribution of ``S_N`` over uniformly random digit words.

    Sample ``i`` draws ``N + 1`` digits from SplitMix64 seeded with
    ``seed ^ i``; the extra digit resolves trailing middle runs (a run that
    still reaches the end resolves as if followed by 0). Chunks may run on
    ``workers`` threads; every sample depends only on its own index, so the
    result does not depend on the worker count.
    """
    r = check_radix(r)
    if samples < 1 or N < 1:
        raise PointError("samples and N must be >= 1")
    base = np.uint64(seed & (2**64 - 1))

    def run(lo):
        idx = np.arange(lo, min(samples, lo + chunk), dtype=np.uint64)
        return walk_sums(random_digits(r, N + 1, base ^ idx), r)

    starts = range(0, samples, chunk)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(lo) for lo in starts]
    sums = np.concatenate(parts).astype(np.int64)
    root = np.sqrt(N)
    return {
        "r": r, "N": N, "samples": samples, "seed": seed,
        "mean": float(sums.mean()),
        "variance": float(sums.var()),
        "tails": {c: float(np.mean(np.abs(sums) > c * root)) for c in (2, 3, 4)},
    }


__all__ = [
    "WordSet", "IntervalSet", "DimBounds", "enum_B", "count_B", "count_formula",
    "dim_bounds", "ifs_approx", "apply_maps", "box_counts", "box_count_dim",
    "membership_witness", "splitmix64", "random_digits", "walk_sums",
    "sample_null_measure", "block_drift",
]
