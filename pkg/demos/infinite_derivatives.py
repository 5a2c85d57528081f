"""
Where is the derivative infinite?
=================================

Off the grid points every summand has slope +1 or -1, read from the digits.
Their running sum S_n decides one-sided infinite derivatives. Eventually
periodic points are settled by the drift of S over one period; the sparse
point below (base 3, digit 0 at positions 10**k, 1 elsewhere) needs a
finite-depth trend test.
"""

# %%
from fractions import Fraction

from takagi import (SparseDigits, certify, criterion_sequence, deriv_signs, digits_of,
                    heuristic_verdict, quotient_probe)

# %%
# grid points: right derivative +inf, left derivative -inf
for v in certify(digits_of(Fraction(1, 4), 2)):
    print(v.side.value, v.result.value)

# %%
# 1/7 = 0.(001) in base 2: drift +1 per period, both sides +inf
seventh = digits_of(Fraction(1, 7), 2)
print(deriv_signs(seventh, 12).partial_sums)
print([v.result.value for v in certify(seventh)])

# %%
# difference quotients along the exact grid ladder grow without bound
for p in quotient_probe(seventh, "Right", 12):
    print(p.level, float(p.h.lo), float(p.quotient.lo))

# %%
# the sparse point: every slope is +1, yet the right criterion fails
x = SparseDigits(3, 10, 0, 1)
print(deriv_signs(x, 20).signs)
for t in criterion_sequence(x, "Right", "Plus", 4):
    print("right", t.anchor, t.gap, round(t.value, 2))
for t in criterion_sequence(x, "Left", "Plus", 12)[-3:]:
    print("left ", t.anchor, t.gap, round(t.value, 2))
left, right = heuristic_verdict(x, 4)
print(left.result.value, right.result.value)
