"""
Exact values of the Takagi-Van der Waerden functions
====================================================

f_r(x) is the sum of the distances from x to the grids k / r**(n-1).
At rational points the orbit x -> r x mod 1 cycles, so the value is an
exact rational.
"""

# %%
from fractions import Fraction

import numpy as np

from takagi import digits_of, dtilde_series, eval_exact, eval_partial

# %%
# a few exact values
for r in (2, 3, 10):
    for x in (Fraction(1, 3), Fraction(1, 7), Fraction(2, 5)):
        print(f"f_{r}({x}) = {eval_exact(x, r)}    digits {digits_of(x, r)}")

# %%
# truncating the series: the enclosure shrinks like r**-N
x = Fraction(5, 17)
for N in (5, 10, 20, 40):
    enc = eval_partial(x, 3, N)
    print(N, float(enc.lo), float(enc.hi), float(enc.width))

# %%
# the distances to the grid midpoints add up to the complementary series
r = 5
print(dtilde_series(x, r) + eval_exact(x, r), Fraction(r, 2 * (r - 1)))

# %%
# plot-ready samples on the grid j/q (exact values, cast to float at the end)
q = 243
xs = np.arange(q + 1) / q
ys = np.array([float(eval_exact(Fraction(j, q), 3)) for j in range(q + 1)])
print("max of f_3 on the grid:", ys.max(), "at x =", xs[ys.argmax()])
