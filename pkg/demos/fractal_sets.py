"""
Self-similar sets of infinite derivative
========================================

Blocks of n digits with a positive sign drift form an alphabet B_n^+; the
points built only from such blocks have derivative +inf on both sides.
Their dimension log #B / (n log r) tends to 1, while random points have
S_N of order sqrt(N) and almost never diverge.
"""

# %%
import math

from takagi import (box_count_dim, certify, dim_bounds, enum_B, ifs_approx, membership_witness,
                    sample_null_measure)

print(enum_B(3, 3).strings())

# %%
# dimension table (plot-ready)
for r in (2, 3):
    for n in (3, 5, 9, 15, 21):
        b = dim_bounds(n, r)
        print(r, n, b.count, round(b.exact_ratio, 4), round(b.lemma_bound, 4))

# %%
# box counting on the depth-3 approximation reproduces the similarity dimension
a = ifs_approx(3, 2, "Plus", 3)
print(len(a), box_count_dim(a, [3, 6, 9]), math.log(3) / (3 * math.log(2)))

# %%
# a point of the set, and its verdict
w = membership_witness(3, 3, "Plus", ["002", "102"])
print(w, [v.result.value for v in certify(w)])

# %%
# random digits: S_N looks like a random walk
for r in (2, 3):
    st = sample_null_measure(r, 400, 20000, seed=1)
    print(r, st["mean"], st["variance"], st["tails"])
