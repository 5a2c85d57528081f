"""Exact evaluation and derivative analysis of the Takagi-Van der Waerden functions.

``f_r(x) = sum_{n>=1} dist(x, D_n)`` with ``D_n = {k / r**(n-1)}``. The
package evaluates ``f_r`` exactly at rationals, classifies one-sided
infinite derivatives from the base-``r`` digits, and builds self-similar
subsets on which the derivative is infinite.
"""

from .digits import (DigitStream, PeriodicDigits, PointClass, RuleDigits, SparseDigits,
                     as_fraction, as_stream, classify_point, digit_at, digits_of,
                     format_point, parse_point, prefix_value)
from .errors import (CapError, CycleCapError, GrammarError, IntervalCapError,
                     LookaheadCapError, PointError, TakagiError)
from .series import (Enclosure, d_n, dtilde_series, eval_exact, eval_partial, g_n,
                     phi_dist, tail_bound)
from .derivatives import (CriterionTerm, DerivTrace, IndexKind, IndexSeq, Result, Side,
                          Sign, Verdict, certify, criterion_sequence, deriv_signs,
                          heuristic_verdict, index_seq, phi_r_map, quotient_probe)
from .fractal import (IntervalSet, WordSet, box_count_dim, count_B, dim_bounds, enum_B,
                      ifs_approx, membership_witness, sample_null_measure)

__version__ = "0.1.0"
