"""How the corrected estimator moves mass onto empty cells.

Every empty cell receives the same small probability ``a``; the observed
cells are deflated through the exponent ``b`` so the vector still sums to
one.  This script walks through the admissible region for the rivers counts.
"""

import numpy as np

from sparsegof.corrections import (
    CorrectionParams,
    a_bounds,
    b_bounds,
    choose_ab,
    cond2_check,
    corrected_estimator,
    sparsity_stats,
)
from sparsegof.tables import flatten, load_builtin

counts = flatten(load_builtin("rivers"))
stats = sparsity_stats(counts)
b_min, b_max = b_bounds(counts, stats)
print(f"n={counts.n}, R={counts.R}, c={counts.c}")
print(f"b must lie in [{b_min:.4f}, {b_max:g}]")

# the admissible interval for a shrinks as b approaches 1
for b in np.linspace(b_min, 1.0, 5)[:-1]:
    a_lo, a_hi = a_bounds(b, counts, stats)
    print(f"  b={b:.4f}: a in [{a_lo:.5f}, {a_hi:.5f}]")

params = choose_ab(counts)
p = corrected_estimator(counts, params)
print(f"\nchosen: b={params.b:.4f}, a={params.a:.6f} (eps={params.eps:.2e})")
print("MLE      :", np.round(counts.mle(), 4))
print("corrected:", np.round(p, 4))
print(f"sum={p.sum():.15f}, every entry positive: {bool(np.all(p > 0))}")

# The zero cells stay rare enough that the observed vector is still the
# most likely sample under p.
print("zero cells at most p_j / n for every observed cell:", cond2_check(p, counts))

# Moving towards a=0, b=1 recovers the MLE.
near = corrected_estimator(counts, CorrectionParams(a=1e-9, b=1 - 1e-9))
print("max |p - MLE| near the corner:", float(np.max(np.abs(near - counts.mle()))))
