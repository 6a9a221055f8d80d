"""Empty cells disappear as the sample grows.

For a fixed, strictly positive probability vector the chance of seeing at
least one empty cell falls to zero with n.  The simulated curve is
checked against the exact inclusion-exclusion value.
"""

import itertools

from sparsegof import zero_count_decay

p = [0.05, 0.15, 0.3, 0.5]


def exact(n):
    total = 0.0
    for k in range(1, len(p)):
        for cells in itertools.combinations(range(len(p)), k):
            total += (-1) ** (k + 1) * (1 - sum(p[i] for i in cells)) ** n
    return total


print("    n   simulated   exact     se")
for pt in zero_count_decay(p, [5, 10, 20, 40, 80, 160], replicates=5000, seed=3):
    print(f"{pt.n:5d}   {pt.prob_any_zero:.4f}     {exact(pt.n):.4f}   {pt.standard_error:.4f}")
