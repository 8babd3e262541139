"""Character tables, ordinary induction and Frobenius reciprocity.

Walks through the finite-group layer: build a symmetric group from
permutations, print its character table, induce the trivial character from
an order-2 subgroup and decompose the result.
"""

import numpy as np

from l2mult import (character_table, from_generators, induce_ordinary,
                    multiplicity, restrict_ordinary)

s3 = from_generators([(1, 0, 2), (0, 2, 1)])
print(f"group of order {s3.order} generated by two transpositions")

table = character_table(s3)
classes = table.classes
print("\nclass sizes:", classes.sizes)
print("character table (rows = irreducibles):")
for idx, chi in enumerate(table.irreducibles):
    row = "  ".join(f"{v.real:+.3f}" for v in chi.values)
    print(f"  chi_{idx} (deg {chi.degree}):  {row}")

# induce the trivial character of an order-2 subgroup: the coset
# permutation character of degree 3
sub = s3.subgroup_generated([s3.index_of((1, 0, 2))])
h_abs, _ = sub.abstract_group()
triv_h = character_table(h_abs).irreducibles[0]
perm_char = induce_ordinary(sub, triv_h)
print("\ninduced character values:", np.round(perm_char.values.real, 6))

print("decomposition of the induced character:")
for idx, chi in enumerate(table.irreducibles):
    m = multiplicity(chi, perm_char)
    if m:
        print(f"  chi_{idx} appears {m} time(s)")

# Frobenius reciprocity, numerically: <Ind chi, theta> = <chi, Res theta>
theta = table.irreducibles[2]
lhs = multiplicity(theta, perm_char)
rhs = multiplicity(triv_h, restrict_ordinary(theta, sub))
print(f"\nFrobenius reciprocity: {lhs} == {rhs}")
