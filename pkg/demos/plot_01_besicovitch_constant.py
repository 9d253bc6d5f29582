"""
The equal-radius Besicovitch constant
=====================================

How many equal balls can pile up over one point when no ball may
contain another ball's center?  On a finite metric space the answer is an
exact integer, found by a maximum clique search at every critical radius.
"""

# %%
# A line has constant 2, the square grid with the max metric has 4.
import numpy as np

from metriconv import equal_radius_constant, from_distance_matrix, grid

line = from_distance_matrix(np.abs(np.subtract.outer(np.arange(6), np.arange(6))).astype(float))
print("line  E =", equal_radius_constant(line).value)

res = equal_radius_constant(grid(5, 5))
print("grid  E =", res.value, "at radius", res.radius, "over point", res.point)

# %%
# The witness is a concrete family.  Its centers are the four diagonal
# neighbours of the point, each far enough from the others.
from metriconv import check_family, multiplicity_at

fam = res.witness_family()
print("centers", fam.centers, "besicovitch:", check_family(grid(5, 5), fam).besicovitch)
print("multiplicity at the point:", multiplicity_at(grid(5, 5), fam, res.point))

# %%
# Taxicab and euclidean grids behave differently.
for p in (1, 2):
    print(f"p={p} grid E =", equal_radius_constant(grid(5, 5, p)).value)

# %%
# Open balls give the same constant, but the witnessing radius shifts to
# the next critical distance.
for kind in ("closed", "open"):
    r = equal_radius_constant(line, kind)
    print(kind, r.value, "radius", r.radius)

# %%
# The per-radius table shows where the maximum is reached.
print(equal_radius_constant(grid(4, 4)).per_radius)
