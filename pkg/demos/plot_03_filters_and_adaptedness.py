"""
Filters and adaptedness
=======================

A filter attaches a signed measure to every ball.  Image stencils are the
familiar case.  The adaptedness constant ``M`` bounds the total variation
of each measure against the underlying measure on every ball intersection,
and it is the price a filter pays over plain averaging.
"""

# %%
from metriconv import adaptedness_constant, builtin_stencil, filter_from_stencil, grid, rn_density

space = grid(8, 8)
for name in ("gaussian3x3", "box:1", "prewitt_x"):
    f = filter_from_stencil(space, builtin_stencil(name))
    print(f"{name:12s} M = {adaptedness_constant(space, f).M}")

# %%
# For the Gaussian the largest density is the central weight 4/16, and the
# constant matches it.
gauss = filter_from_stencil(space, builtin_stencil("gaussian3x3"))
print(sorted(set(rn_density(space, gauss, 27).values())))

# %%
# Every subset of a ball satisfies ``|mu_x|(F) <= E M mu(F)``.
from metriconv import check_variation_lemma

rep = check_variation_lemma(space, gauss, 27)
print(rep.checked, "subsets, worst ratio", round(rep.max_ratio, 4), "holds:", rep.holds)

# %%
# Filters from explicit atoms work on any space.
from metriconv import Filter, from_distance_matrix

tri = from_distance_matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]], [1.0, 2.0, 4.0])
f = Filter.from_atoms(tri, 1.0, "closed", {0: {0: 1.0, 1: -3.0}, 1: {2: 2.0}, 2: {}})
print("M =", adaptedness_constant(tri, f).M)
