"""
Averaging and convolution operators
===================================

Ball averages never grow the sup norm and grow the ``L^1`` norm by at most
the Besicovitch constant.  Metric convolution adds a factor of the largest
ball measure.
"""

# %%
import math

import numpy as np

from metriconv import assemble_kernel, certify_operator_bound, equal_radius_constant, operator_norm
from metriconv.space import critical_radii, from_distance_matrix

rng = np.random.default_rng(0)
pts = rng.random((25, 2))
dist = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
space = from_distance_matrix(dist, rng.uniform(0.2, 2.0, 25))
E = equal_radius_constant(space).value
print("E =", E)

# %%
# Exact norms for p = 1 and p = inf, a spectral upper estimate for p = 2.
worst = {1: 0.0, 2: 0.0, math.inf: 0.0}
for r in critical_radii(space)[1:]:
    op = assemble_kernel(space, "average", r)
    worst[1] = max(worst[1], operator_norm(op, 1).value)
    worst[math.inf] = max(worst[math.inf], operator_norm(op, math.inf).value)
    worst[2] = max(worst[2], operator_norm(op, 2, "spectral").value)
print({str(k): round(v, 4) for k, v in worst.items()}, "vs", {1: E, 2: round(E ** 0.5, 4), "inf": 1})

# %%
# The same comparison as a report, here for a convolution at one radius.
r = float(np.median(critical_radii(space)))
for p in (1, 2, 3, math.inf):
    rep = certify_operator_bound(space, "convolution", p, r, E=E)
    print(f"p={p}: lhs {rep.lhs:.4f} ({rep.lhs_kind}) <= rhs {rep.rhs:.4f}: {rep.status}")
