"""
Two ways a bound can fail
=========================

Convolution bounds must depend on the measure, and filters must be
adapted.  Two small spaces make this concrete.
"""

# %%
# Big balls: point ``(0, n)`` carries weight ``n``.  Convolving the
# indicator of ``(1/2, n)`` gains a factor ``n + 1`` in ``L^1``.
from metriconv import reproduce_example

out = reproduce_example("bigballs", 8, 1)
for row in out["rows"]:
    print(row["n"], row["norm_f"], row["norm_conv_f"], row["norm_conv_g_inf"])

# %%
# Tiny balls: a point of weight zero is invisible to ``L^1`` but a filter
# can still put mass on it.
print(reproduce_example("tinyballs"))
