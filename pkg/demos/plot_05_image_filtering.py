"""
Filtering a grayscale image
===========================

A PGM image is a grid with counting measure.  Convolving it with a stencil
is a filter convolution, and the luminosity bound says the output mass is
at most ``M * sup mu(B) * E`` times the input mass.
"""

# %%
import numpy as np

from metriconv import GrayImage, builtin_stencil, convolve_image, read_image, write_image

yy, xx = np.mgrid[0:32, 0:32]
px = (127 + 120 * np.sin(xx / 4.0) * np.cos(yy / 5.0)).astype(np.uint8)
img = GrayImage(px)

# %%
res = convolve_image(img, builtin_stencil("gaussian3x3"))
print(res.report.constants)
print("L1 in", int(px.sum()), "L1 out", res.report.lhs, "bound", res.report.rhs)

# %%
# Edge detection goes negative, so without clamping it is not an image.
edges = convolve_image(img, builtin_stencil("prewitt_x"), clamp=False)
print("raw range", edges.raw.min(), edges.raw.max(), "image:", edges.image)

# %%
# PGM files round trip byte for byte.
data = write_image(res.image)
assert write_image(read_image(data)) == data
print(data[:15])
