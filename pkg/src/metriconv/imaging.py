"""Grayscale PGM images as functions on a pixel grid."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .filters import Stencil, adaptedness_constant, filter_convolve, filter_from_stencil
from .operators import sup_ball_measure
from .space import MetricMeasureSpace, grid
from .verify import RTOL, CertificationReport, e_constant

__all__ = [
    "GrayImage",
    "PGMError",
    "read_image",
    "write_image",
    "image_to_space",
    "convolve_image",
    "correlate_stencil",
    "clamp_pixels",
    "Convolved",
    "PLANE_LINF_E",
]

# equal radius constant of the plane with the sup norm; bounds every pixel grid
PLANE_LINF_E = 4

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


class PGMError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GrayImage:
    """``pixels[row, col]`` in ``[0, 255]``; ``binary`` selects P5 over P2 on write."""

    pixels: np.ndarray
    binary: bool = True

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("image must be a nonempty 2-D array")
        if px.min() < 0 or px.max() > 255:
            raise ValueError("pixel values must lie in [0, 255]")
        px = px.astype(np.uint8)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def read_image(data: bytes) -> GrayImage:
    """Parse an ASCII (P2) or binary (P5) PGM with maxval 255."""
    pos = 0
    fields = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise PGMError("malformed header: missing fields")
        fields.append(m.group(1))
        pos = m.end()
    magic, *nums = fields
    if magic not in (b"P2", b"P5"):
        raise PGMError(f"malformed header: unsupported magic {magic!r}")
    try:
        width, height, maxval = (int(v) for v in nums)
    except ValueError:
        raise PGMError("malformed header: non-integer dimensions") from None
    if width < 1 or height < 1:
        raise PGMError("malformed header: dimensions must be positive")
    if maxval != 255:
        raise PGMError(f"unsupported maxval {maxval}")
    count = width * height
    if magic == b"P5":
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise PGMError("malformed header: missing whitespace before raster")
        raster = data[pos + 1:pos + 1 + count]
        if len(raster) < count:
            raise PGMError(f"truncated payload: {len(raster)} of {count} bytes")
        px = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
        return GrayImage(px.copy(), binary=True)
    body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
    if len(body) < count:
        raise PGMError(f"truncated payload: {len(body)} of {count} values")
    try:
        vals = np.array([int(v) for v in body[:count]])
    except ValueError:
        raise PGMError("malformed payload: non-integer pixel") from None
    if vals.min() < 0 or vals.max() > 255:
        raise PGMError("malformed payload: pixel outside [0, 255]")
    return GrayImage(vals.reshape(height, width), binary=False)


def write_image(img: GrayImage) -> bytes:
    head = f"{'P5' if img.binary else 'P2'}\n{img.width} {img.height}\n255\n".encode()
    if img.binary:
        return head + img.pixels.tobytes()
    rows = "\n".join(" ".join(str(v) for v in row) for row in img.pixels.tolist())
    return head + rows.encode() + b"\n"


def image_to_space(img: GrayImage) -> tuple[MetricMeasureSpace, np.ndarray]:
    """Unit-spaced sup-norm grid with counting measure, and the pixel values on it."""
    space = grid(img.width, img.height, "inf")
    return space, img.pixels.astype(float).ravel()


def correlate_stencil(values: np.ndarray, stencil: Stencil) -> np.ndarray:
    """Stencil correlation of a 2-D array with zero padding (no reflection)."""
    h, w = values.shape
    k = stencil.radius
    padded = np.zeros((h + 2 * k, w + 2 * k))
    padded[k:k + h, k:k + w] = values
    out = np.zeros((h, w))
    for (dx, dy), wt in stencil.offsets.items():
        if wt:
            out += wt * padded[k + dy:k + dy + h, k + dx:k + dx + w]
    return out


def clamp_pixels(raw: np.ndarray) -> np.ndarray:
    """Round half away from zero, then clip to ``[0, 255]``."""
    rounded = np.sign(raw) * np.floor(np.abs(raw) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def _reduced_grid(width: int, height: int, radius: int) -> MetricMeasureSpace:
    # Every (x, y, s) configuration of a stencil filter depends only on pixel
    # distances to the border clipped at 2r+1, and a side of 4r+3 realizes all
    # of them, so adaptedness and ball measures agree with the full grid.
    side = 4 * radius + 3
    return grid(min(width, side), min(height, side), "inf")


class Convolved(NamedTuple):
    image: GrayImage | None
    report: CertificationReport
    raw: np.ndarray


def convolve_image(img: GrayImage, stencil: Stencil, clamp: bool = True,
                   exact_limit: int = 400) -> Convolved:
    """Apply ``stencil`` to every pixel and certify the luminosity bound.

    Returns the output image, a report checking
    ``||raw||_1 <= M sup mu(B) E ||input||_1``, and the raw values.  Without
    ``clamp`` the image is the rounded raw output, or None when some value
    leaves ``[0, 255]``.

    Images with at most ``exact_limit`` pixels go through the full filter
    pipeline with the exact constant ``E`` of the grid.  Larger images are
    correlated directly, take ``M`` and the ball measure from a reduced
    grid, and use ``E = 4``, the plane's constant, which bounds any grid.
    """
    n = img.width * img.height
    if n <= exact_limit:
        space, g = image_to_space(img)
        filt = filter_from_stencil(space, stencil)
        raw = filter_convolve(space, filt, g).reshape(img.height, img.width)
        E = e_constant(space, filt.kind).value
        e_source = "exact"
        ref_space = space
    else:
        g = img.pixels.astype(float).ravel()
        raw = correlate_stencil(img.pixels.astype(float), stencil)
        ref_space = _reduced_grid(img.width, img.height, stencil.radius)
        filt = filter_from_stencil(ref_space, stencil)
        E = PLANE_LINF_E
        e_source = "plane-linf"
    M = adaptedness_constant(ref_space, filt).M
    sup_mu = sup_ball_measure(ref_space, filt.radius, filt.kind)
    lhs = float(np.abs(raw).sum())
    rhs = M * sup_mu * E * float(np.abs(g).sum())
    ok = lhs <= rhs * (1 + RTOL)
    report = CertificationReport(
        "luminosity", f"{img.width}x{img.height} {stencil.name or 'stencil'}", lhs, rhs, "exact",
        {"E": E, "E_source": e_source, "M": M, "sup_ball_measure": sup_mu, "p": 1},
        ok, "certified" if ok else ("skipped" if math.isinf(M) else "violated"))
    if clamp:
        out = GrayImage(clamp_pixels(raw), img.binary)
    else:
        rounded = np.sign(raw) * np.floor(np.abs(raw) + 0.5)
        fits = rounded.min() >= 0 and rounded.max() <= 255
        out = GrayImage(rounded.astype(np.uint8), img.binary) if fits else None
    return Convolved(out, report, raw)
