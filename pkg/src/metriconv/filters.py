"""Filters: one signed measure per center, supported in the ball around it.

All measures here are atomic, so a filter is stored as a map from centers to
atom weights and can be flattened into a matrix ``K[x, y] = mu_x({y})``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from .space import BallKind, MetricMeasureSpace, ball_mask, critical_radii

__all__ = [
    "SignedMeasureOnBall",
    "Filter",
    "Stencil",
    "Adaptedness",
    "AbsoluteContinuityError",
    "builtin_stencil",
    "filter_from_stencil",
    "filter_convolve",
    "total_variation",
    "adaptedness_constant",
    "rn_density",
    "load_filter",
    "tinyballs_filter",
]


class AbsoluteContinuityError(ValueError):
    """A filter atom sits on a point of zero measure."""

    def __init__(self, center: int, point: int, weight: float):
        self.center = center
        self.point = point
        self.weight = weight
        super().__init__(f"measure at center {center} has atom {weight!r} at mu-null point {point}")


@dataclass(frozen=True)
class SignedMeasureOnBall:
    center: int
    radius: float
    kind: BallKind
    atoms: Mapping[int, float]

    def mass(self, points=None) -> float:
        """Signed mass of a point set (all atoms if ``points`` is None)."""
        if points is None:
            return float(sum(self.atoms.values()))
        return float(sum(self.atoms.get(int(p), 0.0) for p in points))


def total_variation(nu: SignedMeasureOnBall) -> SignedMeasureOnBall:
    # atomic measures: the Jordan parts split atom by atom
    return SignedMeasureOnBall(nu.center, nu.radius, nu.kind, {y: abs(w) for y, w in nu.atoms.items()})


@dataclass(frozen=True, eq=False)
class Filter:
    radius: float
    kind: BallKind
    measures: Mapping[int, SignedMeasureOnBall]
    generator: str | None = None

    @classmethod
    def from_atoms(cls, space: MetricMeasureSpace, radius: float, kind: BallKind | str,
                   atoms: Mapping[int, Mapping[int, float]], generator: str | None = None) -> Filter:
        """Build a filter, checking every atom lies in its center's ball.

        Centers absent from ``atoms`` carry the zero measure.
        """
        kind = BallKind(kind)
        mask = ball_mask(space, radius, kind)
        measures = {}
        for x in range(space.n):
            a = {int(y): float(w) for y, w in atoms.get(x, {}).items()}
            for y in a:
                if not mask[x, y]:
                    raise ValueError(f"atom at {y} lies outside the ball around {x} of radius {radius}")
            measures[x] = SignedMeasureOnBall(x, radius, kind, a)
        return cls(radius, kind, measures, generator)

    def matrix(self, space: MetricMeasureSpace) -> np.ndarray:
        k = np.zeros((space.n, space.n))
        for x, m in self.measures.items():
            for y, w in m.atoms.items():
                k[x, y] = w
        return k

    def absolute(self) -> Filter:
        return Filter(self.radius, self.kind,
                      {x: total_variation(m) for x, m in self.measures.items()}, self.generator)

    def scaled(self, factor: float) -> Filter:
        return Filter(self.radius, self.kind,
                      {x: SignedMeasureOnBall(x, m.radius, m.kind, {y: factor * w for y, w in m.atoms.items()})
                       for x, m in self.measures.items()}, self.generator)

    def to_json(self) -> dict:
        return {"explicit": {
            "radius": self.radius,
            "kind": self.kind.value,
            "measures": {str(x): [[y, w] for y, w in sorted(m.atoms.items())]
                         for x, m in sorted(self.measures.items()) if m.atoms},
        }}


@dataclass(frozen=True)
class Stencil:
    """Weights on integer offsets ``(dcol, drow)`` around a pixel."""

    offsets: Mapping[tuple[int, int], float]
    radius: int = field(default=-1)
    name: str | None = None

    def __post_init__(self):
        reach = max((max(abs(dx), abs(dy)) for dx, dy in self.offsets), default=0)
        if self.radius < 0:
            object.__setattr__(self, "radius", reach)
        elif reach > self.radius:
            raise ValueError(f"stencil offset reaches {reach}, beyond nominal radius {self.radius}")

    @classmethod
    def from_matrix(cls, rows, scale=1, name: str | None = None) -> Stencil:
        """Stencil from a square odd-sized matrix centered on the pixel; row index is ``drow``."""
        m = len(rows)
        if m % 2 == 0 or any(len(r) != m for r in rows):
            raise ValueError("stencil matrix must be square with odd size")
        k = m // 2
        offsets = {(j - k, i - k): float(Fraction(rows[i][j]) * Fraction(scale))
                   for i in range(m) for j in range(m)}
        return cls(offsets, k, name)

    def total(self) -> float:
        return float(sum(self.offsets.values()))


def builtin_stencil(name: str, k: int | None = None) -> Stencil:
    """``gaussian3x3``, ``prewitt_x``, or ``box`` of half-width ``k`` (also ``"box:K"``)."""
    if name.startswith("box"):
        if ":" in name:
            k = int(name.split(":", 1)[1])
        if k is None or k < 0:
            raise ValueError("box stencil needs a half-width k >= 0")
        size = 2 * k + 1
        return Stencil.from_matrix([[1] * size for _ in range(size)], name=f"box:{k}")
    if name == "gaussian3x3":
        return Stencil.from_matrix([[1, 2, 1], [2, 4, 2], [1, 2, 1]], Fraction(1, 16), name)
    if name == "prewitt_x":
        return Stencil.from_matrix([[-1, 0, 1], [-1, 0, 1], [-1, 0, 1]], name=name)
    raise ValueError(f"unknown stencil {name!r}")


def _grid_norm(space: MetricMeasureSpace):
    p = (space.spec or {}).get("p", "inf")
    if p in ("inf", math.inf):
        return lambda dx, dy: float(max(abs(dx), abs(dy)))
    if int(p) == 1:
        return lambda dx, dy: float(abs(dx) + abs(dy))
    return lambda dx, dy: math.hypot(dx, dy)


def filter_from_stencil(space: MetricMeasureSpace, stencil: Stencil) -> Filter:
    """Lay a stencil on every pixel, dropping offsets that leave the grid.

    Dropped pixels would carry the value 0 under zero-padding, so truncation
    gives the same convolution values.  Zero stencil entries stay as atoms.
    """
    if space.grid_shape is None or space.coords is None:
        raise ValueError("stencil filters need a grid-backed space")
    width, height = space.grid_shape
    norm = _grid_norm(space)
    radius = max((norm(dx, dy) for dx, dy in stencil.offsets), default=0.0)
    atoms: dict[int, dict[int, float]] = {}
    for x, (c, r) in enumerate(space.coords.tolist()):
        row = {}
        for (dx, dy), w in stencil.offsets.items():
            cc, rr = c + dx, r + dy
            if 0 <= cc < width and 0 <= rr < height:
                row[rr * width + cc] = w
        atoms[x] = row
    return Filter.from_atoms(space, radius, BallKind.CLOSED, atoms, stencil.name)


def tinyballs_filter(space: MetricMeasureSpace) -> Filter:
    """``delta_0 + delta_1`` at both centers of the two-point space, closed radius 1."""
    return Filter.from_atoms(space, 1.0, BallKind.CLOSED, {0: {0: 1.0, 1: 1.0}, 1: {0: 1.0, 1: 1.0}},
                             "tinyballs")


def filter_convolve(space: MetricMeasureSpace, filt: Filter, g) -> np.ndarray:
    """``x -> sum_y g(y) mu_x({y})``; the space's measure plays no part."""
    g = np.asarray(g, dtype=float)
    if g.shape != (space.n,):
        raise ValueError(f"function must have {space.n} values, got shape {g.shape}")
    return filt.matrix(space) @ g


@dataclass(frozen=True)
class Adaptedness:
    M: float
    witness: tuple[int, int, float] | None

    @property
    def adapted(self) -> bool:
        return math.isfinite(self.M)

    def to_json(self) -> dict:
        return {"M": self.M, "adapted": self.adapted,
                "witness": None if self.witness is None else
                {"x": self.witness[0], "y": self.witness[1], "s": self.witness[2]}}


def _small_radii(space: MetricMeasureSpace, r: float, kind: BallKind) -> tuple[list[float], list[float]]:
    """Closed radii realizing every ``B(y, s)`` with ``0 < s <= r``, and a nominal ``s`` for each.

    Closed balls change only at critical radii and are singletons below the
    smallest one; an open ball of radius ``s`` equals the closed ball at the
    largest critical radius below ``s``.
    """
    crit = critical_radii(space)
    if kind is BallKind.CLOSED:
        closed = [0.0] + [d for d in crit if d <= r]
        return closed, closed
    closed = [0.0] + [d for d in crit if d < r]
    nominal = []
    for s in closed:
        above = [d for d in crit if d > s]
        nominal.append(min(above[0], r) if above else r)
    return closed, nominal


def adaptedness_constant(space: MetricMeasureSpace, filt: Filter) -> Adaptedness:
    """Largest ratio ``|mu_x|(B(y,s) & B(x,r)) / mu(B(y,s) & B(x,r))``.

    Runs over all centers ``x``, points ``y`` and radii ``0 < s <= r``.
    Empty intersections (0/0) are skipped; a positive numerator over a null
    denominator gives ``inf``.  Ties go to the smallest ``(x, y, s)``.
    """
    kind = BallKind(filt.kind)
    a = np.abs(filt.matrix(space))
    bx = ball_mask(space, filt.radius, kind)
    wb = bx * space.weights[None, :]
    closed, nominal = _small_radii(space, filt.radius, kind)
    best, wit = -math.inf, None
    for s_closed, s_nom in zip(closed, nominal):
        ys = (space.dist <= s_closed).astype(float)
        num = ys @ a.T  # [y, x]
        den = ys @ wb.T
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0),
                             np.where(num > 0, math.inf, -math.inf))
        top = float(ratio.max())
        if top == -math.inf or top < best:
            continue
        ys_idx, xs_idx = np.nonzero(ratio == top)
        cand = min(zip(xs_idx.tolist(), ys_idx.tolist()))
        if top > best or cand < wit[:2]:
            best, wit = top, (cand[0], cand[1], s_nom)
    if wit is None:
        return Adaptedness(0.0, None)
    return Adaptedness(best, wit)


def rn_density(space: MetricMeasureSpace, filt: Filter, x: int) -> dict[int, float]:
    """Density of ``|mu_x|`` against the space's measure on the ball around ``x``.

    Raises ``AbsoluteContinuityError`` if an atom sits on a null point.
    """
    kind = BallKind(filt.kind)
    members = np.flatnonzero(ball_mask(space, filt.radius, kind)[x])
    atoms = filt.measures[x].atoms
    out = {}
    for y in members.tolist():
        w = abs(atoms.get(y, 0.0))
        mu = float(space.weights[y])
        if mu > 0:
            out[y] = w / mu
        elif w != 0:
            raise AbsoluteContinuityError(x, y, atoms[y])
        else:
            out[y] = 0.0
    return out


def load_filter(obj: Mapping[str, Any] | str, space: MetricMeasureSpace) -> Filter:
    """Filter from its JSON description or a path to one.

    Accepts ``{"stencil": {"offsets": [[dx, dy, w], ...]}}``, a builtin stencil
    name under ``"stencil"``, or ``{"explicit": {"radius", "kind", "measures"}}``
    with ``measures`` mapping centers to ``[[y, w], ...]``.
    """
    if isinstance(obj, str):
        with open(obj) as fh:
            obj = json.load(fh)
    if "stencil" in obj:
        st = obj["stencil"]
        if isinstance(st, str):
            return filter_from_stencil(space, builtin_stencil(st))
        offsets = {(int(dx), int(dy)): float(w) for dx, dy, w in st["offsets"]}
        return filter_from_stencil(space, Stencil(offsets, name=st.get("name")))
    if "explicit" in obj:
        ex = obj["explicit"]
        atoms = {int(x): {int(y): float(w) for y, w in pairs} for x, pairs in ex["measures"].items()}
        return Filter.from_atoms(space, float(ex["radius"]), ex.get("kind", "closed"), atoms)
    raise ValueError("filter description needs a 'stencil' or 'explicit' entry")
