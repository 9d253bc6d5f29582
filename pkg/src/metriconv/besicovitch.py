"""Besicovitch families and the equal radius Besicovitch constant.

On a finite space the constant is a maximum over finitely many radii:
membership (``d <= r`` or ``d < r``) and center exclusion (``d > r`` or
``d >= r``) are both constant between consecutive distinct distances, so
only the critical radii need to be examined.  For each radius ``r`` and
witness point ``y`` the largest family is a maximum clique in the graph
on ``{u : y in B(u, r)}`` joining centers that exclude one another.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .space import Ball, BallKind, MetricMeasureSpace, critical_radii

__all__ = [
    "BesicovitchFamily",
    "FamilyReport",
    "EConstantResult",
    "check_family",
    "multiplicity_at",
    "equal_radius_constant",
    "maximal_subfamily",
    "max_clique",
]


@dataclass(frozen=True)
class BesicovitchFamily:
    balls: tuple[Ball, ...]
    kind: BallKind = BallKind.CLOSED

    @classmethod
    def equal_radius(cls, centers: Iterable[int], r: float, kind: BallKind | str = BallKind.CLOSED):
        kind = BallKind(kind)
        return cls(tuple(Ball(int(c), r, kind) for c in centers), kind)

    @property
    def centers(self) -> tuple[int, ...]:
        return tuple(b.center for b in self.balls)

    def __len__(self) -> int:
        return len(self.balls)


@dataclass(frozen=True)
class FamilyReport:
    besicovitch: bool | None = None
    besicovitch_violation: tuple[int, int] | None = None
    equal_radius: bool = True
    centered_cover: bool | None = None
    uncovered: tuple[int, ...] = ()
    uniformly_bounded: bool | None = None


def check_family(space: MetricMeasureSpace, family: BesicovitchFamily, besicovitch: bool = True,
                 centered_cover_of: Iterable[int] | None = None,
                 uniformly_bounded_by: float | None = None) -> FamilyReport:
    """Evaluate the requested predicates on a family of nominal balls.

    ``besicovitch_violation`` holds the first pair of ball indices where one
    ball contains the other's center.
    """
    balls = family.balls
    bes, viol = None, None
    if besicovitch:
        bes = True
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                if balls[i].contains(space, balls[j].center) or balls[j].contains(space, balls[i].center):
                    bes, viol = False, (i, j)
                    break
            if not bes:
                break
    cover, uncovered = None, ()
    if centered_cover_of is not None:
        centers = set(family.centers)
        uncovered = tuple(sorted(int(a) for a in centered_cover_of if int(a) not in centers))
        cover = not uncovered
    bounded = None
    if uniformly_bounded_by is not None:
        bounded = all(b.radius <= uniformly_bounded_by for b in balls)
    equal = len({b.radius for b in balls}) <= 1
    return FamilyReport(bes, viol, equal, cover, uncovered, bounded)


def multiplicity_at(space: MetricMeasureSpace, family: BesicovitchFamily, y: int) -> int:
    return sum(1 for b in family.balls if b.contains(space, y))


def maximal_subfamily(space: MetricMeasureSpace, points: Iterable[int], r: float,
                      kind: BallKind | str = BallKind.CLOSED) -> BesicovitchFamily:
    """Greedy maximal Besicovitch subfamily of ``{B(y, r) : y in points}``.

    Points are visited in ascending order and ``B(y, r)`` is kept iff ``y`` is
    not yet covered.  With equal radii an uncovered ``y`` is far from every
    kept center, and by symmetry every kept center is outside ``B(y, r)``,
    so the result is Besicovitch; it covers ``points`` by construction.
    """
    kind = BallKind(kind)
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    pts = sorted({int(p) for p in points})
    if not pts:
        raise ValueError("point set must be nonempty")
    kept: list[int] = []
    covered = np.zeros(space.n, dtype=bool)
    for y in pts:
        if covered[y]:
            continue
        kept.append(y)
        row = space.dist[y]
        covered |= (row <= r) if kind is BallKind.CLOSED else (row < r)
    return BesicovitchFamily.equal_radius(kept, r, kind)


# ---------------------------------------------------------------------------
# maximum clique on bitsets


def _color_classes(p: int, adj: Sequence[int]) -> tuple[list[int], list[int]]:
    """Greedy coloring of the vertices in bitset ``p``.

    Returns vertices in nondecreasing color order with their colors; each
    color class is independent, so a clique meets each class at most once.
    """
    order, colors = [], []
    color = 0
    uncolored = p
    while uncolored:
        color += 1
        q = uncolored
        while q:
            low = q & -q
            v = low.bit_length() - 1
            q &= ~low & ~adj[v]
            uncolored &= ~low
            order.append(v)
            colors.append(color)
    return order, colors


def _greedy_clique(p: int, adj: Sequence[int]) -> list[int]:
    clique = []
    while p:
        best, best_deg = -1, -1
        q = p
        while q:
            low = q & -q
            v = low.bit_length() - 1
            deg = (adj[v] & p).bit_count()
            if deg > best_deg:
                best, best_deg = v, deg
            q &= ~low
        clique.append(best)
        p &= adj[best]
    return clique


def max_clique(candidates: int, adj: Sequence[int], lower: int = 0) -> list[int] | None:
    """Maximum clique inside bitset ``candidates`` if it has more than ``lower`` vertices.

    ``adj[v]`` is the neighbor bitset of ``v``.  Returns ``None`` when no clique
    beats ``lower``.  Branches on vertices in descending color order and
    prunes with the color bound.
    """
    if candidates.bit_count() <= lower:
        return None
    seed = _greedy_clique(candidates, adj)
    best: list[int] | None = sorted(seed) if len(seed) > lower else None
    best_size = max(lower, len(seed))

    def expand(clique: list[int], p: int) -> None:
        nonlocal best, best_size
        order, colors = _color_classes(p, adj)
        for i in range(len(order) - 1, -1, -1):
            if len(clique) + colors[i] <= best_size:
                return
            v = order[i]
            clique.append(v)
            sub = p & adj[v]
            if sub:
                expand(clique, sub)
            elif len(clique) > best_size:
                best, best_size = sorted(clique), len(clique)
            clique.pop()
            p &= ~(1 << v)

    expand([], candidates)
    return best


def _bitsets(mask: np.ndarray) -> list[int]:
    """Row ``i`` of a boolean matrix as an int with bit ``j`` set iff ``mask[i, j]``."""
    packed = np.packbits(mask, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


# ---------------------------------------------------------------------------
# the constant


@dataclass(frozen=True)
class EConstantResult:
    value: int
    radius: float
    point: int
    centers: tuple[int, ...]
    kind: BallKind
    per_radius: dict[float, int] = field(default_factory=dict)

    @property
    def witness(self) -> dict:
        return {"radius": self.radius, "point": self.point, "centers": list(self.centers)}

    def witness_family(self) -> BesicovitchFamily:
        return BesicovitchFamily.equal_radius(self.centers, self.radius, self.kind)

    def to_json(self) -> dict:
        return {
            "E": self.value,
            "kind": self.kind.value,
            "witness": self.witness,
            "per_radius": [[r, v] for r, v in self.per_radius.items()],
        }


def _scan_radius(space: MetricMeasureSpace, r: float, kind: BallKind) -> tuple[int, int, tuple[int, ...]]:
    """Best (size, point, centers) at one radius; first point wins ties."""
    if kind is BallKind.CLOSED:
        member = space.dist <= r
        exclude = space.dist > r
    else:
        member = space.dist < r
        exclude = space.dist >= r
    cand = _bitsets(member)  # symmetric: y in B(u, r) iff u in B(y, r)
    adj = _bitsets(exclude)
    best, best_y, best_c = 0, 0, ()
    for y in range(space.n):
        found = max_clique(cand[y], adj, best)
        if found is not None:
            best, best_y, best_c = len(found), y, tuple(found)
    return best, best_y, best_c


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("METRICONV_THREADS", "1")))
    except ValueError:
        return 1


def equal_radius_constant(space: MetricMeasureSpace, kind: BallKind | str = BallKind.CLOSED,
                          radii: Sequence[float] | None = None,
                          workers: int | None = None) -> EConstantResult:
    """Exact equal radius Besicovitch constant with a witness family.

    ``radii`` defaults to the critical radii, which attain the supremum over
    all positive radii.  The witness is the smallest radius, then smallest
    point, achieving the maximum.  Radii are scanned on ``workers`` threads
    (default ``METRICONV_THREADS`` or 1); the result does not depend on it.
    """
    kind = BallKind(kind)
    if space.n == 0:
        raise ValueError("space must be nonempty")
    if radii is None:
        radii = critical_radii(space)
    radii = sorted({float(r) for r in radii})
    if kind is BallKind.OPEN:
        radii = [r for r in radii if r > 0]
    if not radii:
        return EConstantResult(1, 0.0 if kind is BallKind.CLOSED else 1.0, 0, (0,), kind, {})
    workers = workers or _default_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scans = list(pool.map(lambda r: _scan_radius(space, r, kind), radii))
    else:
        scans = [_scan_radius(space, r, kind) for r in radii]
    per_radius = {r: s[0] for r, s in zip(radii, scans)}
    best_i = max(range(len(radii)), key=lambda i: (scans[i][0], -i))
    size, y, centers = scans[best_i]
    return EConstantResult(size, radii[best_i], y, centers, kind, per_radius)
