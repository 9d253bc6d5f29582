"""Finite metric measure spaces, balls and supports.

A space is a distance table plus a nonnegative weight per point (the
measure of each singleton).  Points are identified by their index in
``range(n)``.  Spaces never change after construction.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

__all__ = [
    "BallKind",
    "Ball",
    "MetricMeasureSpace",
    "MetricReport",
    "MetricViolation",
    "ball_members",
    "ball_mask",
    "support",
    "critical_radii",
    "validate_metric",
    "build_space",
    "grid",
    "from_distance_matrix",
    "from_graph",
    "example_bigballs",
    "example_tinyballs",
    "load_space",
    "dump_space",
]

# triangle checks tolerate this much relative rounding in stored distances
_TRIANGLE_RTOL = 1e-12


class BallKind(str, enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


class MetricViolation(ValueError):
    """Raised when a distance table fails a metric axiom."""

    def __init__(self, axiom: str, witness: tuple[int, ...], detail: str = ""):
        self.axiom = axiom
        self.witness = witness
        msg = f"{axiom} violated at {witness}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


@dataclass(frozen=True)
class MetricReport:
    ok: bool
    axiom: str | None = None
    witness: tuple[int, ...] | None = None
    detail: str = ""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MetricMeasureSpace:
    """Finite metric measure space ``(X, d, mu)``.

    ``dist`` is an ``(n, n)`` array, ``weights`` has length ``n``.  Grid
    builders also record integer pixel coordinates ``coords`` (column,
    row) and ``grid_shape`` (width, height) so stencils can be laid on
    the space.
    """

    dist: np.ndarray
    weights: np.ndarray
    labels: tuple[str, ...] | None = None
    coords: np.ndarray | None = None
    grid_shape: tuple[int, int] | None = None
    spec: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "dist", _frozen(self.dist))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.coords is not None:
            c = np.array(self.coords, dtype=np.int64, copy=True)
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)
        n = self.weights.shape[0]
        if self.dist.shape != (n, n):
            raise ValueError(f"distance table shape {self.dist.shape} does not match {n} weights")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("labels must have one entry per point")

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def __len__(self) -> int:
        return self.n

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def subspace(self, points: Sequence[int]) -> MetricMeasureSpace:
        """Point-induced subspace with inherited distances and weights."""
        idx = np.asarray(points, dtype=np.int64)
        labels = tuple(self.label(int(i)) for i in idx) if self.labels is not None else None
        coords = self.coords[idx] if self.coords is not None else None
        return MetricMeasureSpace(self.dist[np.ix_(idx, idx)], self.weights[idx], labels, coords)

    def total_weight(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class Ball:
    """A ball with its nominal description; ``members`` is realized on demand."""

    center: int
    radius: float
    kind: BallKind = BallKind.CLOSED

    def members(self, space: MetricMeasureSpace) -> frozenset[int]:
        return ball_members(space, self.center, self.radius, self.kind)

    def contains(self, space: MetricMeasureSpace, y: int) -> bool:
        d = space.dist[self.center, y]
        return bool(d <= self.radius) if BallKind(self.kind) is BallKind.CLOSED else bool(d < self.radius)


def _check_radius(radius: float, kind: BallKind) -> BallKind:
    kind = BallKind(kind)
    if not radius >= 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    if kind is BallKind.OPEN and radius == 0:
        raise ValueError("open ball of radius 0 is empty")
    return kind


def ball_mask(space: MetricMeasureSpace, radius: float, kind: BallKind | str = BallKind.CLOSED) -> np.ndarray:
    """Boolean matrix whose row ``x`` marks the members of ``B(x, radius)``.

    Comparisons are exact on the stored distances.
    """
    kind = _check_radius(radius, kind)
    if kind is BallKind.CLOSED:
        return space.dist <= radius
    return space.dist < radius


def ball_members(space: MetricMeasureSpace, center: int, radius: float,
                 kind: BallKind | str = BallKind.CLOSED) -> frozenset[int]:
    kind = _check_radius(radius, kind)
    row = space.dist[center]
    hit = row <= radius if kind is BallKind.CLOSED else row < radius
    return frozenset(int(i) for i in np.flatnonzero(hit))


def support(space: MetricMeasureSpace) -> frozenset[int]:
    # every point of a finite metric space is isolated
    return frozenset(int(i) for i in np.flatnonzero(space.weights > 0))


def critical_radii(space: MetricMeasureSpace) -> list[float]:
    """Sorted distinct off-diagonal distances.

    Closed balls only change at these values, so every closed ball equals
    one with a radius from this list (or radius 0).  An open ball of
    radius ``r`` in ``(d_k, d_{k+1}]`` equals the closed ball of radius
    ``d_k``, so open balls are indexed by the same list shifted one rank.
    """
    n = space.n
    if n < 2:
        return []
    iu = np.triu_indices(n, k=1)
    return [float(v) for v in np.unique(space.dist[iu])]


def validate_metric(space: MetricMeasureSpace) -> MetricReport:
    d, w = space.dist, space.weights
    n = space.n
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        i = int(np.flatnonzero(~(np.isfinite(w) & (w >= 0)))[0])
        return MetricReport(False, "weights", (i,), f"weight {w[i]!r}")
    if not np.all(np.isfinite(d)):
        i, j = (int(v) for v in np.argwhere(~np.isfinite(d))[0])
        return MetricReport(False, "finiteness", (i, j), f"d = {d[i, j]!r}")
    diag = np.flatnonzero(np.diag(d) != 0)
    if diag.size:
        i = int(diag[0])
        return MetricReport(False, "identity", (i, i), f"d(i,i) = {d[i, i]!r}")
    asym = np.argwhere(d != d.T)
    if asym.size:
        i, j = (int(v) for v in asym[0])
        return MetricReport(False, "symmetry", (i, j), f"{d[i, j]!r} != {d[j, i]!r}")
    off = ~np.eye(n, dtype=bool)
    bad = np.argwhere(off & (d <= 0))
    if bad.size:
        i, j = (int(v) for v in bad[0])
        return MetricReport(False, "separation", (i, j), f"d = {d[i, j]!r}")
    # d(i,k) <= d(i,j) + d(j,k), scanned one intermediate point at a time
    for j in range(n):
        through = d[:, j][:, None] + d[j, :][None, :]
        viol = d > through * (1 + _TRIANGLE_RTOL)
        if viol.any():
            i, k = (int(v) for v in np.argwhere(viol)[0])
            return MetricReport(False, "triangle", (i, j, k),
                                f"d({i},{k}) = {d[i, k]!r} > {d[i, j]!r} + {d[j, k]!r}")
    return MetricReport(True)


def _checked(space: MetricMeasureSpace) -> MetricMeasureSpace:
    report = validate_metric(space)
    if not report.ok:
        raise MetricViolation(report.axiom, report.witness, report.detail)
    return space


def _weights(weights: Sequence[float] | None, n: int) -> np.ndarray:
    if weights is None:
        return np.ones(n)
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"expected {n} weights, got shape {w.shape}")
    return w


def _norm_order(p: Any) -> float:
    if p in ("inf", "infinity", "Infinity", math.inf):
        return math.inf
    p = float(p)
    if p not in (1.0, 2.0):
        raise ValueError(f"grid metric must be l1, l2 or linf, got p={p}")
    return p


def grid(width: int, height: int, p: Any = math.inf, weights: Sequence[float] | None = None) -> MetricMeasureSpace:
    """Pixel grid with unit spacing, points in row-major order.

    Point ``row * width + col`` sits at coordinate ``(col, row)``.
    """
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be positive")
    order = _norm_order(p)
    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    coords = np.column_stack([cols.ravel(), rows.ravel()])
    diff = np.abs(coords[:, None, :] - coords[None, :, :]).astype(float)
    if order == math.inf:
        dist = diff.max(axis=2)
    elif order == 1:
        dist = diff.sum(axis=2)
    else:
        dist = np.sqrt((diff ** 2).sum(axis=2))
    n = width * height
    labels = tuple(f"({c},{r})" for c, r in coords)
    spec = {"kind": "grid", "width": width, "height": height,
            "p": "inf" if order == math.inf else int(order)}
    if weights is not None:
        spec["weights"] = [float(v) for v in weights]
    return _checked(MetricMeasureSpace(dist, _weights(weights, n), labels, coords, (width, height), spec))


def from_distance_matrix(dist: Sequence[Sequence[float]], weights: Sequence[float] | None = None,
                         labels: Sequence[str] | None = None) -> MetricMeasureSpace:
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    labels = tuple(labels) if labels is not None else None
    spec = {"kind": "matrix", "distances": d.tolist()}
    if weights is not None:
        spec["weights"] = [float(v) for v in weights]
    return _checked(MetricMeasureSpace(d, _weights(weights, d.shape[0]), labels, spec=spec))


def from_graph(n: int, edges: Sequence[Sequence[float]], weights: Sequence[float] | None = None) -> MetricMeasureSpace:
    """Shortest-path metric of an undirected graph given ``(i, j, length)`` edges."""
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    rows, cols, vals = [], [], []
    for i, j, length in edges:
        if not length > 0:
            raise ValueError(f"edge ({i},{j}) has nonpositive length {length}")
        rows.append(int(i))
        cols.append(int(j))
        vals.append(float(length))
    adj = csr_matrix((vals, (rows, cols)), shape=(n, n))
    dist = shortest_path(adj, method="D", directed=False)
    spec = {"kind": "graph", "n": n, "edges": [[int(i), int(j), float(l)] for i, j, l in edges]}
    if weights is not None:
        spec["weights"] = [float(v) for v in weights]
    return _checked(MetricMeasureSpace(dist, _weights(weights, n), spec=spec))


def example_bigballs(N: int) -> MetricMeasureSpace:
    """Two columns ``{0, 1/2} x {1..N}`` of the plane.

    Point ``2(n-1)`` is ``(0, n)`` with weight ``n``; point ``2(n-1)+1`` is
    ``(1/2, n)`` with weight 1.  Balls of radius 1/2 have unbounded measure
    as ``N`` grows.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    pts, w, labels = [], [], []
    for n in range(1, N + 1):
        pts += [(0.0, float(n)), (0.5, float(n))]
        w += [float(n), 1.0]
        labels += [f"(0,{n})", f"(1/2,{n})"]
    pts = np.array(pts)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    return _checked(MetricMeasureSpace(dist, np.array(w), tuple(labels), spec={"kind": "bigballs", "n": N}))


def bigballs_index(n: int, column: str) -> int:
    """Index of ``(0, n)`` (``column="0"``) or ``(1/2, n)`` (``column="1/2"``)."""
    return 2 * (n - 1) + (0 if column == "0" else 1)


def example_tinyballs() -> MetricMeasureSpace:
    """``{0, 1}`` in the line with the point mass at 0."""
    return _checked(MetricMeasureSpace(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([1.0, 0.0]),
                                       ("0", "1"), spec={"kind": "tinyballs"}))


def build_space(spec: Mapping[str, Any]) -> MetricMeasureSpace:
    """Build a space from its JSON description (see ``load_space``)."""
    kind = spec.get("kind")
    weights = spec.get("weights")
    if kind == "grid":
        return grid(int(spec["width"]), int(spec["height"]), spec.get("p", "inf"), weights)
    if kind == "matrix":
        return from_distance_matrix(spec["distances"], weights, spec.get("labels"))
    if kind == "graph":
        return from_graph(int(spec["n"]), spec["edges"], weights)
    if kind == "bigballs":
        return example_bigballs(int(spec["n"]))
    if kind == "tinyballs":
        return example_tinyballs()
    raise ValueError(f"unknown space kind {kind!r}")


def load_space(path) -> MetricMeasureSpace:
    with open(path) as fh:
        return build_space(json.load(fh))


def dump_space(space: MetricMeasureSpace) -> dict:
    """JSON-ready description; spaces not built from a spec dump as a matrix."""
    if space.spec is not None:
        return dict(space.spec)
    out = {"kind": "matrix", "distances": space.dist.tolist(), "weights": space.weights.tolist()}
    if space.labels is not None:
        out["labels"] = list(space.labels)
    return out
