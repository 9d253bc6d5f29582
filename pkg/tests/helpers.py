"""Brute-force oracles and random instance generators shared by the tests.

The oracles avoid the package's fast paths: they enumerate subsets, probe
operators with delta and sign functions, and scan radii densely.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from metriconv.filters import Filter
from metriconv.space import BallKind, from_distance_matrix


ACCEPTANCE_LINES: list[str] = []


def record(number: int, ok: bool, detail: str) -> None:
    """Print and remember one pass/fail line for an acceptance criterion."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def random_space(rng: np.random.Generator, n: int, dim: int = 3, zero_weights: bool = False):
    pts = rng.random((n, dim))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    w = rng.uniform(0.1, 3.0, size=n)
    if zero_weights and n > 1:
        w[rng.random(n) < 0.3] = 0.0
        if not np.any(w > 0):
            w[0] = 1.0
    return from_distance_matrix(d, w)


def random_filter(rng: np.random.Generator, space, r: float, kind="closed", density: float = 0.7) -> Filter:
    """Random signed atoms on balls, only on positive-weight points."""
    kind = BallKind(kind)
    atoms = {}
    for x in range(space.n):
        row = space.dist[x]
        members = np.flatnonzero(row <= r if kind is BallKind.CLOSED else row < r)
        atoms[x] = {int(y): float(rng.normal()) for y in members
                    if space.weights[y] > 0 and rng.random() < density}
    return Filter.from_atoms(space, r, kind, atoms)


def dense_radii(space) -> list[float]:
    """Critical radii, midpoints between them, and radii below and above them all."""
    d = sorted({float(v) for v in space.dist[np.triu_indices(space.n, 1)]})
    if not d:
        return [1.0]
    mids = [(a + b) / 2 for a, b in zip(d, d[1:])]
    return sorted(set([d[0] / 2] + d + mids + [d[-1] * 2]))


def brute_e(space, kind="closed") -> int:
    """Largest equal-radius Besicovitch multiplicity by enumerating every subset."""
    kind = BallKind(kind)
    n = space.n
    best = 1
    for r in dense_radii(space):
        if kind is BallKind.CLOSED:
            inside = space.dist <= r
            apart = space.dist > r
        else:
            inside = space.dist < r
            apart = space.dist >= r
        # ok[S]: centers of S pairwise exclude; common[S]: points in every ball of S
        size = 1 << n
        ok = [False] * size
        common = [0] * size
        full = (1 << n) - 1
        ok[0], common[0] = True, full
        ball_bits = [sum(1 << j for j in range(n) if inside[i, j]) for i in range(n)]
        apart_bits = [sum(1 << j for j in range(n) if apart[i, j]) for i in range(n)]
        for s in range(1, size):
            v = s.bit_length() - 1
            rest = s & ~(1 << v)
            ok[s] = ok[rest] and (apart_bits[v] & rest) == rest
            common[s] = common[rest] & ball_bits[v]
            if ok[s] and common[s]:
                best = max(best, bin(s).count("1"))
    return best


def brute_norm(space, apply, p: float) -> float:
    """Exact ``L^p(mu)`` norm for p in {1, inf} by probing extreme functions.

    For p = 1 the extreme points of the unit ball are normalized deltas; for
    p = inf every value at a row is maximized by a sign vector, so all sign
    vectors on the support are tried (small spaces only).
    """
    on = np.flatnonzero(space.weights > 0)
    null = np.flatnonzero(space.weights == 0)
    w = space.weights

    def norm(v, q):
        vv = np.abs(v[on])
        vv = np.where(np.isnan(vv), 0.0, vv)
        if math.isinf(q):
            return float(vv.max()) if len(vv) else 0.0
        return float((w[on] * vv ** q).sum() ** (1 / q))

    for y in null:
        g = np.zeros(space.n)
        g[y] = 1.0
        if norm(apply(g), p) > 0:
            return math.inf
    if math.isinf(p):
        best = 0.0
        for signs in itertools.product([-1.0, 1.0], repeat=len(on)):
            g = np.zeros(space.n)
            g[on] = signs
            best = max(best, norm(apply(g), p))
        return best
    best = 0.0
    for y in on:
        g = np.zeros(space.n)
        g[y] = 1.0 / w[y]
        best = max(best, norm(apply(g), 1))
    return best


def brute_adaptedness(space, filt: Filter) -> float:
    """Max ratio over centers, points, and a dense scan of radii in (0, r]."""
    kind = BallKind(filt.kind)
    r = filt.radius
    radii = [s for s in dense_radii(space) if 0 < s <= r] + [r]
    if kind is BallKind.OPEN:
        radii = [s for s in radii if s <= r]
    radii.append(min(dense_radii(space)) / 4)
    best = 0.0
    for x in range(space.n):
        ball_x = {z for z in range(space.n)
                  if (space.dist[x, z] <= r if kind is BallKind.CLOSED else space.dist[x, z] < r)}
        atoms = filt.measures[x].atoms
        for y in range(space.n):
            for s in radii:
                ball_y = {z for z in range(space.n)
                          if (space.dist[y, z] <= s if kind is BallKind.CLOSED else space.dist[y, z] < s)}
                inter = ball_x & ball_y
                num = sum(abs(atoms.get(z, 0.0)) for z in inter)
                den = sum(space.weights[z] for z in inter)
                if den > 0:
                    best = max(best, num / den)
                elif num > 0:
                    return math.inf
    return best


def weighted_matrix(space, apply) -> np.ndarray:
    """Matrix of an operator on L^2(mu) in an orthonormal basis of the support."""
    on = np.flatnonzero(space.weights > 0)
    w = space.weights
    cols = []
    for y in on:
        g = np.zeros(space.n)
        g[y] = 1.0 / math.sqrt(w[y])
        out = apply(g)
        cols.append(np.sqrt(w[on]) * np.nan_to_num(out[on]))
    return np.array(cols).T
