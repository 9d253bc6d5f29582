"""Averaging operators, metric convolutions and their operator norms.

Functions on a space are plain float arrays indexed by point.  Averages are
only defined on the support of the measure; elsewhere they are ``nan``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .space import BallKind, MetricMeasureSpace, ball_mask

__all__ = [
    "KernelOperator",
    "NormEstimate",
    "apply_average",
    "metric_convolve",
    "lp_norm",
    "ball_measures",
    "sup_ball_measure",
    "assemble_kernel",
    "operator_norm",
    "power_iteration",
]

Tag = Literal["average", "convolution", "filter"]


def _as_density(space: MetricMeasureSpace, g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (space.n,):
        raise ValueError(f"function must have {space.n} values, got shape {g.shape}")
    return g


def ball_measures(space: MetricMeasureSpace, r: float, kind: BallKind | str = BallKind.CLOSED) -> np.ndarray:
    """``mu(B(x, r))`` for every point ``x``."""
    return ball_mask(space, r, kind) @ space.weights


def sup_ball_measure(space: MetricMeasureSpace, r: float, kind: BallKind | str = BallKind.CLOSED) -> float:
    return float(ball_measures(space, r, kind).max())


def metric_convolve(space: MetricMeasureSpace, r: float, kind: BallKind | str, g) -> np.ndarray:
    """``x -> integral of g over B(x, r)`` against the space's measure."""
    g = _as_density(space, g)
    return ball_mask(space, r, kind) @ (g * space.weights)


def apply_average(space: MetricMeasureSpace, r: float, kind: BallKind | str, g) -> np.ndarray:
    """Ball averages of ``g``; ``nan`` off the support."""
    if not r > 0:
        raise ValueError(f"averaging radius must be positive, got {r}")
    g = _as_density(space, g)
    mask = ball_mask(space, r, kind)
    num = mask @ (g * space.weights)
    den = mask @ space.weights
    out = np.full(space.n, np.nan)
    on = space.weights > 0
    out[on] = num[on] / den[on]
    return out


def lp_norm(space: MetricMeasureSpace, g, p: float) -> float:
    """``L^p(mu)`` norm; for ``p = inf`` the max of ``|g|`` over the support."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    g = _as_density(space, g)
    on = space.weights > 0
    return _lp(g[on], space.weights[on], p)


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """Matrix form of a ball operator.

    For ``average`` and ``convolution`` tags ``(Tg)(x) = sum_y K[x,y] g(y) w(y)``;
    for ``filter`` the measure is already absorbed: ``(Tg)(x) = sum_y K[x,y] g(y)``.
    ``defined`` marks rows where the operator is defined (the support, for averages).
    """

    kernel: np.ndarray
    space: MetricMeasureSpace
    tag: Tag
    defined: np.ndarray

    def effective(self) -> np.ndarray:
        if self.tag == "filter":
            return self.kernel
        return self.kernel * self.space.weights[None, :]

    def apply(self, g) -> np.ndarray:
        out = self.effective() @ _as_density(self.space, g)
        out[~self.defined] = np.nan
        return out


def assemble_kernel(space: MetricMeasureSpace, op: str, r: float | None = None,
                    kind: BallKind | str = BallKind.CLOSED, filter=None) -> KernelOperator:
    """Kernel for ``op`` in ``{"average", "convolution", "filter"}``.

    Filters bring their own radius and kind; ``r``/``kind`` are ignored then.
    """
    n = space.n
    if op == "filter":
        if filter is None:
            raise ValueError("filter kernel needs a filter")
        return KernelOperator(filter.matrix(space), space, "filter", np.ones(n, dtype=bool))
    if r is None:
        raise ValueError(f"{op} kernel needs a radius")
    mask = ball_mask(space, r, kind).astype(float)
    if op == "convolution":
        return KernelOperator(mask, space, "convolution", np.ones(n, dtype=bool))
    if op == "average":
        if not r > 0:
            raise ValueError(f"averaging radius must be positive, got {r}")
        on = space.weights > 0
        den = mask @ space.weights
        k = np.zeros((n, n))
        k[on] = mask[on] / den[on, None]
        return KernelOperator(k, space, "average", on)
    raise ValueError(f"unknown operator {op!r}")


@dataclass(frozen=True)
class NormEstimate:
    value: float
    kind: Literal["exact", "upper-estimate", "lower-bound"]


def _restricted(op: KernelOperator) -> tuple[np.ndarray, np.ndarray] | None:
    """Effective kernel on support x support, or None if the norm is infinite.

    A nonzero entry in a mu-null column means a function of zero norm has a
    nonzero image, so no finite bound exists.
    """
    on = op.space.weights > 0
    rows = op.effective()[on & op.defined]
    if np.any(rows[:, ~on] != 0):
        return None
    return rows[:, on], op.space.weights[on]


def power_iteration(a: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value of a nonnegative matrix, from above.

    Iterates on ``M = a.T @ a`` from a positive start.  While the iterate is
    strictly positive, the Rayleigh quotient and the Collatz-Wielandt
    quotient ``max_i (Mx)_i / x_i`` bracket the top eigenvalue; iteration
    stops once they agree to ``tol`` and the upper end is returned.  If the
    iterate loses positivity only the Rayleigh estimate is available, and
    iteration stops when it settles to ``tol``.
    """
    if a.size == 0 or not np.any(a):
        return 0.0
    a = a[:, np.any(a != 0, axis=0)]
    m = a.T @ a
    x = np.ones(m.shape[0]) / math.sqrt(m.shape[0])
    prev = 0.0
    for _ in range(max_iter):
        y = m @ x
        low = float(x @ y)
        if np.all(x > 0):
            high = float(np.max(y / x))
            if high - low <= tol * low:
                return math.sqrt(high)
        elif abs(low - prev) <= tol * low:
            return math.sqrt(low)
        prev = low
        x = y / np.linalg.norm(y)
    y = m @ x
    if np.all(x > 0):
        return math.sqrt(float(np.max(y / x)))
    return math.sqrt(float(x @ y))


def _search(op: KernelOperator, p: float, trials: int, seed: int) -> float:
    on = op.space.weights > 0
    if _restricted(op) is None:
        return math.inf
    sub = op.space
    n_on = int(on.sum())
    if n_on == 0:
        return 0.0
    eff = op.effective()
    rows = on & op.defined
    rng = np.random.default_rng(seed)
    probes = [np.eye(n_on)[i] for i in range(n_on)]
    probes.append(np.ones(n_on))
    probes.extend(np.sign(eff[x][on]) for x in np.flatnonzero(rows))
    for _ in range(trials):
        pick = rng.integers(3)
        if pick == 0:
            probes.append(rng.standard_normal(n_on))
        elif pick == 1:
            probes.append(rng.random(n_on))
        else:
            probes.append(rng.choice([-1.0, 1.0], size=n_on) * rng.random(n_on) ** 3)
    best = 0.0
    g = np.zeros(sub.n)
    w_on = sub.weights[on]
    w_rows = sub.weights[rows]
    for h in probes:
        g[on] = h
        denom = _lp(h, w_on, p)
        if denom == 0:
            continue
        best = max(best, _lp(eff[rows] @ g, w_rows, p) / denom)
    return best


def _lp(v: np.ndarray, w: np.ndarray, p: float) -> float:
    a = np.abs(v)
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * np.sum(w * (a / top) ** p) ** (1.0 / p))


def operator_norm(op: KernelOperator, p: float, method: str = "exact",
                  trials: int = 200, seed: int = 0) -> NormEstimate:
    """Norm of ``op`` on ``L^p(mu)``.

    ``exact`` works for ``p`` in ``{1, inf}`` (column / row sums),
    ``spectral`` for ``p = 2`` (power iteration on the entrywise absolute
    kernel, an upper estimate), ``search`` for any ``p`` (best ratio over
    test functions, a lower bound).
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if method == "exact":
        if p not in (1, math.inf):
            raise ValueError("exact operator norms are available only for p = 1 and p = inf")
        restricted = _restricted(op)
        if restricted is None:
            return NormEstimate(math.inf, "exact")
        a, w = restricted
        if a.size == 0:
            return NormEstimate(0.0, "exact")
        a = np.abs(a)
        if p == 1:
            w_rows = op.space.weights[(op.space.weights > 0) & op.defined]
            return NormEstimate(float(np.max((w_rows @ a) / w)), "exact")
        return NormEstimate(float(np.max(a.sum(axis=1))), "exact")
    if method == "spectral":
        if p != 2:
            raise ValueError("spectral estimates are available only for p = 2")
        restricted = _restricted(op)
        if restricted is None:
            return NormEstimate(math.inf, "upper-estimate")
        a, w = restricted
        w_rows = op.space.weights[(op.space.weights > 0) & op.defined]
        b = np.sqrt(w_rows)[:, None] * np.abs(a) / np.sqrt(w)[None, :]
        return NormEstimate(power_iteration(b), "upper-estimate")
    if method == "search":
        return NormEstimate(_search(op, p, trials, seed), "lower-bound")
    raise ValueError(f"unknown method {method!r}")
