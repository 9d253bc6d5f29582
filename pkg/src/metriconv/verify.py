"""Certification of the ball-operator inequalities on concrete instances.

Each check computes both sides of an inequality on a given space and
returns a report.  Right-hand sides are assembled from the exact
Besicovitch constant ``E``, the largest ball measure, and (for filters)
the adaptedness constant ``M``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .besicovitch import EConstantResult, equal_radius_constant
from .filters import Filter, adaptedness_constant, filter_convolve, tinyballs_filter
from .operators import (
    apply_average,
    assemble_kernel,
    lp_norm,
    metric_convolve,
    operator_norm,
    sup_ball_measure,
)
from .space import BallKind, MetricMeasureSpace, ball_mask, bigballs_index, example_bigballs, example_tinyballs

__all__ = [
    "CertificationReport",
    "LemmaReport",
    "certify_operator_bound",
    "check_pointwise_lemma",
    "check_variation_lemma",
    "check_open_closed_agreement",
    "reproduce_example",
    "e_constant",
    "jsonable",
    "RTOL",
]

RTOL = 1e-9


def jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings ``inf``/``-inf``/``nan``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, BallKind):
        return obj.value
    return obj


def _le(lhs: float, rhs: float) -> bool:
    return lhs <= rhs * (1 + RTOL) or lhs <= rhs


@functools.lru_cache(maxsize=64)
def _cached_e(space: MetricMeasureSpace, kind: BallKind) -> EConstantResult:
    return equal_radius_constant(space, kind)


def e_constant(space: MetricMeasureSpace, kind: BallKind | str = BallKind.CLOSED) -> EConstantResult:
    """Memoized ``equal_radius_constant`` over the space's critical radii."""
    return _cached_e(space, BallKind(kind))


@dataclass
class CertificationReport:
    claim: str
    instance: str
    lhs: float
    rhs: float
    lhs_kind: str
    constants: dict
    passed: bool
    status: str
    witness: Any = None

    def to_json(self) -> dict:
        return jsonable(asdict(self))


def _lhs(op, p: float, trials: int, seed: int):
    if p in (1, math.inf):
        return operator_norm(op, p, "exact")
    if p == 2:
        return operator_norm(op, p, "spectral")
    return operator_norm(op, p, "search", trials=trials, seed=seed)


def certify_operator_bound(space: MetricMeasureSpace, claim: str | Filter, p: float,
                           r: float | None = None, kind: BallKind | str = BallKind.CLOSED,
                           trials: int = 200, seed: int = 0, E: int | None = None,
                           instance: str = "") -> CertificationReport:
    """Compare an operator norm with its bound.

    ``claim`` is ``"average"`` (bound ``E^(1/p)``), ``"convolution"`` (bound
    ``sup mu(B) E^(1/p)``) or a ``Filter`` (bound ``M sup mu(B) E^(1/p)``;
    the filter's own radius and kind are used).  For ``p`` in ``{1, inf}``
    the left side is exact, for ``p = 2`` it is an upper estimate, otherwise
    a search lower bound, in which case a pass only reads "consistent".
    """
    if isinstance(claim, Filter):
        name, r, kind = "filter", claim.radius, BallKind(claim.kind)
    else:
        name, kind = claim, BallKind(kind)
        if r is None:
            raise ValueError(f"{claim} claim needs a radius")
    if E is None:
        E = e_constant(space, kind).value
    sup_mu = sup_ball_measure(space, r, kind)
    root = 1.0 if math.isinf(p) else E ** (1.0 / p)
    constants: dict[str, Any] = {"E": E, "p": p, "r": r, "kind": kind.value}
    if name == "average":
        rhs = root
        op = assemble_kernel(space, "average", r, kind)
    elif name == "convolution":
        rhs = sup_mu * root
        constants["sup_ball_measure"] = sup_mu
        op = assemble_kernel(space, "convolution", r, kind)
    elif name == "filter":
        adapt = adaptedness_constant(space, claim)
        constants.update(sup_ball_measure=sup_mu, M=adapt.M)
        if not adapt.adapted:
            return CertificationReport(name, instance, math.nan, math.inf, "none", constants, False,
                                       "skipped", {"reason": "filter not adapted", **adapt.to_json()})
        rhs = adapt.M * sup_mu * root
        op = assemble_kernel(space, "filter", filter=claim)
    else:
        raise ValueError(f"unknown claim {claim!r}")
    est = _lhs(op, p, trials, seed)
    ok = _le(est.value, rhs)
    if not ok:
        status = "violated"
    elif est.kind == "lower-bound":
        status = "consistent"
    else:
        status = "certified"
    return CertificationReport(name, instance, est.value, rhs, est.kind, constants, ok, status)


@dataclass
class LemmaReport:
    claim: str
    holds: bool
    checked: int
    max_ratio: float
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return jsonable(asdict(self))


def check_pointwise_lemma(space: MetricMeasureSpace, R: float, kind: BallKind | str, g) -> LemmaReport:
    """``(|g| * 1_B(x,R)) <= sup_y mu B(y,R) * A_R|g|(x)`` at every support point.

    ``max_ratio`` is the largest lhs/rhs seen (1 means equality somewhere).
    """
    kind = BallKind(kind)
    a = np.abs(np.asarray(g, dtype=float))
    lhs = metric_convolve(space, R, kind, a)
    sup_mu = sup_ball_measure(space, R, kind)
    rhs = sup_mu * apply_average(space, R, kind, a)
    viol, worst, checked = [], 0.0, 0
    for x in np.flatnonzero(space.weights > 0).tolist():
        checked += 1
        if rhs[x] > 0:
            worst = max(worst, lhs[x] / rhs[x])
        if not _le(lhs[x], rhs[x]):
            viol.append({"x": x, "lhs": lhs[x], "rhs": rhs[x]})
    return LemmaReport("pointwise", not viol, checked, worst, viol, {"sup_ball_measure": sup_mu, "R": R})


def check_variation_lemma(space: MetricMeasureSpace, filt: Filter, x: int, exhaustive_limit: int = 12,
                          samples: int = 10_000, seed: int = 0, E: int | None = None) -> LemmaReport:
    """``|mu_x|(F) <= E M mu(F)`` for subsets ``F`` of the ball around ``x``.

    Every subset is tried when the ball has at most ``exhaustive_limit``
    points, otherwise ``samples`` seeded random subsets.
    """
    adapt = adaptedness_constant(space, filt)
    if not adapt.adapted:
        return LemmaReport("variation", True, 0, math.nan, [],
                           {"skipped": "filter not adapted", **adapt.to_json()})
    kind = BallKind(filt.kind)
    if E is None:
        E = e_constant(space, kind).value
    members = np.flatnonzero(ball_mask(space, filt.radius, kind)[x])
    atoms = filt.measures[x].atoms
    tv = np.array([abs(atoms.get(int(y), 0.0)) for y in members])
    mu = space.weights[members]
    m = len(members)
    exhaustive = m <= exhaustive_limit
    if exhaustive:
        codes = np.arange(2 ** m)
        subsets = ((codes[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)
    else:
        subsets = np.random.default_rng(seed).random((samples, m)) < 0.5
    lhs = subsets @ tv
    rhs = E * adapt.M * (subsets @ mu)
    bad = ~((lhs <= rhs * (1 + RTOL)) | (lhs <= rhs))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), 0.0)
    viol = [{"subset": members[row].tolist(), "lhs": float(l), "rhs": float(r)}
            for row, l, r in zip(subsets[bad][:10], lhs[bad][:10], rhs[bad][:10])]
    return LemmaReport("variation", not bool(bad.any()), len(lhs), float(ratios.max(initial=0.0)), viol,
                       {"E": E, "M": adapt.M, "x": int(x), "ball_size": m, "exhaustive": exhaustive})


def check_open_closed_agreement(space: MetricMeasureSpace) -> LemmaReport:
    e_open = e_constant(space, BallKind.OPEN)
    e_closed = e_constant(space, BallKind.CLOSED)
    agree = e_open.value == e_closed.value
    return LemmaReport("open-closed", agree, 2, e_open.value / e_closed.value, [],
                       {"E_open": e_open.value, "E_closed": e_closed.value,
                        "witness_open": e_open.witness, "witness_closed": e_closed.witness})


def _close(a: float, b: float, rtol: float = 1e-12) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b)) or a == b


def reproduce_example(name: str, N: int = 10, p: float = 1.0) -> dict:
    """Recompute the two counterexamples and compare with their closed forms.

    ``bigballs``: with ``f_n`` the indicator of ``(1/2, n)`` and closed radius
    1/2, ``||f_n * 1_B||_p = (n+1)^(1/p) >= n^(1/p)`` while ``||f_n||_p = 1``;
    with ``g_n`` the indicator of ``(0, n)``, ``||g_n * 1_B||_inf = n``.
    ``tinyballs``: a function of zero norm whose filter convolution has norm 1.
    """
    if name == "tinyballs":
        space = example_tinyballs()
        filt = tinyballs_filter(space)
        g = np.array([0.0, 1.0])
        norm_in = lp_norm(space, g, 1)
        norm_out = lp_norm(space, filter_convolve(space, filt, g), 1)
        adapt = adaptedness_constant(space, filt)
        ok = norm_in == 0 and norm_out == 1 and adapt.M == math.inf
        return jsonable({"example": "tinyballs", "norm_in": norm_in, "norm_out": norm_out,
                         "M": adapt.M, "adapted": adapt.adapted, "witness": adapt.to_json()["witness"],
                         "pass": ok})
    if name != "bigballs":
        raise ValueError(f"unknown example {name!r}")
    if N < 1:
        raise ValueError("N must be at least 1")
    space = example_bigballs(N)
    rows, ok = [], True
    for n in range(1, N + 1):
        f = np.zeros(space.n)
        f[bigballs_index(n, "1/2")] = 1.0
        g = np.zeros(space.n)
        g[bigballs_index(n, "0")] = 1.0
        norm_f = lp_norm(space, f, p)
        conv_f = lp_norm(space, metric_convolve(space, 0.5, BallKind.CLOSED, f), p)
        conv_g = lp_norm(space, metric_convolve(space, 0.5, BallKind.CLOSED, g), math.inf)
        expected = 1.0 if math.isinf(p) else (n + 1) ** (1.0 / p)
        lower = 1.0 if math.isinf(p) else n ** (1.0 / p)
        row_ok = (_close(norm_f, 1.0) and _close(conv_f, expected) and conv_f >= lower
                  and _close(conv_g, float(n)))
        ok &= row_ok
        rows.append({"n": n, "norm_f": norm_f, "norm_conv_f": conv_f, "expected": expected,
                     "lower": lower, "norm_conv_g_inf": conv_g, "pass": row_ok})
    return jsonable({"example": "bigballs", "N": N, "p": p, "rows": rows, "pass": ok})
