"""Command line entry point.  Reports go to stdout as JSON lines, summaries to stderr.

Exit status: 0 when every certification passes, 1 when one fails, 2 on
usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import nullcontext

import numpy as np

from .besicovitch import equal_radius_constant
from .filters import adaptedness_constant, builtin_stencil, load_filter
from .imaging import PGMError, convolve_image, read_image, write_image
from .space import BallKind, MetricViolation, critical_radii, load_space
from .verify import (
    certify_operator_bound,
    check_open_closed_agreement,
    check_pointwise_lemma,
    check_variation_lemma,
    jsonable,
    reproduce_example,
)


def _p(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    p = float(text)
    if p < 1:
        raise argparse.ArgumentTypeError(f"p must be >= 1, got {text}")
    return p


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="metriconv", description=__doc__.splitlines()[0])
    ap.add_argument("--output", "-o", help="write JSON lines here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("e-constant", help="exact equal radius Besicovitch constant")
    e.add_argument("--space", required=True)
    e.add_argument("--kind", choices=["open", "closed"], default="closed")

    a = sub.add_parser("adaptedness", help="adaptedness constant M of a filter")
    a.add_argument("--space", required=True)
    a.add_argument("--filter", required=True)

    o = sub.add_parser("opnorm", help="operator norm of one operator against its bound")
    o.add_argument("--space", required=True)
    o.add_argument("--op", choices=["avg", "conv", "filter"], required=True)
    o.add_argument("--p", type=_p, required=True)
    o.add_argument("--r", type=float)
    o.add_argument("--kind", choices=["open", "closed"], default="closed")
    o.add_argument("--filter")
    o.add_argument("--trials", type=int, default=200)
    o.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("certify", help="certify operator bounds over radii or for a filter")
    c.add_argument("--space", required=True)
    c.add_argument("--filter")
    c.add_argument("--p", type=_p, required=True)
    c.add_argument("--r", type=float, help="single radius (default: every critical radius)")
    c.add_argument("--kind", choices=["open", "closed"], default="closed")
    c.add_argument("--trials", type=int, default=200)
    c.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("reproduce", help="recompute a counterexample")
    rsub = r.add_subparsers(dest="example", required=True)
    b = rsub.add_parser("bigballs")
    b.add_argument("--n", type=int, default=10)
    b.add_argument("--p", type=_p, default=1.0)
    rsub.add_parser("tinyballs")

    im = sub.add_parser("convolve-image", help="filter a PGM image and certify its luminosity")
    im.add_argument("--in", dest="inp", required=True)
    im.add_argument("--stencil", required=True, help="gaussian3x3, prewitt_x or box:K")
    im.add_argument("--out", required=True)
    im.add_argument("--no-clamp", action="store_true")

    lm = sub.add_parser("lemmas", help="pointwise, variation and open/closed checks")
    lm.add_argument("--space", required=True)
    lm.add_argument("--filter", required=True)
    lm.add_argument("--exhaustive-limit", type=int, default=12)
    lm.add_argument("--seed", type=int, default=0)
    return ap


class _Run:
    def __init__(self, out):
        self.out = out
        self.total = 0
        self.failed = 0

    def emit(self, record: dict, passed: bool | None = None) -> None:
        self.out.write(json.dumps(jsonable(record), sort_keys=True) + "\n")
        if passed is not None:
            self.total += 1
            self.failed += not passed


def _cmd_e_constant(args, run: _Run) -> None:
    res = equal_radius_constant(load_space(args.space), args.kind)
    run.emit(res.to_json())
    print(f"E ({args.kind}) = {res.value}", file=sys.stderr)


def _cmd_adaptedness(args, run: _Run) -> None:
    space = load_space(args.space)
    res = adaptedness_constant(space, load_filter(args.filter, space))
    run.emit(res.to_json())
    print(f"M = {res.M}", file=sys.stderr)


def _report(run: _Run, rep) -> None:
    run.emit(rep.to_json(), rep.status != "violated")


def _cmd_opnorm(args, run: _Run) -> None:
    space = load_space(args.space)
    if args.op == "filter":
        if not args.filter:
            raise ValueError("--op filter needs --filter")
        claim = load_filter(args.filter, space)
    else:
        if args.r is None:
            raise ValueError(f"--op {args.op} needs --r")
        claim = {"avg": "average", "conv": "convolution"}[args.op]
    rep = certify_operator_bound(space, claim, args.p, args.r, args.kind, args.trials, args.seed,
                                 instance=args.space)
    _report(run, rep)


def _cmd_certify(args, run: _Run) -> None:
    space = load_space(args.space)
    if args.filter:
        claims = [(load_filter(args.filter, space), None)]
    else:
        radii = [args.r] if args.r is not None else [r for r in critical_radii(space) if r > 0]
        claims = [(name, r) for r in radii for name in ("average", "convolution")]
    for claim, r in claims:
        rep = certify_operator_bound(space, claim, args.p, r, args.kind, args.trials, args.seed,
                                     instance=args.space)
        _report(run, rep)


def _cmd_reproduce(args, run: _Run) -> None:
    if args.example == "tinyballs":
        res = reproduce_example("tinyballs")
    else:
        res = reproduce_example("bigballs", args.n, args.p)
    run.emit(res, res["pass"])


def _cmd_convolve_image(args, run: _Run) -> None:
    with open(args.inp, "rb") as fh:
        img = read_image(fh.read())
    stencil = builtin_stencil(args.stencil)
    result = convolve_image(img, stencil, clamp=not args.no_clamp)
    if result.image is None:
        raise ValueError("unclamped output leaves [0, 255] and cannot be written as PGM")
    with open(args.out, "wb") as fh:
        fh.write(write_image(result.image))
    raw = result.raw
    record = result.report.to_json()
    record["raw_range"] = [float(raw.min()), float(raw.max())]
    run.emit(record, result.report.status != "violated")


def _cmd_lemmas(args, run: _Run) -> None:
    space = load_space(args.space)
    filt = load_filter(args.filter, space)
    rng = np.random.default_rng(args.seed)
    if filt.radius > 0:
        g = rng.standard_normal(space.n)
        rep = check_pointwise_lemma(space, filt.radius, filt.kind, g)
        run.emit(rep.to_json(), rep.holds)
    for x in range(space.n):
        rep = check_variation_lemma(space, filt, x, args.exhaustive_limit, seed=args.seed)
        run.emit(rep.to_json(), rep.holds)
    rep = check_open_closed_agreement(space)
    run.emit(rep.to_json(), rep.holds)


_COMMANDS = {
    "e-constant": _cmd_e_constant,
    "adaptedness": _cmd_adaptedness,
    "opnorm": _cmd_opnorm,
    "certify": _cmd_certify,
    "reproduce": _cmd_reproduce,
    "convolve-image": _cmd_convolve_image,
    "lemmas": _cmd_lemmas,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    ctx = open(args.output, "w") if args.output else nullcontext(sys.stdout)
    try:
        with ctx as out:
            run = _Run(out)
            _COMMANDS[args.command](args, run)
            if run.total:
                run.emit({"summary": {"checks": run.total, "failed": run.failed}})
                print(f"{run.total - run.failed}/{run.total} checks passed", file=sys.stderr)
    except (ValueError, OSError, KeyError, MetricViolation, PGMError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1 if run.failed else 0


if __name__ == "__main__":
    sys.exit(main())
