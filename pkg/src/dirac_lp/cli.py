"""Command-line front end.

Subcommands: ``region``, ``membership``, ``compare-laplacian``, ``radial``,
``weyl`` and ``ball``.  Every output starts with the fully resolved
configuration, and identical flags give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import halfspace_weyl as hw
from . import radial_modes as rm
from . import spectral_region as sr
from .closed_spectra import make_region, manifold_from_dict
from .svg import parabolas_svg, regions_svg

THREADS_ENV = "DIRAC_SPECTRA_THREADS"


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _p_arg(text: str) -> float:
    try:
        return sr.parse_p(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _complex_arg(text: str) -> complex:
    """``"re,im"`` or a single real number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("n-list needs positive integers")
    return values


def _float_pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from exc
    if not a < b:
        raise argparse.ArgumentTypeError("need a < b")
    return a, b


def _jsonable(value):
    if isinstance(value, float):
        return "inf" if math.isinf(value) else value
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "out"}
    return {key: _jsonable(val) for key, val in sorted(vars(args).items()) if key not in skip}


def _config_text(args) -> str:
    return json.dumps(_config(args), sort_keys=True)


def _csv_text(args, header: Sequence[str], rows, extra: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(f"# config: {_config_text(args)}\n")
    for line in extra:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return v


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _broadcast(**lists) -> list[dict]:
    size = max(len(v) for v in lists.values())
    for name, values in lists.items():
        if len(values) not in (1, size):
            raise UsageError(f"--{name} takes 1 or {size} values, got {len(values)}")
    return [{name: (v[i] if len(v) > 1 else v[0]) for name, v in lists.items()} for i in range(size)]


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _regions(args) -> list[sr.SpectralRegion]:
    if args.factor is not None and args.lambda0 is not None:
        raise UsageError("use either --lambda0 or --factor, not both")
    c, k, p = _as_list(args.c), _as_list(args.k), _as_list(args.p)
    try:
        if args.factor is not None:
            factors = [manifold_from_dict(f) for f in _as_list(args.factor)]
            sets = _broadcast(c=c, k=k, factor=factors, p=p)
            return [make_region(s["factor"], s["c"], s["k"], s["p"]) for s in sets]
        lambdas = _as_list(args.lambda0) if args.lambda0 is not None else [0.0]
        sets = _broadcast(c=c, k=k, lambda0=lambdas, p=p)
        return [sr.SpectralRegion(s["c"], s["k"], s["lambda0"], s["p"]) for s in sets]
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw)) if raw else max(1, min(4, os.cpu_count() or 1))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# subcommands


def cmd_region(args) -> int:
    regions = _regions(args)
    if args.format == "svg":
        text = regions_svg(regions, _config_text(args))
    elif args.format == "json":
        payload = {"config": _config(args),
                   "regions": [sr.region_to_dict(r, args.s_min, args.s_max, args.samples)
                               for r in regions]}
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        rows = []
        for i, region in enumerate(regions):
            case = sr.classify(region)
            for z in sr.boundary(region, args.s_min, args.s_max, args.samples):
                rows.append((i, case.tag, case.landmark, float(z.real), float(z.imag)))
        text = _csv_text(args, ["panel", "case", "landmark", "re", "im"], rows)
    _emit(text, args.out)
    return 0


def cmd_membership(args) -> int:
    regions = _regions(args)
    if len(regions) != 1:
        raise UsageError("membership takes a single parameter set")
    region = regions[0]
    mu = args.mu
    kappa = sr.kappa_of(region, mu)
    t = region.threshold
    inside = sr.contains(region, mu, args.tol)
    gap = abs(kappa.imag) - t
    if inside:
        verdict = "boundary" if abs(gap) <= args.tol else "inside"
    else:
        verdict = "outside"
    text = (f"# config: {_config_text(args)}\n"
            f"{verdict} abs_im_kappa={abs(kappa.imag)!r} threshold={t!r} "
            f"case={sr.classify(region).tag}\n")
    _emit(text, args.out)
    return 0 if inside else 1


def cmd_compare_laplacian(args) -> int:
    s = np.linspace(args.s_min, args.s_max, args.samples)
    dsq = sr.hyperbolic_d_squared_boundary(args.k, args.p, s)
    lap = sr.laplacian_boundary(args.k, args.p, s)
    shift = sr.laplacian_shift(args.k, args.p)
    if args.format == "svg":
        text = parabolas_svg(s, dsq, lap, shift, _config_text(args))
    else:
        rows = [(float(si), float(a.real), float(a.imag), float(b.real), float(b.imag))
                for si, a, b in zip(s, dsq, lap)]
        text = _csv_text(args, ["s", "re_d_squared", "im_d_squared", "re_laplacian", "im_laplacian"],
                         rows, extra=[f"shift={shift!r} (k^2/4={args.k ** 2 / 4!r})"])
    _emit(text, args.out)
    return 0


def cmd_radial(args) -> int:
    rho = args.rho if args.rho is not None else args.k / 2
    system = rm.build_system(args.lam, args.mu, rho=rho, c=args.c, k=args.k)
    if system.degenerate or system.kappa.real <= 0:
        raise UsageError("need Re kappa > 0 (lambda**2 != mu**2)")
    window = args.window or (0.5 * args.r_end, args.r_end)
    if args.solution == "decaying":
        traj = rm.decaying_solution(system, args.r_start, args.r_end, steps=args.steps)
        sign = -1
    else:
        traj = rm.growing_solution(system, args.r_start, args.r_end, steps=args.steps)
        sign = +1
    fit = rm.decay_exponent(traj, window)
    if system.c == 0:
        predicted = (-0.5 * system.k, sign * system.kappa.real)
        rel = [abs(f - p) / abs(p) if p else abs(f) for f, p in zip(fit, predicted)]
        summary = [f"fitted_beta={fit[0]!r} fitted_gamma={fit[1]!r}",
                   f"predicted_beta={predicted[0]!r} predicted_gamma={predicted[1]!r}",
                   f"relative_error_beta={rel[0]!r} relative_error_gamma={rel[1]!r}"]
    else:
        predicted = rm.predicted_exponent(system, sign)
        rel = abs(fit - predicted) / abs(predicted) if predicted else abs(fit)
        summary = [f"fitted_exponent={fit!r}", f"predicted_exponent={predicted!r}",
                   f"relative_error={rel!r}"]
    summary.insert(0, f"kappa={system.kappa.real!r},{system.kappa.imag!r} window={list(window)!r}")
    rows = zip(traj.r.tolist(), traj.log_norm.tolist())
    _emit(_csv_text(args, ["r", "log_abs_phi"], rows, extra=summary), args.out)
    return 0


def _weyl_row(args, n: int):
    cfg = hw.WeylConfig(k=args.k, p=args.p, s=args.s, sign=args.sign, n=n)
    res = hw.weyl_ratio_squared(cfg) if args.squared else hw.weyl_ratio(cfg)
    return (n, sr.format_p(args.p), args.s, args.sign, res.ratio, res.triangle, res.analytic_bound)


def cmd_weyl(args) -> int:
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(lambda n: _weyl_row(args, n), args.n_list))
    header = ["n", "p", "s", "sign", "ratio", "triangle_bound", "analytic_bound"]
    _emit(_csv_text(args, header, rows), args.out)
    return 0


def cmd_ball(args) -> int:
    rows = [hw.ball_harmonic_integral(k, p).to_dict() for k in args.k for p in args.p]
    text = json.dumps({"config": _config(args), "ball_integrals": rows},
                      indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def _region_flags(sub, many: bool = True):
    nargs = "+" if many else None
    wrap = (lambda v: [v]) if many else (lambda v: v)
    sub.add_argument("--c", type=float, nargs=nargs, default=wrap(1.0), help="curvature scale")
    sub.add_argument("--k", type=int, nargs=nargs, default=wrap(2), help="H^{k+1} has dimension k+1")
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--lambda0", type=float, nargs=nargs, help="spectral gap of the closed factor")
    group.add_argument("--factor", type=str, nargs=nargs,
                       help='closed factor as JSON, e.g. \'{"type":"circle","L":6.283,"structure":"nontrivial"}\'')
    sub.add_argument("--p", type=_p_arg, nargs=nargs, default=wrap(1.0), help='exponent in [1, inf]; "inf" accepted')
    sub.add_argument("--tol", type=float, default=sr.DEFAULT_TOL)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirac-lp", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("region", help="spectral region as JSON, CSV or SVG")
    _region_flags(p)
    p.add_argument("--format", choices=("json", "csv", "svg"), default="json")
    p.add_argument("--s-min", type=float, default=-5.0)
    p.add_argument("--s-max", type=float, default=5.0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--out")
    p.set_defaults(func=cmd_region)

    p = subs.add_parser("membership", help="is mu in the region? exit 0 if yes, 1 if no")
    _region_flags(p, many=False)
    p.add_argument("--mu", type=_complex_arg, required=True, help='"re,im"')
    p.add_argument("--out")
    p.set_defaults(func=cmd_membership)

    p = subs.add_parser("compare-laplacian", help="D^2 versus Laplacian L^p parabolas")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--p", type=_p_arg, default=1.0)
    p.add_argument("--format", choices=("csv", "svg"), default="csv")
    p.add_argument("--s-min", type=float, default=-3.0)
    p.add_argument("--s-max", type=float, default=3.0)
    p.add_argument("--samples", type=int, default=121)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare_laplacian)

    p = subs.add_parser("radial", help="integrate one radial mode and fit its decay")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--lam", type=_complex_arg, default=complex(1.0), help='mode eigenvalue "re,im"')
    p.add_argument("--mu", type=_complex_arg, default=complex(0.0), help='"re,im"')
    p.add_argument("--rho", type=float, help="spherical mode (default k/2)")
    p.add_argument("--r-start", type=float, default=1.0)
    p.add_argument("--r-end", type=float, default=16.0)
    p.add_argument("--window", type=_float_pair, help='fit window "ra,rb"')
    p.add_argument("--steps", type=int, default=401)
    p.add_argument("--solution", choices=("decaying", "growing"), default="decaying")
    p.add_argument("--format", choices=("csv",), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_radial)

    p = subs.add_parser("weyl", help="Weyl-sequence ratio table over n")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--p", type=_p_arg, default=1.0)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--sign", type=int, choices=(1, -1), default=1)
    p.add_argument("--n-list", type=_int_list, default=[2, 4, 8, 16, 32])
    p.add_argument("--squared", action="store_true", help="use D^2 - mu^2")
    p.add_argument("--format", choices=("csv",), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_weyl)

    p = subs.add_parser("ball", help="finite/divergent classification of the ball integral")
    p.add_argument("--k", type=int, nargs="+", default=[2, 3])
    p.add_argument("--p", type=_p_arg, nargs="+", default=[1.0, 1.5, 2.0, 2.2, 3.0, 4.0])
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ball)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:  # includes UsageError
        parser.error(str(exc))
