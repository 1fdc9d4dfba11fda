"""Command-line front end.

Subcommands map one-to-one onto the library: ``map`` and ``invert`` expose
the endpoint parametrization (with quadrant reduction of raw inputs),
``tuple``/``pell``/``trace``/``extremals`` operate on one (n, m, k) problem
instance, ``boundary`` and ``paramcurves`` emit the CSV data behind the
curve plots, and ``plot`` renders an SVG picture of the inverse image.

Single results are reported as JSON ``{inputs, results, certified,
warnings, wall_ms}``; tabular results as CSV; plots as self-contained SVG.
All numbers are printed round-trip safe.  Files are written atomically: a
``.partial`` suffix marks anything interrupted mid-write.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .errors import (
    BracketError,
    CertificationError,
    ContinuationError,
    ConvergenceError,
    CrossCheckError,
    DegenerateError,
    DomainError,
    PellarcsError,
    PoleError,
)
from .geometry import boundary_curve, classify, extremal_points, trace_arc, trace_real_preimage
from .parammap import Endpoint, ParamPoint, circle_side, forward, inverse
from .pell import build_config, recover_pell

_INPUT_ERRORS = (DomainError, DegenerateError, BracketError, PoleError)
_CERT_ERRORS = (CertificationError, CrossCheckError, ConvergenceError, ContinuationError)

_DEFAULT_TOL = 1e-12


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _emit(text: str, out_path: str | None) -> None:
    """Write atomically to out_path, or to stdout when no path is given."""
    if out_path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    partial = out_path + ".partial"
    with open(partial, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(partial, out_path)


def _report(inputs: dict, results: dict, certified: bool, warnings: list[str],
            started: float) -> str:
    payload = {
        "inputs": inputs,
        "results": results,
        "certified": bool(certified),
        "warnings": list(warnings),
        "wall_ms": (time.perf_counter() - started) * 1000.0,
    }
    # allow_nan=False enforces the all-numbers-finite report invariant
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv(header: str, rows: list[str]) -> str:
    return "\n".join([header] + rows) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_map(args) -> int:
    started = time.perf_counter()
    e = forward(ParamPoint(args.k, getattr(args, "lambda")))
    text = _report(
        {"k": args.k, "lambda": getattr(args, "lambda")},
        {"alpha": e.alpha, "beta": e.beta, "circle_side": circle_side(e)},
        True, [], started,
    )
    _emit(text, args.out)
    return 0


def _cmd_invert(args) -> int:
    started = time.perf_counter()
    warnings = []
    alpha, beta = args.alpha, args.beta
    if abs(alpha) < 1e-12 or abs(beta) < 1e-12:
        raise DomainError("pure-real or pure-imaginary endpoints are degenerate")
    if alpha < 0:
        warnings.append("quadrant reduction: alpha reflected (lambda -> 1 - lambda)")
    if beta < 0:
        warnings.append("quadrant reduction: beta reflected (complex conjugation)")
    e = Endpoint(abs(alpha), abs(beta))
    p = inverse(e)
    results = {"k": p.k, "lambda": p.lam, "circle_side": circle_side(e)}
    if alpha < 0:
        results["lambda_reflected"] = 1.0 - p.lam
    _emit(_report({"alpha": alpha, "beta": beta}, results, True, warnings, started),
          args.out)
    return 0


def _cmd_tuple(args) -> int:
    started = time.perf_counter()
    cfg = build_config(args.n, args.m, args.k, args.tol)
    cls = classify(cfg)
    trace = trace_arc(cfg, args.samples)
    report = extremal_points(cfg, trace)
    results = {
        "a3": {"re": cfg.a3.real, "im": cfg.a3.imag},
        "z_star": cfg.z_star,
        "kind": cls.kind,
        "counts": {
            "interval": report.counts[0],
            "arc": report.counts[1],
            "total": report.counts[2],
        },
    }
    _emit(_report({"n": cfg.n, "m": cfg.m, "k": cfg.k}, results,
                  report.certified, list(cfg.warnings), started), args.out)
    return 0 if report.certified else 2


def _cmd_pell(args) -> int:
    started = time.perf_counter()
    cfg = build_config(args.n, args.m, args.k, args.tol)
    pair = recover_pell(cfg)
    results = {
        "t_coeffs_chebyshev": [float(c) for c in pair.t_coeffs],
        "u_coeffs_chebyshev": [float(c) for c in pair.u_coeffs],
        "residual": pair.residual,
        "dt_sign": pair.dt_sign,
        "z_star": cfg.z_star,
    }
    _emit(_report({"n": cfg.n, "m": cfg.m, "k": cfg.k}, results, True,
                  list(cfg.warnings), started), args.out)
    return 0


def _cmd_trace(args) -> int:
    cfg = build_config(args.n, args.m, args.k, args.tol)
    trace = trace_arc(cfg, args.samples)
    rows = [
        f"arc,{_fmt(z.real)},{_fmt(z.imag)},{_fmt(p)}"
        for z, p in zip(trace.z_points, trace.phases)
    ]
    for i, line in enumerate(trace_real_preimage(cfg, resolution=args.resolution)):
        rows.extend(
            f"preimage{i},{_fmt(z.real)},{_fmt(z.imag)},nan" for z in line
        )
    _emit(_csv("branch,re_z,im_z,phase", rows), args.out)
    return 0


def _cmd_extremals(args) -> int:
    started = time.perf_counter()
    cfg = build_config(args.n, args.m, args.k, args.tol)
    report = extremal_points(cfg, trace_arc(cfg, args.samples))
    results = {
        "on_interval": [float(x) for x in report.on_interval],
        "interval_values": [int(v) for v in report.interval_values],
        "on_arc": [{"re": z.real, "im": z.imag} for z in report.on_arc],
        "arc_values": [int(v) for v in report.arc_values],
        "counts": {
            "interval": report.counts[0],
            "arc": report.counts[1],
            "total": report.counts[2],
        },
    }
    _emit(_report({"n": cfg.n, "m": cfg.m, "k": cfg.k}, results,
                  report.certified, list(cfg.warnings), started), args.out)
    return 0 if report.certified else 2


def _cmd_boundary(args) -> int:
    grid = 0.01 + 0.48 * np.arange(args.samples) / args.samples
    samples, skipped = boundary_curve(grid)
    for lam in skipped:
        print(f"warning: no bracket for lambda={lam:g}; sample skipped", file=sys.stderr)
    rows = [
        f"{_fmt(s.lam)},{_fmt(s.k_star)},{_fmt(s.alpha)},{_fmt(s.beta)}"
        for s in samples
    ]
    _emit(_csv("lambda,k_star,alpha,beta", rows), args.out)
    return 0


def _cmd_paramcurves(args) -> int:
    rows = []
    k_sweep = np.linspace(0.02, 0.98, args.samples)
    for j in range(1, 8):
        lam = j / 16.0
        for k in k_sweep:
            e = forward(ParamPoint(float(k), lam))
            rows.append(f"fixed_lambda,{_fmt(lam)},{_fmt(k)},{_fmt(e.alpha)},{_fmt(e.beta)}")
    lam_sweep = np.linspace(0.02, 0.48, args.samples)
    for k in (0.5, 1.0 / math.sqrt(2.0), 0.8):
        for lam in lam_sweep:
            e = forward(ParamPoint(k, float(lam)))
            rows.append(f"fixed_k,{_fmt(k)},{_fmt(lam)},{_fmt(e.alpha)},{_fmt(e.beta)}")
    _emit(_csv("family,fixed_value,k_or_lambda,alpha,beta", rows), args.out)
    return 0


def _svg_path(points, transform) -> str:
    cmds = []
    for i, z in enumerate(points):
        x, y = transform(z)
        cmds.append(f"{'M' if i == 0 else 'L'} {x:.3f} {y:.3f}")
    return " ".join(cmds)


def _cmd_plot(args) -> int:
    if args.out is None:
        raise DomainError("plot requires --out FILE.svg")
    cfg = build_config(args.n, args.m, args.k, args.tol)
    pair = recover_pell(cfg)
    trace = trace_arc(cfg, args.samples)
    report = extremal_points(cfg, trace)
    xmax = max(1.4, abs(cfg.a3.real) + 0.4)
    ymax = max(1.0, abs(cfg.a3.imag) + 0.4)
    window = (-xmax, xmax, -ymax, ymax)
    preimage = trace_real_preimage(cfg, window, args.resolution, pair)

    width, height, margin = 720.0, 540.0, 24.0
    sx = (width - 2 * margin) / (2 * xmax)
    sy = (height - 2 * margin) / (2 * ymax)
    s = min(sx, sy)

    def tf(z: complex):
        return (width / 2 + s * z.real, height / 2 - s * z.imag)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        '<g id="preimage" fill="none" stroke="#888888" stroke-width="1" '
        'stroke-dasharray="3 3">',
    ]
    parts.extend(f'<path d="{_svg_path(line, tf)}"/>' for line in preimage if len(line) > 1)
    parts.append("</g>")
    x_a, y_a = tf(-1.0 + 0.0j)
    x_b, y_b = tf(1.0 + 0.0j)
    parts.append(
        f'<g id="interval"><line x1="{x_a:.3f}" y1="{y_a:.3f}" x2="{x_b:.3f}" '
        f'y2="{y_b:.3f}" stroke="black" stroke-width="2.5"/></g>'
    )
    parts.append('<g id="arc" fill="none" stroke="black" stroke-width="2.5">')
    parts.append(f'<path d="{_svg_path(trace.z_points, tf)}"/>')
    parts.append("</g>")
    parts.append('<g id="extremals" fill="#c23b22" stroke="none">')
    for z in list(report.on_interval.astype(complex)) + list(report.on_arc):
        x, y = tf(z)
        parts.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="3.5"/>')
    parts.append("</g>")
    parts.append("</svg>")
    _emit("\n".join(parts) + "\n", args.out)
    return 0 if report.certified else 2


# ---------------------------------------------------------------------------
# parser / dispatch
# ---------------------------------------------------------------------------


def _add_tuple_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="polynomial degree n >= 2")
    p.add_argument("--m", type=int, required=True, help="numerator of lambda = m/n")
    p.add_argument("--k", type=float, required=True, help="elliptic modulus in (0, 1)")


def _build_parser(default_tol: float) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pellarcs",
        description="Inverse polynomial images: an interval plus a conjugate-symmetric arc.",
    )
    parser.add_argument("--tol", type=float, default=default_tol,
                        help="series truncation tolerance (env PELLARCS_TOL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="endpoint alpha+i*beta of parameters (k, lambda)")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--lambda", type=float, required=True, dest="lambda")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_map)

    p = sub.add_parser("invert", help="parameters (k, lambda) of an endpoint")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_invert)

    p = sub.add_parser("tuple", help="problem instance summary: z*, kind, extremal counts")
    _add_tuple_args(p)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_tuple)

    p = sub.add_parser("pell", help="recover the certified polynomial pair")
    _add_tuple_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_pell)

    p = sub.add_parser("trace", help="arc polyline and real-preimage contours as CSV")
    _add_tuple_args(p)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_trace)

    p = sub.add_parser("extremals", help="extremal points on [-1,1] and on the arc")
    _add_tuple_args(p)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_extremals)

    p = sub.add_parser("boundary", help="k*(lambda) separating curve as CSV")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_boundary)

    p = sub.add_parser("paramcurves", help="fixed-lambda and fixed-k endpoint families as CSV")
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_paramcurves)

    p = sub.add_parser("plot", help="SVG picture: interval, arc, preimage, extremal markers")
    _add_tuple_args(p)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_plot)

    return parser


def main(argv=None) -> int:
    default_tol = _DEFAULT_TOL
    env_tol = os.environ.get("PELLARCS_TOL")
    if env_tol is not None:
        try:
            default_tol = float(env_tol)
        except ValueError:
            print(f"error: PELLARCS_TOL={env_tol!r} is not a number", file=sys.stderr)
            return 1
    parser = _build_parser(default_tol)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses status 2 for usage problems; those are input errors here
        return 0 if exc.code in (0, None) else 1
    try:
        return args.fn(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _CERT_ERRORS as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return 2
    except PellarcsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
