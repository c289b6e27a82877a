"""Command line front end: ``singode analyze | trace | portrait | verify``.

Exit codes: 0 success, 1 failed verification, 2 bad input, 3 numerical
failure, 4 classification does not allow tracing.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import __version__
from .analysis import DEFAULTS, AnalysisOptions, Verdict, analyze_point, classify
from .corpus import corpus_get, corpus_list, run_checks
from .errors import InsufficientSamples, NotTraceable, NumericalError
from .integrator import TraceOptions, _json_safe, detect_log_term, estimate_exponent, trace_from_singular
from .poly import Direction, SingularOde, load_equation, poly_eval
from .portrait import build_portrait, portrait_csv, portrait_svg

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC, EXIT_UNTRACEABLE = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _floats(text: str, n: Optional[int], what: str) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise InputError(f"{what}: expected {n} values, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise InputError(f"{what}: values must be finite")
    return vals


def _slope(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "+inf", "-inf"):
        return math.inf
    try:
        v = float(t)
    except ValueError:
        raise InputError(f"--dir: expected a number or 'inf', got {text!r}") from None
    if math.isnan(v):
        raise InputError("--dir: NaN is not a slope")
    return v


def _load(path: str) -> SingularOde:
    try:
        return load_equation(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _opts(args) -> AnalysisOptions:
    return AnalysisOptions(tol_locus=args.tol_locus, tol_eigen=args.tol_eigen, tol_root=args.tol_root,
                           tol_rational=args.tol_rational, qmax=args.qmax)


def _dump(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _meta(command: str, args, **extra) -> dict:
    m = {"tool": "singode", "version": __version__, "command": command}
    if getattr(args, "input", None):
        m["input"] = args.input
    m.update(extra)
    return m


# -- analyze ------------------------------------------------------------------

def _crossings(ode: SingularOde, xs, ys) -> list[tuple[float, float]]:
    """Zeros of delta on lattice edges, located by bracketing root search."""
    found = set()

    def d(x, y):
        return poly_eval(ode.delta, (x, y))

    def on_edge(f, a, b, point):
        fa, fb = f(a), f(b)
        if fa == 0.0:
            found.add(point(a))
        if fa * fb < 0:
            found.add(point(brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)))

    for y in ys:
        for a, b in zip(xs[:-1], xs[1:]):
            on_edge(lambda x, y=y: d(x, y), a, b, lambda x, y=y: (x, y))
        f_last = d(xs[-1], y)
        if f_last == 0.0:
            found.add((xs[-1], y))
    for x in xs:
        for a, b in zip(ys[:-1], ys[1:]):
            on_edge(lambda y, x=x: d(x, y), a, b, lambda y, x=x: (x, y))
    pts = sorted((float(x), float(y)) for x, y in found)
    out: list[tuple[float, float]] = []
    for p in pts:
        if not any(abs(p[0] - q[0]) <= 1e-12 and abs(p[1] - q[1]) <= 1e-12 for q in out):
            out.append(p)
    return out


def cmd_analyze(args) -> int:
    if (args.point is None) == (args.grid is None):
        raise InputError("analyze needs exactly one of --point or --grid")
    opts = _opts(args)
    if args.point is not None:
        x, y = _floats(args.point, 2, "--point")
    else:
        g = _floats(args.grid, 6, "--grid")
        xmin, xmax, ymin, ymax = g[:4]
        nx, ny = int(g[4]), int(g[5])
        if g[4] != nx or g[5] != ny or nx < 2 or ny < 2:
            raise InputError("--grid: NX and NY must be integers >= 2")
        if not (xmin < xmax and ymin < ymax):
            raise InputError("--grid: empty window")
    ode = _load(args.input)
    meta = _meta("analyze", args, options=opts.as_dict())
    if args.point is not None:
        report = {"meta": meta, **analyze_point(ode, (x, y), opts)}
    else:
        xs = np.linspace(xmin, xmax, nx)
        ys = np.linspace(ymin, ymax, ny)
        rows = [[analyze_point(ode, (float(xv), float(yv)), opts)["verdict"] for xv in xs] for yv in ys]
        crossings = [analyze_point(ode, q, opts) for q in _crossings(ode, xs, ys)]
        report = {
            "meta": meta,
            "grid": {"x": xs.tolist(), "y": ys.tolist(), "verdicts": rows},
            "crossings": crossings,
        }
    _emit(_dump(report), args.out)
    return EXIT_OK


# -- trace --------------------------------------------------------------------

def _family_summary(cl, trajs, q0, dir) -> dict:
    out = {"exponent_hat": None, "log_coefficient_hat": None, "notes": []}
    if cl.verdict.is_node:
        try:
            est = estimate_exponent(trajs, q0, dir)
            out["exponent_hat"] = est.exponent_hat
            out["exponent_fit"] = est.as_dict()
        except (InsufficientSamples, ValueError) as exc:
            out["notes"].append(f"exponent: {exc}")
    else:
        out["notes"].append(f"no family-form estimate for {cl.verdict.value}")
    if cl.verdict is Verdict.NODE_POSITIVE_RESONANT:
        n = int(round(cl.eigen.lam))
        try:
            est = detect_log_term(trajs, q0, dir, n)
            out["log_coefficient_hat"] = est.log_coefficient_hat
            out["log_fit"] = est.as_dict()
        except (InsufficientSamples, ValueError) as exc:
            out["notes"].append(f"log term: {exc}")
    return out


def cmd_trace(args) -> int:
    x, y = _floats(args.point, 2, "--point")
    slope = _slope(args.dir)
    offsets = _floats(args.offsets, None, "--offsets")
    ode = _load(args.input)
    opts = _opts(args)
    topts = TraceOptions(seed_radius=args.seed_radius, box_halfwidth=args.box, analysis=opts)
    dir = Direction.from_slope(slope)
    cl = classify(ode, (x, y), dir, opts)
    trajs = trace_from_singular(ode, (x, y), dir, args.side, offsets, topts)

    out = Path(args.out)
    stem = out.with_suffix("") if out.suffix == ".csv" else out
    files = []
    for k, tr in enumerate(trajs):
        path = Path(f"{stem}_{k}.csv")
        tr.to_csv(path)
        files.append(path.name)
    summary = {
        "meta": _meta("trace", args, options=opts.as_dict(),
                      trace_options={"seed_radius": topts.seed_radius, "box_halfwidth": topts.box_halfwidth,
                                     "rtol": topts.rtol, "atol": topts.atol, "pmax": topts.pmax}),
        "point": [x, y], "dir": str(dir), "side": args.side, "offsets": offsets,
        "classification": {
            "verdict": cl.verdict.value,
            "lambda1": cl.eigen.lambda1 if cl.eigen else None,
            "lambda2": cl.eigen.lambda2 if cl.eigen else None,
            "lambda": cl.eigen.lam if cl.eigen else None,
            "family_form": cl.family_form.as_dict() if cl.family_form else None,
        },
        "files": files,
        "termination": [tr.meta.get("termination") for tr in trajs],
        **_family_summary(cl, trajs, (x, y), dir),
    }
    Path(f"{stem}_summary.json").write_text(_dump(summary), encoding="utf-8")
    return EXIT_OK


# -- portrait -----------------------------------------------------------------

def cmd_portrait(args) -> int:
    window = _floats(args.window, 4, "--window")
    if not (window[0] < window[1] and window[2] < window[3]):
        raise InputError("--window: empty window")
    fmt = Path(args.out).suffix.lower().lstrip(".")
    if fmt not in ("svg", "csv"):
        raise InputError("--out must end in .svg or .csv")
    ode = _load(args.input)
    pt = build_portrait(ode, window, grid=args.grid, points=args.points, opts=_opts(args))
    text = portrait_svg(pt, title=ode.name) if fmt == "svg" else portrait_csv(pt)
    Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


# -- verify -------------------------------------------------------------------

def cmd_verify(args) -> int:
    if args.example:
        try:
            entries = [corpus_get(args.example)]
        except KeyError:
            raise InputError(f"unknown example {args.example!r}") from None
    else:
        entries = corpus_list()
    results = [r for e in entries for r in run_checks(e, numeric=not args.no_numeric)]
    lines = [r.line() for r in results]
    n_fail = sum(not r.passed for r in results)
    summary = {
        "meta": _meta("verify", args, examples=[e.id for e in entries]),
        "total": len(results), "passed": len(results) - n_fail, "failed": n_fail,
        "checks": [r.as_dict() for r in results],
    }
    text = "\n".join(lines) + "\n" + _dump(summary)
    _emit(text, args.out)
    return EXIT_OK if n_fail == 0 else EXIT_FAIL


# -- parser -------------------------------------------------------------------

def _add_tolerances(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol-locus", type=float, default=DEFAULTS.tol_locus, help="|delta| threshold for the locus")
    p.add_argument("--tol-eigen", type=float, default=DEFAULTS.tol_eigen, help="zero threshold for lambda1, lambda2")
    p.add_argument("--tol-root", type=float, default=DEFAULTS.tol_root, help="root clustering tolerance")
    p.add_argument("--tol-rational", type=float, default=DEFAULTS.tol_rational,
                   help="relative tolerance for rational detection")
    p.add_argument("--qmax", type=int, default=DEFAULTS.qmax, help="largest denominator tried for lambda")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    ap = argparse.ArgumentParser(prog="singode", formatter_class=fmt,
                                 description="Singular points of delta(x,y) y'' = M(x,y,y') with M cubic in y'.")
    ap.add_argument("--version", action="version", version=f"singode {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", formatter_class=fmt, help="classify a point or scan a lattice")
    p.add_argument("--input", required=True, help="equation file (JSON)")
    p.add_argument("--point", help="X,Y")
    p.add_argument("--grid", help="XMIN,XMAX,YMIN,YMAX,NX,NY")
    p.add_argument("--out", help="write the report here instead of stdout")
    _add_tolerances(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("trace", formatter_class=fmt, help="trace solutions issuing from a singular point")
    p.add_argument("--input", required=True, help="equation file (JSON)")
    p.add_argument("--point", required=True, help="X,Y on the singular locus")
    p.add_argument("--dir", required=True, help="admissible slope P, or 'inf'")
    p.add_argument("--side", required=True, choices=("plus", "minus"), help="sign of delta on the traced side")
    p.add_argument("--offsets", required=True, help="comma-separated family offsets")
    p.add_argument("--out", required=True, help="output stem; writes STEM_k.csv and STEM_summary.json")
    p.add_argument("--seed-radius", type=float, default=TraceOptions.seed_radius,
                   help="distance from the singular point where traces start")
    p.add_argument("--box", type=float, default=TraceOptions.box_halfwidth, help="half-width of the tracing box")
    _add_tolerances(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("portrait", formatter_class=fmt, help="static field and solution portrait")
    p.add_argument("--input", required=True, help="equation file (JSON)")
    p.add_argument("--window", required=True, help="XMIN,XMAX,YMIN,YMAX")
    p.add_argument("--out", required=True, help="FILE.svg or FILE.csv")
    p.add_argument("--grid", type=int, default=15, help="root-slope samples per axis")
    p.add_argument("--points", type=int, default=3, help="singular points traced along the locus")
    _add_tolerances(p)
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("verify", formatter_class=fmt, help="run the built-in corpus checks")
    p.add_argument("--example", help="only this corpus id")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--no-numeric", action="store_true", help="skip tracing-based checks")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"singode: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotTraceable as exc:
        print(f"singode: not traceable: {exc}", file=sys.stderr)
        return EXIT_UNTRACEABLE
    except (NumericalError, FloatingPointError, ZeroDivisionError, OverflowError) as exc:
        print(f"singode: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
