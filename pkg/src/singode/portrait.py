"""Static portraits: the singular locus, root-slope field and traced families.

The sampled field shows, at each grid node, the real roots of ``M(x, y, .)``:
the slopes along which a solution has zero curvature. On the locus these are
exactly the admissible directions. Traced solutions through a few points of
the locus are overlaid, coloured by verdict.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import contourpy
import numpy as np

from .analysis import (
    ALL_DIRECTIONS_DEGENERATE,
    DEFAULTS,
    AnalysisOptions,
    Verdict,
    admissible_directions,
    classify,
    delta_gradient,
)
from .errors import SingodeError
from .integrator import TraceOptions, trace_from_singular
from .poly import SingularOde, poly_eval
from .roots import effective_degree, real_roots

__all__ = ["Portrait", "build_portrait", "portrait_svg", "portrait_csv"]

TRACED = (Verdict.SADDLE, Verdict.NODE_NON_RESONANT, Verdict.NODE_POSITIVE_RESONANT,
          Verdict.NODE_RECIPROCAL_RESONANT, Verdict.NEGATIVE_RATIONAL_RESONANT)
NODE_OFFSETS = (-1.0, -0.25, 0.25, 1.0)
COLORS = {
    "Saddle": "#c0392b",
    "NodeNonResonant": "#2471a3",
    "NodePositiveResonant": "#7d3c98",
    "NodeReciprocalResonant": "#148f77",
    "NegativeRationalResonant": "#d68910",
}


@dataclass
class Portrait:
    window: tuple[float, float, float, float]
    arrows: list = field(default_factory=list)        # (x, y, slope)
    gamma: list = field(default_factory=list)         # list of (n, 2) arrays
    points: list = field(default_factory=list)        # (x, y, [(slope, verdict)])
    traces: list = field(default_factory=list)        # (verdict, (n, 2) array)


def _root_slopes(ode: SingularOde, x: float, y: float, tol: float) -> list[float]:
    coeffs = ode.m.coefficients_at((x, y))
    deg = effective_degree(coeffs, tol)
    if deg < 0:
        return []
    out = [r for r, _ in real_roots(coeffs[: deg + 1])]
    if deg < 3:
        out.append(math.inf)
    return out


def _snap_to_locus(ode: SingularOde, x: float, y: float, tol: float) -> tuple[float, float]:
    for _ in range(20):
        d = poly_eval(ode.delta, (x, y))
        if abs(d) <= tol:
            break
        gx, gy = delta_gradient(ode, (x, y))
        g2 = gx * gx + gy * gy
        if g2 == 0:
            break
        x, y = x - d * gx / g2, y - d * gy / g2
    return x, y


def _pick_along(lines, k: int) -> list[tuple[float, float]]:
    pts = np.concatenate(lines) if lines else np.empty((0, 2))
    if len(pts) < 2 or k <= 0:
        return []
    seg = np.hypot(*np.diff(pts, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    targets = (np.arange(k) + 0.5) / k * s[-1]
    return [(float(np.interp(t, s, pts[:, 0])), float(np.interp(t, s, pts[:, 1]))) for t in targets]


def build_portrait(ode: SingularOde, window, grid: int = 15, points: int = 3, resolution: int = 201,
                   opts: AnalysisOptions = DEFAULTS) -> Portrait:
    xmin, xmax, ymin, ymax = window
    if not (xmin < xmax and ymin < ymax):
        raise ValueError(f"empty window {window!r}")
    pt = Portrait((xmin, xmax, ymin, ymax))

    for x in np.linspace(xmin, xmax, grid):
        for y in np.linspace(ymin, ymax, grid):
            for s in _root_slopes(ode, float(x), float(y), opts.tol_locus):
                pt.arrows.append((float(x), float(y), s))

    if ode.delta.is_zero:
        return pt
    xs = np.linspace(xmin, xmax, resolution)
    ys = np.linspace(ymin, ymax, resolution)
    X, Y = np.meshgrid(xs, ys)
    Z = ode.delta(X, Y)
    gen = contourpy.contour_generator(X, Y, Z, line_type="Separate")
    pt.gamma = [np.asarray(line, dtype=float) for line in gen.lines(0.0) if len(line) >= 2]

    box = max(xmax - xmin, ymax - ymin)
    topts = TraceOptions(box_halfwidth=box)
    for gx, gy in _pick_along(pt.gamma, points):
        qx, qy = _snap_to_locus(ode, gx, gy, opts.tol_locus)
        dirs = admissible_directions(ode, (qx, qy), opts.tol_locus, opts.tol_root)
        if dirs is ALL_DIRECTIONS_DEGENERATE:
            pt.points.append((qx, qy, []))
            continue
        labels = []
        for ad in dirs:
            cl = classify(ode, (qx, qy), ad.dir, opts)
            labels.append((ad.slope, cl.verdict.value))
            if cl.verdict not in TRACED:
                continue
            offsets = NODE_OFFSETS if cl.verdict.is_node else (0.0,)
            for side in ("plus", "minus"):
                try:
                    trs = trace_from_singular(ode, (qx, qy), ad.dir, side, offsets, topts)
                except SingodeError:
                    continue
                for tr in trs:
                    xy = np.column_stack([tr.y, tr.x]) if tr.meta.get("frame") == "swapped" \
                        else np.column_stack([tr.x, tr.y])
                    inside = ((xy[:, 0] >= xmin) & (xy[:, 0] <= xmax)
                              & (xy[:, 1] >= ymin) & (xy[:, 1] <= ymax))
                    if inside.sum() >= 2:
                        pt.traces.append((cl.verdict.value, xy[inside]))
        pt.points.append((qx, qy, labels))
    return pt


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def portrait_svg(pt: Portrait, size: int = 600, title: str = "") -> str:
    """Plain SVG with fixed numeric formatting (byte-stable for equal input)."""
    xmin, xmax, ymin, ymax = pt.window
    pad = 30
    span = max(xmax - xmin, ymax - ymin)
    k = (size - 2 * pad) / span

    def X(x):
        return pad + (x - xmin) * k

    def Y(y):
        return size - pad - (y - ymin) * k

    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
              f'viewBox="0 0 {size} {size}">\n')
    out.write(f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>\n')
    out.write(f'<rect x="{_fmt(X(xmin))}" y="{_fmt(Y(ymax))}" width="{_fmt((xmax - xmin) * k)}" '
              f'height="{_fmt((ymax - ymin) * k)}" fill="none" stroke="#999"/>\n')
    grid_step = span / 14.0
    half = 0.35 * grid_step
    for x, y, s in pt.arrows:
        if math.isinf(s):
            dx, dy = 0.0, half
        else:
            n = math.hypot(1.0, s)
            dx, dy = half / n, half * s / n
        out.write(f'<line x1="{_fmt(X(x - dx))}" y1="{_fmt(Y(y - dy))}" x2="{_fmt(X(x + dx))}" '
                  f'y2="{_fmt(Y(y + dy))}" stroke="#bbb" stroke-width="1"/>\n')
    for line in pt.gamma:
        pts = " ".join(f"{_fmt(X(a))},{_fmt(Y(b))}" for a, b in line)
        out.write(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5" '
                  f'stroke-dasharray="4 3"/>\n')
    for verdict, xy in pt.traces:
        pts = " ".join(f"{_fmt(X(a))},{_fmt(Y(b))}" for a, b in xy)
        out.write(f'<polyline points="{pts}" fill="none" stroke="{COLORS.get(verdict, "#555")}" '
                  f'stroke-width="1.2"/>\n')
    for x, y, labels in pt.points:
        out.write(f'<circle cx="{_fmt(X(x))}" cy="{_fmt(Y(y))}" r="3" fill="black"/>\n')
    if title:
        out.write(f'<text x="{pad}" y="{pad - 10}" font-family="sans-serif" font-size="13">{title}</text>\n')
    ly = size - 8
    lx = pad
    for name, color in COLORS.items():
        out.write(f'<text x="{lx}" y="{ly}" font-family="sans-serif" font-size="10" fill="{color}">{name}</text>\n')
        lx += 7 * len(name) + 10
    out.write("</svg>\n")
    return out.getvalue()


def portrait_csv(pt: Portrait) -> str:
    out = io.StringIO()
    out.write("kind,group,x,y,slope,label\n")

    def s(v):
        return "inf" if math.isinf(v) else f"{v:.17g}"

    for i, (x, y, p) in enumerate(pt.arrows):
        out.write(f"arrow,{i},{x:.17g},{y:.17g},{s(p)},\n")
    for g, line in enumerate(pt.gamma):
        for a, b in line:
            out.write(f"gamma,{g},{a:.17g},{b:.17g},,\n")
    for i, (x, y, labels) in enumerate(pt.points):
        for p, v in labels or [(math.nan, "AllDirectionsDegenerate")]:
            out.write(f"point,{i},{x:.17g},{y:.17g},{'' if math.isnan(p) else s(p)},{v}\n")
    for i, (v, xy) in enumerate(pt.traces):
        for a, b in xy:
            out.write(f"trace,{i},{a:.17g},{b:.17g},,{v}\n")
    return out.getvalue()
