"""Tracing integral curves of the lifted field near singular points.

The integrator is an embedded Dormand-Prince 5(4) pair with a per-step hook
for the termination rules that matter here: leaving a box, re-crossing the
singular locus, stalling on the locus, or closing in on another singular
point of the field. Solutions issuing from a singular point are obtained by
seeding next to it and integrating *away*, then reversing the samples.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import DEFAULTS, AnalysisOptions, Verdict, classify, delta_gradient, finite_frame
from .errors import InsufficientSamples, NotTraceable, SeedRejected, StepSizeUnderflow
from .lifted import field_array
from .poly import Direction, PlanePoint, SingularOde, poly_diff, poly_eval

__all__ = [
    "IntegrateOptions",
    "Trajectory",
    "integrate",
    "TraceOptions",
    "trace_from_singular",
    "FamilyEstimate",
    "estimate_exponent",
    "detect_log_term",
    "OscillationOptions",
    "OscillationReport",
    "oscillation_detect",
]

# Dormand & Prince (1980), RK5(4)7M
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass(frozen=True)
class IntegrateOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 100_000
    max_step: float = math.inf
    first_step: Optional[float] = None
    box: Optional[tuple[float, float, float, float]] = None  # xmin, xmax, ymin, ymax
    pmax: float = 1e8
    stop_radius: float = 1e-9
    field_floor: float = 1e-14
    t_end: Optional[float] = None


@dataclass
class Trajectory:
    """Samples ``(t, x, y, p)`` in integration order plus metadata."""

    samples: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def x(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def y(self) -> np.ndarray:
        return self.samples[:, 2]

    @property
    def p(self) -> np.ndarray:
        return self.samples[:, 3]

    def __len__(self) -> int:
        return len(self.samples)

    @classmethod
    def from_samples(cls, x, y, p, t=None, **meta) -> "Trajectory":
        x = np.asarray(x, dtype=float)
        t = np.arange(len(x), dtype=float) if t is None else np.asarray(t, dtype=float)
        return cls(np.column_stack([t, x, np.asarray(y, float), np.asarray(p, float)]), dict(meta))

    def reversed(self) -> "Trajectory":
        meta = dict(self.meta)
        meta["reversed"] = not meta.get("reversed", False)
        return Trajectory(self.samples[::-1].copy(), meta)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(_json_safe(self.meta), sort_keys=True) + "\n")
        buf.write("t,x,y,p\n")
        for row in self.samples:
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class _Probe:
    """Distance-to-singular-set estimate for the lifted field."""

    def __init__(self, ode: SingularOde):
        self.ode = ode
        self.dx = poly_diff(ode.delta, "x")
        self.dy = poly_diff(ode.delta, "y")
        self.mux = [poly_diff(m, "x") for m in ode.m.mu]
        self.muy = [poly_diff(m, "y") for m in ode.m.mu]

    def distance(self, s) -> float:
        x, y, p = s
        q = (x, y)
        d = poly_eval(self.ode.delta, q)
        gd = math.hypot(poly_eval(self.dx, q), poly_eval(self.dy, q))
        m = self.ode.M(x, y, p)
        mx = sum(poly_eval(c, q) * p**i for i, c in enumerate(self.mux))
        my = sum(poly_eval(c, q) * p**i for i, c in enumerate(self.muy))
        mp = self.ode.m.d_dp(q, p)
        gm = math.sqrt(mx * mx + my * my + mp * mp)
        dd = abs(d) / gd if gd > 0 else (0.0 if d == 0 else math.inf)
        dm = abs(m) / gm if gm > 0 else (0.0 if m == 0 else math.inf)
        return max(dd, dm)


def _initial_step(f, s0, f0, rtol, atol) -> float:
    scale = atol + rtol * np.abs(s0)
    d0 = np.sqrt(np.mean((s0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(s0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def integrate(ode: SingularOde, T0, direction: str = "forward",
              opts: IntegrateOptions = IntegrateOptions(), meta: Optional[dict] = None) -> Trajectory:
    """Adaptive trace of the lifted field from ``T0``.

    ``direction`` is ``"forward"`` or ``"backward"`` in field time. The
    returned trajectory records ``meta["termination"]``, one of
    ``Stationary``, ``LeftBox``, ``LocusRecross``, ``NearSingular``,
    ``MaxSteps`` or ``TimeLimit``.
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    sgn = 1.0 if direction == "forward" else -1.0
    base = field_array(ode)

    def f(s):
        return sgn * base(s)

    s = np.asarray(T0, dtype=float).copy()
    info = {"ode": ode.name, "start": s.tolist(), "direction": direction}
    if meta:
        info.update(meta)
    rows = [(0.0, *s)]

    def done(reason):
        info["termination"] = reason
        info["steps"] = len(rows) - 1
        return Trajectory(np.array(rows, dtype=float), info)

    f0 = f(s)
    if np.linalg.norm(f0) < opts.field_floor:
        return done("Stationary")

    probe = _Probe(ode)
    d_start = poly_eval(ode.delta, (s[0], s[1]))
    side0 = np.sign(d_start)
    tau = 0.0
    tau_end = opts.t_end
    h = opts.first_step or _initial_step(f, s, f0, opts.rtol, opts.atol)
    h = min(h, opts.max_step)
    k1 = f0
    for _ in range(opts.max_steps):
        if tau_end is not None and tau + h >= tau_end:
            h = tau_end - tau
        while True:
            if h < 1e-13 * max(1.0, abs(tau)):
                raise StepSizeUnderflow(sgn * tau, s.copy(), done("StepSizeUnderflow"))
            ks = [k1]
            for i in range(1, 7):
                a = _A[i]
                ks.append(f(s + h * sum(a[j] * ks[j] for j in range(i))))
            K = np.array(ks)
            s_new = s + h * (_B5 @ K)
            err_vec = h * (_E @ K)
            scale = opts.atol + opts.rtol * np.maximum(np.abs(s), np.abs(s_new))
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
            if err <= 1.0 and np.all(np.isfinite(s_new)):
                break
            fac = 0.2 if not np.isfinite(err) else max(0.2, 0.9 * err ** -0.2)
            h *= fac
        tau += h
        k1 = ks[6]  # FSAL
        s = s_new

        d_now = poly_eval(ode.delta, (s[0], s[1]))
        if side0 != 0 and np.sign(d_now) != side0:
            return done("LocusRecross")
        if side0 == 0 and d_now != 0:
            side0 = np.sign(d_now)
        rows.append((sgn * tau, *s))

        if opts.box is not None:
            xmin, xmax, ymin, ymax = opts.box
            if not (xmin <= s[0] <= xmax and ymin <= s[1] <= ymax):
                return done("LeftBox")
        if abs(s[2]) > opts.pmax:
            return done("LeftBox")
        if tau_end is not None and tau >= tau_end:
            return done("TimeLimit")
        if np.linalg.norm(k1) < opts.field_floor:
            return done("Stationary")
        if probe.distance(s) <= opts.stop_radius:
            return done("NearSingular")

        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h = min(h * fac, opts.max_step)
    return done("MaxSteps")


# -- tracing from a singular point -------------------------------------------

TRACEABLE = (
    Verdict.SADDLE,
    Verdict.NODE_NON_RESONANT,
    Verdict.NODE_POSITIVE_RESONANT,
    Verdict.NODE_RECIPROCAL_RESONANT,
    Verdict.NEGATIVE_RATIONAL_RESONANT,
    Verdict.MULTIPLE_ROOT,
)


@dataclass(frozen=True)
class TraceOptions:
    """Seeding and integration settings for :func:`trace_from_singular`.

    For node verdicts an offset ``c`` sets the seed slope to
    ``p_i + c * d**lam`` where ``d`` is the seed's distance to the locus,
    i.e. ``c`` is the family parameter of ``p - p_i ~ c |x|^lam``. For the
    other verdicts the offset is a plain slope perturbation.
    """

    seed_radius: float = 1e-3
    box_halfwidth: float = 1.0
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 100_000
    samples_per_unit: float = 20.0
    pmax: float = 1e3
    analysis: AnalysisOptions = DEFAULTS


def trace_from_singular(ode: SingularOde, q0, dir: Direction, side: str, offsets: Sequence[float],
                        opts: TraceOptions = TraceOptions()) -> list[Trajectory]:
    """Solutions issuing from ``q0`` with tangent ``dir`` into one side of the locus.

    Each returned trajectory is ordered towards the singular point. For a
    vertical ``dir`` the work happens in the axis-swapped frame and the
    samples are in that frame (``meta["frame"] == "swapped"``).
    """
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    if not offsets:
        return []
    q0 = PlanePoint(float(q0[0]), float(q0[1]))
    cl = classify(ode, q0, dir, opts.analysis)
    if cl.verdict not in TRACEABLE:
        raise NotTraceable(cl.verdict)
    f_ode, f_q, f_dir, swapped = finite_frame(ode, q0, cl.direction or dir)
    pi = f_dir.slope
    gx, gy = delta_gradient(f_ode, f_q)
    lam1 = gx + pi * gy
    lam2 = f_ode.m.d_dp(f_q, pi)
    if abs(lam1) <= opts.analysis.tol_eigen:
        raise NotTraceable(Verdict.NON_TRANSVERSAL)
    grad = math.hypot(gx, gy)

    q = (f_q.x, f_q.y)
    mx = sum(poly_eval(poly_diff(m, "x"), q) * pi**i for i, m in enumerate(f_ode.m.mu))
    my = sum(poly_eval(poly_diff(m, "y"), q) * pi**i for i, m in enumerate(f_ode.m.mu))
    if abs(lam1 - lam2) > 1e-9 * (abs(lam1) + abs(lam2)):
        vp = (mx + pi * my) / (lam1 - lam2)
    else:
        vp = 0.0
    norm = math.hypot(1.0, pi)
    v1 = np.array([1.0, pi, vp]) / norm

    sigma = 1.0 if side == "plus" else -1.0
    s = math.copysign(1.0, lam1) * sigma
    ratio = abs(lam2 / lam1) if lam2 != 0 else 0.0
    r = opts.seed_radius / max(1.0, ratio)
    dist = abs(lam1) * r / (norm * grad)
    is_node = cl.verdict.is_node
    lam = lam2 / lam1

    direction = "forward" if lam1 > 0 else "backward"
    H = opts.box_halfwidth
    iopts = IntegrateOptions(
        rtol=opts.rtol, atol=opts.atol, max_steps=opts.max_steps,
        max_step=1.0 / (opts.samples_per_unit * abs(lam1)),
        box=(f_q.x - H, f_q.x + H, f_q.y - H, f_q.y + H),
        pmax=opts.pmax, stop_radius=0.01 * dist,
    )
    T0 = np.array([f_q.x, f_q.y, pi])
    out = []
    for k, off in enumerate(offsets):
        dp = off * dist**lam if is_node else off
        seed = T0 + s * r * v1 + np.array([0.0, 0.0, dp])
        d_seed = poly_eval(f_ode.delta, (seed[0], seed[1]))
        if d_seed == 0 or math.copysign(1.0, d_seed) != sigma:
            raise SeedRejected(f"seed {seed.tolist()} is not strictly on the {side} side")
        meta = {
            "index": k, "offset": float(off), "side": side, "verdict": cl.verdict.value,
            "frame": "swapped" if swapped else "original",
            "frame_point": [f_q.x, f_q.y], "frame_slope": pi,
            "point": [q0.x, q0.y], "dir": str(cl.direction or dir),
            "lambda1": lam1, "lambda2": lam2, "seed": seed.tolist(),
        }
        traj = integrate(f_ode, seed, direction, iopts, meta)
        out.append(traj.reversed())
    return out


# -- family estimates ---------------------------------------------------------

@dataclass(frozen=True)
class FamilyEstimate:
    side: str
    exponent_hat: float
    log_coefficient_hat: float
    fit_residual: float
    intercepts: tuple[float, ...] = ()
    window: tuple[float, float] = (0.0, 0.0)
    n_trajectories: int = 0

    def as_dict(self) -> dict:
        return _json_safe({
            "side": self.side, "exponent_hat": self.exponent_hat,
            "log_coefficient_hat": self.log_coefficient_hat, "fit_residual": self.fit_residual,
            "intercepts": list(self.intercepts), "window": list(self.window),
            "n_trajectories": self.n_trajectories,
        })


def _frame_of(traj: Trajectory, q0, dir: Optional[Direction]):
    if traj.meta.get("frame") == "swapped":
        fx, fy = traj.meta["frame_point"]
        return fx, fy, float(traj.meta["frame_slope"])
    if dir is None or dir.is_infinite:
        pi = float(traj.meta.get("frame_slope", 0.0))
    else:
        pi = dir.slope
    return float(q0[0]), float(q0[1]), pi


def _side_of(trajs: Sequence[Trajectory], x0: float) -> str:
    sides = {t.meta.get("side") for t in trajs}
    if len(sides) == 1 and None not in sides:
        return sides.pop()
    signs = {float(np.sign(np.median(t.x - x0))) for t in trajs}
    if len(signs) != 1:
        raise ValueError("trajectories lie on different sides")
    return "plus" if signs.pop() > 0 else "minus"


def _default_window(trajs, x0, window):
    if window is not None:
        return float(window[0]), float(window[1])
    extent = min(float(np.max(np.abs(t.x - x0))) for t in trajs)
    return 1e-2 * extent, 1e-1 * extent


def _fit(trajs, x0, window, min_samples, transform):
    lo, hi = window
    slopes, intercepts, resid = [], [], []
    for tr in trajs:
        d = np.abs(tr.x - x0)
        mask = (d >= lo) & (d <= hi)
        if mask.sum() < min_samples:
            raise InsufficientSamples(
                f"trajectory {tr.meta.get('index', '?')} has {int(mask.sum())} samples in window {window}, need {min_samples}")
        u, v = transform(tr.x[mask] - x0, tr.p[mask])
        A = np.column_stack([u, np.ones_like(u)])
        coef, *_ = np.linalg.lstsq(A, v, rcond=None)
        slopes.append(float(coef[0]))
        intercepts.append(float(coef[1]))
        resid.append(float(np.sqrt(np.mean((A @ coef - v) ** 2))))
    return slopes, intercepts, resid


def estimate_exponent(trajectories: Sequence[Trajectory], q0, dir: Optional[Direction] = None,
                      window: Optional[tuple[float, float]] = None, min_samples: int = 20) -> FamilyEstimate:
    """Power-law exponent of ``p - p_i`` against ``|x - x0|``, averaged over trajectories."""
    trajs = list(trajectories)
    if len(trajs) < 2:
        raise InsufficientSamples("need at least two trajectories")
    x0, _, pi = _frame_of(trajs[0], q0, dir)
    side = _side_of(trajs, x0)
    window = _default_window(trajs, x0, window)

    def tf(dx, p):
        dev = np.abs(p - pi)
        if np.any(dev == 0):
            raise InsufficientSamples("p coincides with the admissible slope inside the window")
        return np.log(np.abs(dx)), np.log(dev)

    slopes, icpt, resid = _fit(trajs, x0, window, min_samples, tf)
    return FamilyEstimate(side, float(np.mean(slopes)), 0.0, float(np.mean(resid)),
                          tuple(icpt), window, len(trajs))


def detect_log_term(trajectories: Sequence[Trajectory], q0, dir: Optional[Direction], n: int,
                    window: Optional[tuple[float, float]] = None, min_samples: int = 20) -> FamilyEstimate:
    """Fit ``(p - p_i) / x^n = c + eps ln|x|``; ``log_coefficient_hat`` is the mean ``eps``."""
    trajs = list(trajectories)
    if not trajs:
        raise InsufficientSamples("no trajectories")
    x0, _, pi = _frame_of(trajs[0], q0, dir)
    side = _side_of(trajs, x0)
    window = _default_window(trajs, x0, window)

    def tf(dx, p):
        return np.log(np.abs(dx)), (p - pi) / dx**n

    slopes, icpt, resid = _fit(trajs, x0, window, min_samples, tf)
    return FamilyEstimate(side, float(n), float(np.mean(slopes)), float(np.mean(resid)),
                          tuple(icpt), window, len(trajs))


# -- oscillation ----------------------------------------------------------------

@dataclass(frozen=True)
class OscillationOptions:
    """Heuristic thresholds; the defaults target the x^-1 type oscillation.

    Log-periodic oscillation (period ``2 pi`` in ``ln|x|``) needs
    ``gamma`` well below ``exp(-2 pi)`` to put two extrema in one window.
    """

    gamma: float = 0.5
    min_extrema: int = 2
    min_windows: int = 3
    tol_proper: float = 1e-2


@dataclass(frozen=True)
class OscillationReport:
    extrema_counts: tuple[int, ...]
    verdict: str
    p_limit_hat: Optional[float] = None
    heuristic: bool = True

    def as_dict(self) -> dict:
        return _json_safe({"extrema_counts": list(self.extrema_counts), "verdict": self.verdict,
                           "p_limit_hat": self.p_limit_hat, "heuristic": self.heuristic})


def oscillation_detect(traj: Trajectory, q0, opts: OscillationOptions = OscillationOptions()) -> OscillationReport:
    """Classify the approach of ``p`` as ``x -> x0`` over geometric windows.

    Window ``k`` covers ``|x - x0|`` in ``[r gamma^(k+1), r gamma^k]`` with
    ``r`` the largest distance in the trajectory; only windows fully covered
    by samples are used.
    """
    if not 0.0 < opts.gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    x0 = traj.meta["frame_point"][0] if traj.meta.get("frame") == "swapped" else float(q0[0])
    d = np.abs(traj.x - x0)
    keep = d > 0
    d, p = d[keep], traj.p[keep]
    if len(d) < 3:
        return OscillationReport((), "inconclusive")
    order = np.argsort(d, kind="stable")
    d, p = d[order], p[order]
    r, dmin = float(d[-1]), float(d[0])
    nwin = 0
    while r * opts.gamma ** (nwin + 1) >= dmin * (1 - 1e-12):
        nwin += 1
    if nwin == 0:
        return OscillationReport((), "inconclusive")

    dp = np.diff(p)
    ext = np.nonzero(dp[:-1] * dp[1:] < 0)[0] + 1
    # window index of each extremum: largest k with d <= r gamma^k
    kidx = np.floor(np.log(d[ext] / r) / math.log(opts.gamma)).astype(int)
    counts = [int(np.sum(kidx == k)) for k in range(nwin)]

    run = 0
    for c in counts:
        run = run + 1 if c >= opts.min_extrema else 0
        if run >= opts.min_windows:
            return OscillationReport(tuple(counts), "oscillating")

    if nwin >= opts.min_windows:
        lo = r * opts.gamma ** nwin
        hi = r * opts.gamma ** (nwin - opts.min_windows)
        seg = p[(d >= lo) & (d <= hi)]
        if len(seg) and np.ptp(seg) <= opts.tol_proper * max(1.0, float(np.max(np.abs(seg)))):
            return OscillationReport(tuple(counts), "proper", float(p[0]))
    return OscillationReport(tuple(counts), "inconclusive")
