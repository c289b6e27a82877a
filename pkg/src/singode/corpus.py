"""Built-in worked examples with closed-form solution families.

Each entry carries the equation, a closed-form family ``x -> (y, p, p')``
used as an oracle, and the expected pointwise analysis at the origin. The
registry validates every closed form against its equation on load.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate as sp_integrate

from .analysis import (
    ALL_DIRECTIONS_DEGENERATE,
    DEFAULTS,
    admissible_directions,
    classify,
    locus_regularity,
    oscillation_excluded,
)
from .integrator import TraceOptions, detect_log_term, estimate_exponent, trace_from_singular
from .poly import CubicField, Direction, Metric, Poly2, SingularOde, geodesic_from_metric, poly_eval

__all__ = ["CorpusEntry", "corpus_list", "corpus_get", "residual_check", "CheckResult", "run_checks"]

SQRT2 = math.sqrt(2.0)
RESIDUAL_TOL = 1e-10

ClosedForm = Callable[..., tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    title: str
    ode: SingularOde
    parameters: dict
    closed_form: ClosedForm
    family: dict
    domain: tuple[float, float] = (1e-3, 1.0)
    point: tuple[float, float] = (0.0, 0.0)
    expected_directions: object = None  # list[(slope, mult)] or ALL_DIRECTIONS_DEGENERATE
    expected_verdicts: dict = field(default_factory=dict)
    expected_oscillation: str = "excluded"
    expected_locus: str = "regular"
    metric: Optional[Metric] = None
    negative_branch: bool = False

    def solution(self, x, **family):
        """Closed-form ``(y, p, dp/dx)`` at ``x`` for family parameters (defaults filled in)."""
        params = {**self.family, **family}
        return self.closed_form(np.asarray(x, dtype=float), **params)


def _ode(delta: Poly2, mu0=Poly2(), mu1=Poly2(), mu2=Poly2(), mu3=Poly2(), name="") -> SingularOde:
    return SingularOde(delta, CubicField((mu0, mu1, mu2, mu3)), name=name)


# -- closed forms ---------------------------------------------------------------

def _ex1_form(x, a=1.0):
    return a * x**2, 2 * a * x, 2 * a * np.ones_like(x)


def _ex2_form(x, alpha=1.0, beta=2.0):
    w = 1.0 / x
    cs, sn = np.cos(w), np.sin(w)
    y = x**2 * (alpha * cs + beta * sn)
    p = 2 * x * (alpha * cs + beta * sn) + (alpha * sn - beta * cs)
    dp = 2 * (alpha * cs + beta * sn) + (2 / x) * (alpha * sn - beta * cs) - (alpha * cs + beta * sn) / x**2
    return y, p, dp


def _ex3_form(x, alpha=1.0, beta=1.0):
    lx = np.log(np.abs(x))
    cs, sn = np.cos(lx), np.sin(lx)
    y = x * (alpha * cs + beta * sn)
    p = (alpha + beta) * cs + (beta - alpha) * sn
    dp = (-(alpha + beta) * sn + (beta - alpha) * cs) / x
    return y, p, dp


def _ex4_form(x, alpha=1.0, c=5.0, sign=1.0):
    ax = np.abs(x)
    base = 1.0 + c * ax ** (2 * alpha)
    p = sign / np.sqrt(base)
    dp = -sign * 0.5 * base**-1.5 * c * 2 * alpha * ax ** (2 * alpha - 1) * np.sign(x)

    def integrand(t):
        return sign / math.sqrt(1.0 + c * abs(t) ** (2 * alpha))

    y = np.array([sp_integrate.quad(integrand, 0.0, float(xi), epsabs=1e-14, epsrel=1e-12)[0]
                  for xi in np.atleast_1d(x)]).reshape(np.shape(x))
    return y, p, dp


def _ex5_form(x, alpha=2.0, f=None, c=0.0):
    f = {2: 1.0} if f is None else {int(k): float(v) for k, v in dict(f).items()}
    n = round(alpha)
    integer = abs(alpha - n) < 1e-12 and n >= 1
    y = np.zeros_like(x)
    p = np.zeros_like(x)
    dp = np.zeros_like(x)
    for i, fi in f.items():
        if integer and i == n:
            continue
        g = fi / (i - alpha)
        p = p + g * x**i
        dp = dp + g * i * x ** (i - 1)
        y = y + g * x ** (i + 1) / (i + 1)
    if integer:
        fn = f.get(n, 0.0)
        lx = np.log(x)
        p = p + x**n * (c + fn * lx)
        dp = dp + n * x ** (n - 1) * (c + fn * lx) + fn * x ** (n - 1)
        y = y + x ** (n + 1) / (n + 1) * (c + fn * lx) - fn * x ** (n + 1) / (n + 1) ** 2
    else:
        p = p + c * x**alpha
        dp = dp + c * alpha * x ** (alpha - 1)
        y = y + c * x ** (alpha + 1) / (alpha + 1)
    return y, p, dp


def _geodesic_cy_form(x, k=1.0):
    y = np.sqrt(2 * k * x)
    p = np.sqrt(k / (2 * x))
    dp = -0.5 * np.sqrt(k / 2) * x**-1.5
    return y, p, dp


# -- entries ----------------------------------------------------------------------

def ex4_ode(alpha: float) -> SingularOde:
    return _ode(Poly2.x(), mu1=Poly2.const(-alpha), mu3=Poly2.const(alpha), name=f"ex4(alpha={alpha!r})")


def ex5_ode(alpha: float, f: Optional[dict] = None) -> SingularOde:
    f = {2: 1.0} if f is None else f
    if any(int(i) < 1 for i in f):
        raise ValueError("f must vanish at x = 0 (powers >= 1)")
    mu0 = Poly2.from_terms({(int(i), 0): v for i, v in f.items()})
    return _ode(Poly2.x(), mu0=mu0, mu1=Poly2.const(alpha), name=f"ex5(alpha={alpha!r})")


def _ex4_entry(eid: str, alpha: float) -> CorpusEntry:
    lam0, lam1 = -alpha, 2 * alpha

    def verdict(lam):
        if abs(lam - round(lam)) < 1e-12:
            return "NodePositiveResonant" if lam > 0 else "NegativeRationalResonant"
        return "NodeNonResonant" if lam > 0 else "Saddle"

    return CorpusEntry(
        id=eid, title=f"x p' = alpha p (p^2 - 1), alpha = {alpha:.6g}",
        ode=ex4_ode(alpha), parameters={"alpha": alpha},
        closed_form=lambda x, **kw: _ex4_form(x, alpha=alpha, **kw),
        family={"c": 5.0, "sign": 1.0},
        expected_directions=[(-1.0, 1), (0.0, 1), (1.0, 1)],
        expected_verdicts={-1.0: verdict(lam1), 0.0: verdict(lam0), 1.0: verdict(lam1)},
        negative_branch=True,
    )


def _build() -> list[CorpusEntry]:
    entries = [
        CorpusEntry(
            id="ex1", title="2y p' = p^2",
            ode=_ode(Poly2.from_terms({(0, 1): 2.0}), mu2=Poly2.const(1.0), name="ex1"),
            parameters={}, closed_form=_ex1_form, family={"a": 1.0},
            expected_directions=[(0.0, 2), (math.inf, 1)],
            expected_verdicts={0.0: "MultipleRoot", math.inf: "NegativeRationalResonant"},
            negative_branch=True,
        ),
        CorpusEntry(
            id="ex2", title="x^4 p' = 2x^3 p - (2x^2 + 1) y",
            ode=_ode(Poly2.from_terms({(4, 0): 1.0}),
                     mu0=Poly2.from_terms({(2, 1): -2.0, (0, 1): -1.0}),
                     mu1=Poly2.from_terms({(3, 0): 2.0}), name="ex2"),
            parameters={}, closed_form=_ex2_form, family={"alpha": 1.0, "beta": 2.0},
            domain=(1e-2, 1.0),
            expected_directions=ALL_DIRECTIONS_DEGENERATE,
            expected_verdicts={0.0: "DegenerateLocus"},
            expected_oscillation="not_excluded", expected_locus="degenerate",
            negative_branch=True,
        ),
        CorpusEntry(
            id="ex3", title="x^2 p' = x p - 2y",
            ode=_ode(Poly2.from_terms({(2, 0): 1.0}), mu0=Poly2.from_terms({(0, 1): -2.0}),
                     mu1=Poly2.x(), name="ex3"),
            parameters={}, closed_form=_ex3_form, family={"alpha": 1.0, "beta": 1.0},
            expected_directions=ALL_DIRECTIONS_DEGENERATE,
            expected_verdicts={0.0: "DegenerateLocus"},
            expected_oscillation="not_excluded", expected_locus="degenerate",
            negative_branch=True,
        ),
        _ex4_entry("ex4", 1.0),
        _ex4_entry("ex4_sqrt2", SQRT2),
        _ex4_entry("ex4_neg_sqrt2", -SQRT2),
        CorpusEntry(
            id="ex5", title="x p' = 2p + x^2",
            ode=ex5_ode(2.0, {2: 1.0}), parameters={"alpha": 2.0, "f": {2: 1.0}},
            closed_form=lambda x, **kw: _ex5_form(x, alpha=2.0, f={2: 1.0}, **kw),
            family={"c": 0.0},
            expected_directions=[(0.0, 1), (math.inf, 2)],
            expected_verdicts={0.0: "NodePositiveResonant", math.inf: "MultipleRoot"},
        ),
    ]
    metric = Metric(Poly2.const(1.0), Poly2(), Poly2.y())
    geo = geodesic_from_metric(metric)
    entries.append(CorpusEntry(
        id="geodesic_cy", title="geodesics of dx^2 + y dy^2",
        ode=SingularOde(geo.delta, geo.m, name="geodesic_cy"), parameters={"a": 1, "b": 0, "c": "y"},
        closed_form=_geodesic_cy_form, family={"k": 1.0}, metric=metric,
        expected_directions=[(0.0, 2), (math.inf, 1)],
        expected_verdicts={0.0: "MultipleRoot", math.inf: "NodePositiveResonant"},
    ))
    return entries


def residual_check(entry: CorpusEntry, xs, **family) -> float:
    """Max of ``|delta * p' - M(x, y, p)|`` along the closed form."""
    xs = np.asarray(xs, dtype=float)
    y, p, dp = entry.solution(xs, **family)
    worst = 0.0
    for xi, yi, pi, dpi in zip(xs, np.atleast_1d(y), np.atleast_1d(p), np.atleast_1d(dp)):
        r = poly_eval(entry.ode.delta, (xi, yi)) * dpi - entry.ode.M(xi, yi, pi)
        worst = max(worst, abs(r))
    return worst


def _validate(entry: CorpusEntry) -> None:
    lo, hi = entry.domain
    xs = np.geomspace(lo, hi, 41)
    r = residual_check(entry, xs)
    if not r < RESIDUAL_TOL:
        raise RuntimeError(f"corpus entry {entry.id}: closed form residual {r!r} exceeds {RESIDUAL_TOL}")


_REGISTRY: Optional[list[CorpusEntry]] = None


def corpus_list() -> list[CorpusEntry]:
    global _REGISTRY
    if _REGISTRY is None:
        entries = _build()
        for e in entries:
            _validate(e)
        _REGISTRY = entries
    return list(_REGISTRY)


def corpus_get(eid: str) -> CorpusEntry:
    for e in corpus_list():
        if e.id == eid:
            return e
    raise KeyError(f"unknown corpus entry {eid!r}; known: {[e.id for e in corpus_list()]}")


# -- checks run by `verify` ---------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    entry: str
    check: str
    measured: object
    threshold: object
    passed: bool

    def line(self) -> str:
        def fmt(v):
            return f"{v:.6e}" if isinstance(v, float) else str(v)
        status = "PASS" if self.passed else "FAIL"
        return f"{self.entry:<14} {self.check:<28} measured={fmt(self.measured):<40} threshold={fmt(self.threshold):<16} {status}"

    def as_dict(self) -> dict:
        m = self.measured
        if isinstance(m, float) and not math.isfinite(m):
            m = str(m)
        return {"entry": self.entry, "check": self.check, "measured": m,
                "threshold": self.threshold, "passed": bool(self.passed)}


def _dirs_repr(dirs) -> str:
    if dirs is ALL_DIRECTIONS_DEGENERATE:
        return "AllDirectionsDegenerate"
    return "[" + ", ".join(f"{'inf' if math.isinf(s) else f'{s:g}'}:{m}" for s, m in dirs) + "]"


EXPONENT_OFFSETS = (-2.0, -1.0, -0.5, 0.25, 0.4)


def trace_vs_closed_form_error(ode: SingularOde, cs, window=(1e-2, 1.0)) -> float:
    """Worst relative gap between traced ``p`` and ``1/sqrt(1 + c x^2)`` at the traced samples.

    Node offsets are family parameters of ``p - 1 ~ offset * x^2``, so
    ``offset = -c/2`` selects the member with constant ``c``.
    """
    worst = 0.0
    topts = TraceOptions(box_halfwidth=1.25 * window[1])
    for c in cs:
        tr = trace_from_singular(ode, (0.0, 0.0), Direction.from_slope(1.0), "plus", [-c / 2], topts)[0]
        m = (tr.x >= window[0]) & (tr.x <= window[1])
        p_ref = 1.0 / np.sqrt(1.0 + c * tr.x[m] ** 2)
        worst = max(worst, float(np.max(np.abs(tr.p[m] / p_ref - 1.0))))
    return worst


def _numeric_checks(e: CorpusEntry) -> list[CheckResult]:
    out = []
    q0 = e.point
    if e.id == "ex4":
        worst = trace_vs_closed_form_error(e.ode, (0.5, 1.0, 5.0))
        out.append(CheckResult(e.id, "trace_vs_closed_form_rel", worst, 1e-4, worst < 1e-4))
        trs = trace_from_singular(e.ode, q0, Direction.from_slope(1.0), "plus", [-0.5, 0.5, 1.0])
        eps = detect_log_term(trs, q0, Direction.from_slope(1.0), 2).log_coefficient_hat
        out.append(CheckResult(e.id, "log_coefficient_abs", abs(eps), 0.02, abs(eps) < 0.02))
    elif e.id == "ex4_sqrt2":
        trs = trace_from_singular(e.ode, q0, Direction.from_slope(1.0), "plus", EXPONENT_OFFSETS)
        lam = 2 * SQRT2
        est = estimate_exponent(trs, q0, Direction.from_slope(1.0)).exponent_hat
        rel = abs(est / lam - 1.0)
        out.append(CheckResult(e.id, "exponent_rel_error", rel, 0.01, rel < 0.01))
        sup = 0.0
        for side in ("plus", "minus"):
            for tr in trace_from_singular(e.ode, q0, Direction.from_slope(0.0), side, [0.0]):
                m = np.abs(tr.x) <= 0.5
                sup = max(sup, float(np.max(np.abs(tr.y[m]))))
        out.append(CheckResult(e.id, "saddle_unique_sup_y", sup, 1e-8, sup < 1e-8))
    elif e.id == "ex5":
        trs = trace_from_singular(e.ode, q0, Direction.from_slope(0.0), "plus", [-1.0, 0.0, 1.0])
        eps = detect_log_term(trs, q0, Direction.from_slope(0.0), 2).log_coefficient_hat
        err = abs(eps - 1.0)
        out.append(CheckResult(e.id, "log_coefficient_rel_error", err, 0.02, err < 0.02))
    return out


def run_checks(e: CorpusEntry, numeric: bool = True) -> list[CheckResult]:
    """Golden checks for one entry: residual, directions, verdicts, oscillation, locus."""
    out = []
    lo, hi = e.domain
    r = residual_check(e, np.geomspace(lo, hi, 200))
    out.append(CheckResult(e.id, "closed_form_residual", r, RESIDUAL_TOL, r < RESIDUAL_TOL))
    if e.negative_branch:
        r = residual_check(e, -np.geomspace(lo, hi, 200))
        out.append(CheckResult(e.id, "closed_form_residual_neg", r, RESIDUAL_TOL, r < RESIDUAL_TOL))

    dirs = admissible_directions(e.ode, e.point, DEFAULTS.tol_locus, DEFAULTS.tol_root)
    got = dirs if dirs is ALL_DIRECTIONS_DEGENERATE else [(d.slope, d.multiplicity) for d in dirs]
    ok = (got is e.expected_directions) if dirs is ALL_DIRECTIONS_DEGENERATE else (
        e.expected_directions is not ALL_DIRECTIONS_DEGENERATE
        and len(got) == len(e.expected_directions)
        and all((math.isinf(a) and math.isinf(b) or abs(a - b) < 1e-9) and m == n
                for (a, m), (b, n) in zip(got, e.expected_directions)))
    out.append(CheckResult(e.id, "admissible_directions", _dirs_repr(got), _dirs_repr(e.expected_directions), ok))

    for slope, want in sorted(e.expected_verdicts.items()):
        v = classify(e.ode, e.point, Direction.from_slope(slope)).verdict.value
        name = f"verdict[p={'inf' if math.isinf(slope) else f'{slope:g}'}]"
        out.append(CheckResult(e.id, name, v, want, v == want))

    osc = oscillation_excluded(e.ode, e.point)
    out.append(CheckResult(e.id, "oscillation", osc, e.expected_oscillation, osc == e.expected_oscillation))
    loc = locus_regularity(e.ode, e.point)
    out.append(CheckResult(e.id, "locus", loc, e.expected_locus, loc == e.expected_locus))
    if numeric:
        out.extend(_numeric_checks(e))
    return out
