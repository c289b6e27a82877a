"""Pointwise analysis of singular points.

Locates admissible directions at a point of the singular locus, computes the
two nonzero eigenvalues of the lifted field there, detects resonances and
turns all of it into a per-direction verdict. Genericity failures come back
as verdicts rather than exceptions so a whole grid can be reported.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import DegenerateEigen, NonTransversal, NotOnLocus
from .poly import (
    Direction,
    Metric,
    PlanePoint,
    SingularOde,
    geodesic_from_metric,
    poly_diff,
    poly_eval,
    swap_axes,
)
from .roots import effective_degree, real_roots

__all__ = [
    "AnalysisOptions",
    "AdmissibleDirection",
    "ALL_DIRECTIONS_DEGENERATE",
    "Rationality",
    "EigenData",
    "Verdict",
    "FamilyForm",
    "Classification",
    "on_singular_locus",
    "locus_regularity",
    "admissible_directions",
    "eigen_data",
    "resonance_find",
    "samovol_order",
    "classify",
    "oscillation_excluded",
    "geodesic_oscillation_necessary",
    "finite_frame",
    "delta_gradient",
    "analyze_point",
]


@dataclass(frozen=True)
class AnalysisOptions:
    tol_locus: float = 1e-10
    tol_eigen: float = 1e-9
    tol_root: float = 1e-7
    tol_rational: float = 1e-9
    qmax: int = 64

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULTS = AnalysisOptions()


@dataclass(frozen=True)
class AdmissibleDirection:
    dir: Direction
    multiplicity: int

    @property
    def slope(self) -> float:
        return self.dir.slope


class _AllDegenerate:
    """Marker returned when every coefficient of ``M(q, .)`` vanishes."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "AllDirectionsDegenerate"


ALL_DIRECTIONS_DEGENERATE = _AllDegenerate()


def delta_gradient(ode: SingularOde, q) -> tuple[float, float]:
    return poly_eval(poly_diff(ode.delta, "x"), q), poly_eval(poly_diff(ode.delta, "y"), q)


def on_singular_locus(ode: SingularOde, q, tol: float = DEFAULTS.tol_locus) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return abs(poly_eval(ode.delta, q)) <= tol


def locus_regularity(ode: SingularOde, q, tol: float = DEFAULTS.tol_locus) -> str:
    """``"regular"`` if the gradient of delta is nonzero at ``q``, else ``"degenerate"``."""
    if not on_singular_locus(ode, q, tol):
        raise NotOnLocus(q, poly_eval(ode.delta, q))
    return "regular" if math.hypot(*delta_gradient(ode, q)) > tol else "degenerate"


def admissible_directions(ode: SingularOde, q, tol: float = DEFAULTS.tol_locus,
                          tol_root: float = DEFAULTS.tol_root):
    """Real roots of ``M(q, .)`` including ``p = inf``, or ``ALL_DIRECTIONS_DEGENERATE``.

    The multiplicity of ``inf`` is that of ``0`` as a root of the reciprocal
    polynomial, i.e. the number of vanishing leading coefficients.
    """
    coeffs = ode.m.coefficients_at(q)
    deg = effective_degree(coeffs, tol)
    if deg < 0:
        return ALL_DIRECTIONS_DEGENERATE
    out = [AdmissibleDirection(Direction.from_slope(r), k)
           for r, k in real_roots(coeffs[: deg + 1], tol_root)]
    if deg < 3:
        out.append(AdmissibleDirection(Direction(0.0, 1.0), 3 - deg))
    return out


# -- eigenvalues and resonances ---------------------------------------------

@dataclass(frozen=True)
class Rationality:
    """Numeric proxy for the arithmetic nature of ``lambda``.

    ``kind`` is one of ``integer``, ``reciprocal_integer``, ``rational`` or
    ``irrational`` (meaning: no fraction with denominator <= qmax within the
    relative tolerance).
    """

    kind: str
    numerator: Optional[int] = None
    denominator: Optional[int] = None

    def as_dict(self) -> dict:
        return {"kind": self.kind, "numerator": self.numerator, "denominator": self.denominator}


def rationality_of(value: float, tol_rational: float, qmax: int) -> Rationality:
    if not math.isfinite(value):
        return Rationality("irrational")
    frac = Fraction(value).limit_denominator(qmax)
    if frac == 0 or abs(value - float(frac)) > tol_rational * abs(value):
        return Rationality("irrational")
    n, d = frac.numerator, frac.denominator
    if d == 1:
        kind = "integer"
    elif abs(n) == 1:
        kind = "reciprocal_integer"
    else:
        kind = "rational"
    return Rationality(kind, n, d)


@dataclass(frozen=True)
class Resonance:
    p: int
    q: int

    @property
    def order(self) -> int:
        return self.p + self.q

    def as_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "order": self.order}


@dataclass(frozen=True)
class EigenData:
    lambda1: float
    lambda2: float
    lam: float
    rationality: Rationality
    resonance: Optional[Resonance] = None


def resonance_find(lambda1: float, lambda2: float, max_order: int,
                   tol: float = 1e-9) -> Optional[tuple[int, int, int]]:
    """Lowest-order ``(p, q, p + q)`` with ``p*lambda1 + q*lambda2 ~ 0``, p, q >= 1."""
    if lambda1 == 0 or lambda2 == 0:
        raise ValueError("eigenvalues must be nonzero")
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    if (lambda1 > 0) == (lambda2 > 0):
        return None
    for order in range(2, max_order + 1):
        for p in range(1, order):
            q = order - p
            if abs(p * lambda1 + q * lambda2) <= tol * (p * abs(lambda1) + q * abs(lambda2)):
                return p, q, order
    return None


def samovol_order(k: int, lambda1: float, lambda2: float) -> int:
    """Resonance-free order sufficient for a C^k normalization."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if lambda1 == 0 or lambda2 == 0:
        raise ValueError("eigenvalues must be nonzero")
    m1 = max(abs(lambda1), abs(lambda2))
    m2 = min(abs(lambda1), abs(lambda2))
    ratio = (2 * k + 1) * m1 / m2
    # keep exact integer ratios from dropping a unit through rounding
    return 2 * math.floor(ratio * (1.0 + 4.0 * 2.0**-52)) + 2


def eigen_data(ode: SingularOde, q, dir: Direction, tol_rational: float = DEFAULTS.tol_rational,
               qmax: int = DEFAULTS.qmax, tol: float = DEFAULTS.tol_eigen) -> EigenData:
    """Eigenvalues ``lambda1 = dx(delta) + p dy(delta)``, ``lambda2 = M_p`` at a finite direction."""
    if dir.is_infinite:
        raise ValueError("eigen_data needs a finite direction; use finite_frame() first")
    p = dir.slope
    dx, dy = delta_gradient(ode, q)
    lambda1 = dx + p * dy
    lambda2 = ode.m.d_dp(q, p)
    if abs(lambda1) <= tol:
        raise NonTransversal(lambda1)
    if abs(lambda2) <= tol:
        raise DegenerateEigen(lambda2)
    lam = lambda2 / lambda1
    rat = rationality_of(lam, tol_rational, qmax)
    res = None
    if lam < 0 and rat.kind != "irrational":
        # lam = -n/d  =>  d*lambda2 = -n*lambda1  =>  (p, q) = (|n|, d)
        res = Resonance(abs(rat.numerator), rat.denominator)
    return EigenData(lambda1, lambda2, lam, rat, res)


def finite_frame(ode: SingularOde, q, dir: Direction) -> tuple[SingularOde, PlanePoint, Direction, bool]:
    """Swap axes when ``dir`` is vertical so every direction becomes finite."""
    if dir.is_infinite:
        return swap_axes(ode), PlanePoint(float(q[1]), float(q[0])), Direction(1.0, 0.0), True
    return ode, PlanePoint(float(q[0]), float(q[1])), dir, False


# -- classification ---------------------------------------------------------

class Verdict(str, enum.Enum):
    NOT_SINGULAR = "NotSingular"
    DEGENERATE_LOCUS = "DegenerateLocus"
    ALL_DIRECTIONS_DEGENERATE = "AllDirectionsDegenerate"
    NOT_ADMISSIBLE = "NotAdmissible"
    MULTIPLE_ROOT = "MultipleRoot"
    NON_TRANSVERSAL = "NonTransversal"
    SADDLE = "Saddle"
    NODE_NON_RESONANT = "NodeNonResonant"
    NODE_POSITIVE_RESONANT = "NodePositiveResonant"
    NODE_RECIPROCAL_RESONANT = "NodeReciprocalResonant"
    NEGATIVE_RATIONAL_RESONANT = "NegativeRationalResonant"

    def __str__(self) -> str:
        return self.value

    @property
    def is_node(self) -> bool:
        return self in (Verdict.NODE_NON_RESONANT, Verdict.NODE_POSITIVE_RESONANT,
                        Verdict.NODE_RECIPROCAL_RESONANT)


@dataclass(frozen=True)
class FamilyForm:
    """Predicted shape of the solutions issuing in one direction.

    ``kind`` is ``unique`` (one smooth solution), ``power`` (``c|x|^lam``
    family) or ``power_log`` (``x^n (c + eps ln|x|)`` family).
    """

    kind: str
    exponent: Optional[float] = None
    log_possible: bool = False

    def as_dict(self) -> dict:
        return {"kind": self.kind, "exponent": self.exponent, "log_possible": self.log_possible}


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    direction: Optional[Direction] = None
    multiplicity: Optional[int] = None
    eigen: Optional[EigenData] = None
    family_form: Optional[FamilyForm] = None
    smoothness_note: Optional[str] = None
    swapped: bool = False
    detail: dict = field(default_factory=dict, compare=False)


def _match_direction(dirs, dir: Direction, tol_root: float):
    p = dir.slope
    for ad in dirs:
        r = ad.slope
        if math.isinf(p) or math.isinf(r):
            if math.isinf(p) and math.isinf(r):
                return ad
            continue
        if abs(p - r) <= max(tol_root, 1e-9) * (1.0 + abs(r)) * 10:
            return ad
    return None


def classify(ode: SingularOde, q, dir: Direction, opts: AnalysisOptions = DEFAULTS) -> Classification:
    """Verdict for solutions issuing from ``q`` with tangent ``dir``."""
    q = PlanePoint(float(q[0]), float(q[1]))
    if not on_singular_locus(ode, q, opts.tol_locus):
        return Classification(Verdict.NOT_SINGULAR, dir)
    if locus_regularity(ode, q, opts.tol_locus) == "degenerate":
        return Classification(Verdict.DEGENERATE_LOCUS, dir)
    dirs = admissible_directions(ode, q, opts.tol_locus, opts.tol_root)
    if dirs is ALL_DIRECTIONS_DEGENERATE:
        return Classification(Verdict.ALL_DIRECTIONS_DEGENERATE, dir)
    ad = _match_direction(dirs, dir, opts.tol_root)
    if ad is None:
        return Classification(Verdict.NOT_ADMISSIBLE, dir)
    dir = ad.dir
    if ad.multiplicity > 1:
        return Classification(Verdict.MULTIPLE_ROOT, dir, ad.multiplicity)

    f_ode, f_q, f_dir, swapped = finite_frame(ode, q, dir)
    base = dict(direction=dir, multiplicity=1, swapped=swapped)
    try:
        ed = eigen_data(f_ode, f_q, f_dir, opts.tol_rational, opts.qmax, opts.tol_eigen)
    except NonTransversal:
        return Classification(Verdict.NON_TRANSVERSAL, **base)
    except DegenerateEigen:
        return Classification(Verdict.MULTIPLE_ROOT, **base)

    lam, rat = ed.lam, ed.rationality
    if lam < 0:
        if ed.resonance is None:
            n1 = samovol_order(1, ed.lambda1, ed.lambda2)
            note = f"no resonance up to order N(1)={n1} within tolerance; C^k normal form for every finite k"
            return Classification(Verdict.SADDLE, eigen=ed, family_form=FamilyForm("unique", lam, False),
                                  smoothness_note=note, **base)
        r = ed.resonance
        note = (f"resonance {r.p}*lambda1 + {r.q}*lambda2 = 0 of order {r.order}; "
                f"normalization limited to C^{max(r.p, r.q) - 1}")
        return Classification(Verdict.NEGATIVE_RATIONAL_RESONANT, eigen=ed, smoothness_note=note, **base)

    if rat.kind == "integer":
        return Classification(Verdict.NODE_POSITIVE_RESONANT, eigen=ed,
                              family_form=FamilyForm("power_log", float(rat.numerator), True),
                              smoothness_note=f"lambda = {rat.numerator}: logarithmic term x^n ln|x| possible",
                              **base)
    if rat.kind == "reciprocal_integer":
        return Classification(Verdict.NODE_RECIPROCAL_RESONANT, eigen=ed,
                              family_form=FamilyForm("power", lam, False),
                              smoothness_note=f"lambda = 1/{rat.denominator}: resonant monomial coefficient vanishes, no logarithm",
                              **base)
    return Classification(Verdict.NODE_NON_RESONANT, eigen=ed, family_form=FamilyForm("power", lam, False), **base)


def oscillation_excluded(ode: SingularOde, q, tol: float = DEFAULTS.tol_locus) -> str:
    """``excluded`` when some coefficient of ``M(q, .)`` is nonzero."""
    if not on_singular_locus(ode, q, tol):
        raise NotOnLocus(q, poly_eval(ode.delta, q))
    return "excluded" if max(abs(c) for c in ode.m.coefficients_at(q)) > tol else "not_excluded"


def geodesic_oscillation_necessary(g: Metric, q, tol: float = DEFAULTS.tol_locus) -> str:
    """For geodesics a vanishing gradient of delta is necessary for oscillation."""
    ode = geodesic_from_metric(g)
    if not on_singular_locus(ode, q, tol):
        raise NotOnLocus(q, poly_eval(ode.delta, q))
    return "condition_holds" if math.hypot(*delta_gradient(ode, q)) <= tol else "condition_fails"


# -- report -------------------------------------------------------------------

def _num(v):
    if v is None:
        return None
    v = float(v)
    if math.isnan(v):
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def direction_record(c: Classification, mult: int) -> dict:
    ed = c.eigen
    return {
        "p": _num(c.direction.slope),
        "multiplicity": mult,
        "lambda1": _num(ed.lambda1) if ed else None,
        "lambda2": _num(ed.lambda2) if ed else None,
        "lambda": _num(ed.lam) if ed else None,
        "rationality": ed.rationality.as_dict() if ed else None,
        "resonance": ed.resonance.as_dict() if ed and ed.resonance else None,
        "verdict": c.verdict.value,
        "family_form": c.family_form.as_dict() if c.family_form else None,
        "smoothness_note": c.smoothness_note,
        "swapped_axes": c.swapped,
    }


def analyze_point(ode: SingularOde, q, opts: AnalysisOptions = DEFAULTS) -> dict:
    """Full report for one point, with stable field names."""
    q = PlanePoint(float(q[0]), float(q[1]))
    gx, gy = delta_gradient(ode, q)
    report = {
        "point": [q.x, q.y],
        "delta": poly_eval(ode.delta, q),
        "delta_gradient": [gx, gy],
        "mu": list(ode.m.coefficients_at(q)),
        "verdict": None,
        "locus": None,
        "directions": [],
        "oscillation": None,
    }
    if not on_singular_locus(ode, q, opts.tol_locus):
        report["verdict"] = Verdict.NOT_SINGULAR.value
        return report
    report["locus"] = locus_regularity(ode, q, opts.tol_locus)
    report["oscillation"] = oscillation_excluded(ode, q, opts.tol_locus)
    dirs = admissible_directions(ode, q, opts.tol_locus, opts.tol_root)
    if dirs is ALL_DIRECTIONS_DEGENERATE:
        report["verdict"] = Verdict.ALL_DIRECTIONS_DEGENERATE.value
        return report
    report["verdict"] = "Singular" if report["locus"] == "regular" else Verdict.DEGENERATE_LOCUS.value
    for ad in dirs:
        c = classify(ode, q, ad.dir, opts)
        report["directions"].append(direction_record(c, ad.multiplicity))
    return report
