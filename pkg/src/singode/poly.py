"""Equation model: sparse bivariate polynomials, cubic right-hand sides,
metrics, points and (homogeneous) directions.

An equation is ``delta(x, y) * dp/dx = M(x, y, p)`` with ``p = dy/dx`` and
``M = mu0 + mu1*p + mu2*p**2 + mu3*p**3``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Union

import numpy as np

__all__ = [
    "Poly2",
    "CubicField",
    "SingularOde",
    "Metric",
    "PlanePoint",
    "Direction",
    "poly_eval",
    "poly_diff",
    "cubic_eval",
    "geodesic_from_metric",
    "reciprocal_cubic",
    "swap_axes",
    "load_equation",
    "equation_to_json",
]

Number = Union[float, int]


def _grlex(key: tuple[int, int]) -> tuple[int, int, int]:
    i, j = key
    return (i + j, -i, -j)


@dataclass(frozen=True)
class Poly2:
    """Sparse real polynomial in ``(x, y)``.

    ``terms`` holds ``((i, j), coef)`` pairs for ``coef * x**i * y**j``, sorted
    graded-lexicographically with no zero coefficients. Build instances with
    :meth:`from_terms` rather than the raw constructor.
    """

    terms: tuple[tuple[tuple[int, int], float], ...] = ()

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int], Number] | Iterable) -> "Poly2":
        acc: dict[tuple[int, int], float] = {}
        items = terms.items() if isinstance(terms, Mapping) else (
            ((t[0], t[1]), t[2]) for t in terms
        )
        for (i, j), c in items:
            i, j = int(i), int(j)
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent ({i}, {j})")
            c = float(c)
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient {c!r}")
            acc[(i, j)] = acc.get((i, j), 0.0) + c
        kept = tuple(sorted(((k, v) for k, v in acc.items() if v != 0.0), key=lambda kv: _grlex(kv[0])))
        return cls(kept)

    @classmethod
    def const(cls, c: Number) -> "Poly2":
        return cls.from_terms({(0, 0): c})

    @classmethod
    def x(cls) -> "Poly2":
        return cls.from_terms({(1, 0): 1.0})

    @classmethod
    def y(cls) -> "Poly2":
        return cls.from_terms({(0, 1): 1.0})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((i + j for (i, j), _ in self.terms), default=-1)

    def as_dict(self) -> dict[tuple[int, int], float]:
        return dict(self.terms)

    def __call__(self, x, y):
        return poly_eval(self, PlanePoint(x, y)) if np.ndim(x) == 0 and np.ndim(y) == 0 else _eval_array(self, x, y)

    def _coerce(self, other) -> "Poly2":
        if isinstance(other, Poly2):
            return other
        if isinstance(other, (int, float)):
            return Poly2.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = self.as_dict()
        for k, v in other.terms:
            acc[k] = acc.get(k, 0.0) + v
        return Poly2.from_terms(acc)

    __radd__ = __add__

    def __neg__(self) -> "Poly2":
        return Poly2(tuple((k, -v) for k, v in self.terms))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[tuple[int, int], float] = {}
        for (i1, j1), a in self.terms:
            for (i2, j2), b in other.terms:
                key = (i1 + i2, j1 + j2)
                acc[key] = acc.get(key, 0.0) + a * b
        return Poly2.from_terms(acc)

    __rmul__ = __mul__

    def diff(self, var: str) -> "Poly2":
        return poly_diff(self, var)

    def swapped(self) -> "Poly2":
        """The polynomial with ``x`` and ``y`` interchanged."""
        return Poly2.from_terms({(j, i): c for (i, j), c in self.terms})

    def to_list(self) -> list[list]:
        return [[i, j, c] for (i, j), c in self.terms]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (i, j), c in self.terms:
            mono = "*".join(s for s in (
                "x" if i == 1 else f"x^{i}" if i else "",
                "y" if j == 1 else f"y^{j}" if j else "",
            ) if s)
            parts.append(f"{c!r}*{mono}" if mono else repr(c))
        return " + ".join(parts)


def _eval_array(f: Poly2, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape)
    for (i, j), c in f.terms:
        out = out + c * x**i * y**j
    return out


class PlanePoint(NamedTuple):
    x: float
    y: float


def poly_eval(f: Poly2, q: PlanePoint | tuple[float, float]) -> float:
    """Evaluate ``f`` at ``q`` summing terms in canonical order."""
    x, y = float(q[0]), float(q[1])
    total = 0.0
    for (i, j), c in f.terms:
        total += c * x**i * y**j
    return total


def poly_diff(f: Poly2, var: str) -> Poly2:
    """Formal partial derivative with respect to ``"x"`` or ``"y"``."""
    if var == "x":
        return Poly2.from_terms({(i - 1, j): c * i for (i, j), c in f.terms if i > 0})
    if var == "y":
        return Poly2.from_terms({(i, j - 1): c * j for (i, j), c in f.terms if j > 0})
    raise ValueError(f"unknown variable {var!r}; expected 'x' or 'y'")


@dataclass(frozen=True)
class CubicField:
    """Coefficients ``(mu0, mu1, mu2, mu3)`` of ``M(x, y, p)``."""

    mu: tuple[Poly2, Poly2, Poly2, Poly2]

    def __post_init__(self):
        if len(self.mu) != 4:
            raise ValueError("CubicField needs exactly four coefficients")
        object.__setattr__(self, "mu", tuple(self.mu))

    @classmethod
    def zero(cls) -> "CubicField":
        return cls((Poly2(),) * 4)

    def coefficients_at(self, q) -> tuple[float, float, float, float]:
        return tuple(poly_eval(m, q) for m in self.mu)

    def d_dp(self, q, p: float) -> float:
        """``M_p`` at ``(q, p)``."""
        m0, m1, m2, m3 = self.coefficients_at(q)
        return m1 + p * (2.0 * m2 + p * 3.0 * m3)


def cubic_eval(m: CubicField, q, p: float) -> float:
    """``M(q, p)`` by Horner's scheme in ``p``."""
    if not math.isfinite(p):
        raise ValueError("cubic_eval needs a finite slope")
    c = m.coefficients_at(q)
    return ((c[3] * p + c[2]) * p + c[1]) * p + c[0]


def reciprocal_cubic(m: CubicField) -> CubicField:
    """Reverse the coefficient order, ``M*(p) = p**3 M(1/p)``."""
    return CubicField(tuple(reversed(m.mu)))


@dataclass(frozen=True)
class SingularOde:
    delta: Poly2
    m: CubicField
    name: str = field(default="", compare=False)

    def M(self, x: float, y: float, p: float) -> float:
        return cubic_eval(self.m, (x, y), p)


def swap_axes(ode: SingularOde) -> SingularOde:
    """Rewrite the equation for ``x`` as a function of ``y``.

    With ``X = y``, ``Y = x`` and ``P = dY/dX = 1/p`` the equation becomes
    ``delta(Y, X) dP/dX = -M*(Y, X, P)``, so the slope ``p = inf`` maps to
    ``P = 0``. Applying it twice returns the original equation.
    """
    mu = tuple(-c.swapped() for c in reversed(ode.m.mu))
    return SingularOde(ode.delta.swapped(), CubicField(mu), name=ode.name)


@dataclass(frozen=True)
class Metric:
    """``ds^2 = a dx^2 + 2 b dx dy + c dy^2`` with polynomial coefficients."""

    a: Poly2
    b: Poly2
    c: Poly2


def geodesic_from_metric(g: Metric) -> SingularOde:
    """Geodesic equation of ``g`` in the form ``delta * p' = M``."""
    a, b, c = g.a, g.b, g.c
    ax, ay = a.diff("x"), a.diff("y")
    bx, by = b.diff("x"), b.diff("y")
    cx, cy = c.diff("x"), c.diff("y")
    delta = a * c - b * b
    mu0 = a * (ay - 2.0 * bx) + ax * b
    mu1 = b * (3.0 * ay - 2.0 * bx) + ax * c - 2.0 * a * cx
    mu2 = b * (2.0 * by - 3.0 * cx) + 2.0 * ay * c - a * cy
    mu3 = c * (2.0 * by - cx) - b * cy
    return SingularOde(delta, CubicField((mu0, mu1, mu2, mu3)), name="geodesic")


@dataclass(frozen=True)
class Direction:
    """Homogeneous slope ``(u, v)`` meaning ``p = v/u``; ``u == 0`` is ``p = inf``.

    Normalized to unit length with the first nonzero component positive.
    """

    u: float
    v: float

    def __post_init__(self):
        u, v = float(self.u), float(self.v)
        n = math.hypot(u, v)
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("direction must be a finite nonzero pair")
        u, v = u / n, v / n
        if u < 0.0 or (u == 0.0 and v < 0.0):
            u, v = -u, -v
        object.__setattr__(self, "u", u + 0.0)
        object.__setattr__(self, "v", v + 0.0)

    @classmethod
    def from_slope(cls, p: float) -> "Direction":
        if math.isinf(p):
            return cls(0.0, 1.0)
        return cls(1.0, p)

    @property
    def is_infinite(self) -> bool:
        return self.u == 0.0

    @property
    def slope(self) -> float:
        return math.inf if self.u == 0.0 else self.v / self.u

    def __str__(self) -> str:
        return "inf" if self.is_infinite else repr(self.slope)


# -- file format -----------------------------------------------------------

def _poly_from_json(rows) -> Poly2:
    out = []
    for row in rows:
        if len(row) != 3:
            raise ValueError(f"monomial entry must be [i, j, coef], got {row!r}")
        i, j, c = row
        if not (isinstance(i, int) and isinstance(j, int)) or isinstance(i, bool) or isinstance(j, bool):
            raise ValueError(f"exponents must be integers, got {row!r}")
        if not isinstance(c, (int, float)) or isinstance(c, bool):
            raise ValueError(f"coefficient must be a number, got {row!r}")
        out.append((i, j, c))
    return Poly2.from_terms(out)


def equation_from_dict(data: Mapping) -> SingularOde:
    if "metric" in data:
        g = data["metric"]
        metric = Metric(*(_poly_from_json(g[k]) for k in ("a", "b", "c")))
        return geodesic_from_metric(metric)
    if "delta" not in data or "mu" not in data:
        raise ValueError("equation needs either 'metric' or both 'delta' and 'mu'")
    mu = data["mu"]
    if len(mu) != 4:
        raise ValueError("'mu' must list exactly four polynomials")
    return SingularOde(_poly_from_json(data["delta"]), CubicField(tuple(_poly_from_json(m) for m in mu)),
                       name=str(data.get("name", "")))


def load_equation(path: str | Path) -> SingularOde:
    """Read an equation file (``delta``/``mu`` form or ``metric`` form)."""
    text = Path(path).read_text(encoding="utf-8")
    ode = equation_from_dict(json.loads(text))
    if not ode.name:
        ode = SingularOde(ode.delta, ode.m, name=Path(path).stem)
    return ode


def equation_to_json(ode: SingularOde) -> dict:
    out = {"delta": ode.delta.to_list(), "mu": [m.to_list() for m in ode.m.mu]}
    if ode.name:
        out["name"] = ode.name
    return out
