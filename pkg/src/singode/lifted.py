"""The lifted vector field on jet space ``(x, y, p)``.

    x' = delta(x, y),   y' = p delta(x, y),   p' = M(x, y, p)

Its non-vertical integral curves project onto solutions of the equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NotSingularPoint
from .poly import SingularOde, poly_diff, poly_eval

__all__ = [
    "JetPoint",
    "FieldValue",
    "field_eval",
    "field_array",
    "jacobian",
    "Spectrum",
    "spectrum_at_singular",
]


class JetPoint(NamedTuple):
    x: float
    y: float
    p: float


class FieldValue(NamedTuple):
    dx: float
    dy: float
    dp: float


def field_eval(ode: SingularOde, T) -> FieldValue:
    x, y, p = T
    d = poly_eval(ode.delta, (x, y))
    return FieldValue(d, p * d, ode.M(x, y, p))


class _Partials:
    """Cached first partials of delta and the mu_i."""

    def __init__(self, ode: SingularOde):
        self.dx = poly_diff(ode.delta, "x")
        self.dy = poly_diff(ode.delta, "y")
        self.mux = tuple(poly_diff(m, "x") for m in ode.m.mu)
        self.muy = tuple(poly_diff(m, "y") for m in ode.m.mu)


def field_array(ode: SingularOde):
    """Return ``f(state) -> ndarray`` for use in integrators."""
    delta = ode.delta
    mu = ode.m.mu

    def f(s):
        x, y, p = s
        d = poly_eval(delta, (x, y))
        c0, c1, c2, c3 = (poly_eval(m, (x, y)) for m in mu)
        return np.array([d, p * d, ((c3 * p + c2) * p + c1) * p + c0])

    return f


def jacobian(ode: SingularOde, T) -> np.ndarray:
    """Analytic 3x3 Jacobian of the lifted field at ``T``."""
    x, y, p = T
    q = (x, y)
    d = _Partials(ode)
    dx, dy = poly_eval(d.dx, q), poly_eval(d.dy, q)
    mx = sum(poly_eval(m, q) * p**i for i, m in enumerate(d.mux))
    my = sum(poly_eval(m, q) * p**i for i, m in enumerate(d.muy))
    mp = ode.m.d_dp(q, p)
    delta = poly_eval(ode.delta, q)
    return np.array([
        [dx, dy, 0.0],
        [p * dx, p * dy, delta],
        [mx, my, mp],
    ])


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues ordered to match the analytic triple ``(0, lambda1, lambda2)``."""

    eigenvalues: tuple[float, float, float]
    analytic: tuple[float, float, float]
    residuals: tuple[float, float, float]


def _char_poly(J: np.ndarray) -> tuple[float, float, float]:
    tr = J[0, 0] + J[1, 1] + J[2, 2]
    c2 = (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
          + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
          + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
    det = (J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
           - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
           + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0]))
    return float(tr), float(c2), float(det)


def _quad_roots(b: float, c: float) -> tuple[complex, complex]:
    """Roots of ``t^2 + b t + c``."""
    disc = b * b - 4.0 * c
    if disc >= 0:
        s = math.sqrt(disc)
        qq = -0.5 * (b + math.copysign(s, b))
        if qq == 0.0:
            return 0j, 0j
        return complex(qq), complex(c / qq)
    s = math.sqrt(-disc)
    return complex(-b / 2, s / 2), complex(-b / 2, -s / 2)


def spectrum_at_singular(ode: SingularOde, T, tol: float = 1e-10) -> Spectrum:
    """Spectrum of the linear part at a singular point of the lifted field.

    Uses the characteristic cubic ``t^3 - tr t^2 + c2 t - det``; at a singular
    point ``det = 0`` and the structural factor ``t`` is divided out, leaving a
    quadratic. Residuals are smallest singular values of ``J - t I``.
    """
    x, y, p = T
    coeffs = ode.m.coefficients_at((x, y))
    scale = 1.0 + sum(abs(c) * abs(p) ** i for i, c in enumerate(coeffs))
    F = field_eval(ode, T)
    res = math.sqrt(F.dx**2 + F.dy**2 + F.dp**2)
    if res > tol * scale:
        raise NotSingularPoint(res)
    J = jacobian(ode, T)
    tr, c2, _ = _char_poly(J)
    r1, r2 = _quad_roots(-tr, c2)
    e1, e2 = r1.real, r2.real
    dx, dy = J[0, 0], J[0, 1]
    lam1, lam2 = dx + p * dy, J[2, 2]
    if abs(e1 - lam1) + abs(e2 - lam2) > abs(e2 - lam1) + abs(e1 - lam2):
        e1, e2 = e2, e1
    eig = (0.0, e1, e2)
    resid = tuple(float(np.linalg.svd(J - t * np.eye(3), compute_uv=False)[-1]) for t in eig)
    return Spectrum(eig, (0.0, lam1, lam2), resid)
