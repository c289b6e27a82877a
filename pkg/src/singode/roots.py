"""Real roots of polynomials of degree <= 3 with multiplicities.

Closed-form roots (trigonometric method for three real roots, Cardano
otherwise), a Newton polish on the real ones, then single-linkage
clustering so that numerically split multiple roots are reported once.
"""
from __future__ import annotations

import cmath
import math
from typing import Sequence

__all__ = ["complex_roots", "real_roots", "effective_degree"]

TOL_ROOT = 1e-7


def effective_degree(coeffs: Sequence[float], tol: float = 0.0) -> int:
    """Index of the highest coefficient with ``|c| > tol``; -1 if none."""
    for k in range(len(coeffs) - 1, -1, -1):
        if abs(coeffs[k]) > tol:
            return k
    return -1


def _quadratic(a: float, b: float, c: float) -> list[complex]:
    disc = b * b - 4.0 * a * c
    if disc >= 0.0:
        s = math.sqrt(disc)
        q = -0.5 * (b + math.copysign(s, b))
        if q == 0.0:
            return [0.0 + 0j, 0.0 + 0j]
        return [complex(q / a), complex(c / q)]
    s = cmath.sqrt(disc)
    return [(-b + s) / (2.0 * a), (-b - s) / (2.0 * a)]


def _cubic(a: float, b: float, c: float, d: float) -> list[complex]:
    b, c, d = b / a, c / a, d / a
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    if p == 0.0 and q == 0.0:
        return [complex(-shift)] * 3
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc <= 0.0 and p < 0.0:
        m = 2.0 * math.sqrt(-p / 3.0)
        # 3q / (p m), factored so tiny p does not underflow to a zero divisor
        arg = 0.0 if q == 0.0 else (1.5 * q / p) * math.sqrt(-3.0 / p)
        arg = max(-1.0, min(1.0, arg)) if math.isfinite(arg) else math.copysign(1.0, -q)
        theta = math.acos(arg) / 3.0
        return [complex(m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift) for k in range(3)]
    s = math.sqrt(max(disc, 0.0))
    u = math.copysign(abs(-q / 2.0 - math.copysign(s, q)) ** (1.0 / 3.0), -q / 2.0 - math.copysign(s, q))
    v = -p / (3.0 * u) if u != 0.0 else 0.0
    t1 = u + v
    re = -t1 / 2.0
    im = math.sqrt(3.0) / 2.0 * (u - v)
    return [complex(t1 - shift), complex(re - shift, im), complex(re - shift, -im)]


def _horner(coeffs: Sequence[float], x: float) -> tuple[float, float]:
    f, df = 0.0, 0.0
    for c in reversed(coeffs):
        df = df * x + f
        f = f * x + c
    return f, df


def _polish(coeffs: Sequence[float], x: float, iters: int = 4) -> float:
    f, df = _horner(coeffs, x)
    for _ in range(iters):
        if df == 0.0 or f == 0.0:
            break
        x_new = x - f / df
        f_new, df_new = _horner(coeffs, x_new)
        if abs(f_new) >= abs(f):
            break
        x, f, df = x_new, f_new, df_new
    return x


def complex_roots(coeffs: Sequence[float]) -> list[complex]:
    """All roots of ``sum(coeffs[i] * p**i)``; ``coeffs[-1]`` must be nonzero."""
    n = len(coeffs) - 1
    if n < 1:
        return []
    if coeffs[-1] == 0.0:
        raise ValueError("leading coefficient is zero")
    if n == 1:
        return [complex(-coeffs[0] / coeffs[1])]
    if n == 2:
        return _quadratic(coeffs[2], coeffs[1], coeffs[0])
    if n == 3:
        return _cubic(coeffs[3], coeffs[2], coeffs[1], coeffs[0])
    raise ValueError("degree above 3 is not supported")


def real_roots(coeffs: Sequence[float], tol_root: float = TOL_ROOT) -> list[tuple[float, int]]:
    """Real roots with multiplicity, ascending.

    Roots closer than ``tol_root * (1 + max|root|)`` are merged; a merged
    cluster whose mean has negligible imaginary part counts as one real root
    of multiplicity equal to the cluster size.
    """
    roots = complex_roots(coeffs)
    if not roots:
        return []
    scale = 1.0 + max(abs(r) for r in roots)
    eps = tol_root * scale
    polished = [complex(_polish(coeffs, r.real), 0.0) if abs(r.imag) <= eps else r for r in roots]

    clusters: list[list[complex]] = []
    for r in polished:
        hits = [cl for cl in clusters if any(abs(r - s) <= eps for s in cl)]
        merged = [r]
        for cl in hits:
            merged.extend(cl)
            clusters.remove(cl)
        clusters.append(merged)

    out = []
    for cl in clusters:
        mean = sum(cl) / len(cl)
        if abs(mean.imag) <= eps:
            x = mean.real if len(cl) > 1 else cl[0].real
            out.append((x + 0.0, len(cl)))
    out.sort()
    return out
