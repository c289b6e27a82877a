"""Property tests for the algebraic and spectral invariants."""
import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import random_poly
from singode.analysis import (
    ALL_DIRECTIONS_DEGENERATE,
    Verdict,
    admissible_directions,
    classify,
    resonance_find,
)
from singode.lifted import field_eval, jacobian, spectrum_at_singular
from singode.poly import CubicField, Direction, Poly2, SingularOde, poly_diff, poly_eval, reciprocal_cubic

coef = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
small = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)
seeds = st.integers(0, 2**32 - 1)
X, Y = Poly2.x(), Poly2.y()


@st.composite
def polys(draw, max_deg=3):
    n = draw(st.integers(0, 6))
    terms = [(draw(st.integers(0, max_deg)), draw(st.integers(0, max_deg)), draw(small)) for _ in range(n)]
    return Poly2.from_terms(terms)


@given(st.lists(polys(), min_size=4, max_size=4))
def test_reciprocal_is_an_involution(mu):
    m = CubicField(tuple(mu))
    assert reciprocal_cubic(reciprocal_cubic(m)) == m


@given(polys(), polys(), small, small)
def test_diff_is_linear_and_mixed_partials_commute(f, g, a, b):
    q = (0.37, -0.81)
    lhs = poly_eval(poly_diff(a * f + b * g, "x"), q)
    rhs = a * poly_eval(poly_diff(f, "x"), q) + b * poly_eval(poly_diff(g, "x"), q)
    assert math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-12)
    assert poly_diff(poly_diff(f, "x"), "y") == poly_diff(poly_diff(f, "y"), "x")


@given(coef, coef, coef, coef, st.floats(-10, 10, allow_nan=False))
def test_horner_matches_term_sum(c0, c1, c2, c3, p):
    m = CubicField(tuple(Poly2.const(c) for c in (c0, c1, c2, c3)))
    horner = m.coefficients_at((0, 0))
    want = sum(c * p**i for i, c in enumerate(horner))
    got = SingularOde(Poly2(), m).M(0.0, 0.0, p)
    scale = sum(abs(c) * abs(p) ** i for i, c in enumerate(horner))
    assert abs(got - want) <= 1e-13 * max(scale, 1e-300) * 4


@given(coef, coef, coef, coef)
def test_direction_multiplicities_count_one_or_three(c0, c1, c2, c3):
    m = CubicField(tuple(Poly2.const(c) for c in (c0, c1, c2, c3)))
    ds = admissible_directions(SingularOde(X, m), (0.0, 0.0))
    if ds is ALL_DIRECTIONS_DEGENERATE:
        assert max(abs(c) for c in (c0, c1, c2, c3)) <= 1e-10
        return
    total = sum(d.multiplicity for d in ds)
    assert total in (1, 3)
    assert all(1 <= d.multiplicity <= 3 for d in ds)


@given(st.floats(-3, 3, allow_nan=False), st.floats(0.2, 3), st.floats(0.1, 3), st.booleans())
def test_non_transversal_iff_lambda1_vanishes(p0, a, s, tangent):
    # M = s (p - p0)(p^2 + 1) has the single real root p0
    m = CubicField((Poly2.const(-s * p0), Poly2.const(s), Poly2.const(-s * p0), Poly2.const(s)))
    delta = a * (Y - p0 * X) if tangent else a * (X + Y * 0.5)
    ode = SingularOde(delta, m)
    c = classify(ode, (0.0, 0.0), Direction.from_slope(p0))
    lam1 = poly_eval(poly_diff(delta, "x"), (0, 0)) + p0 * poly_eval(poly_diff(delta, "y"), (0, 0))
    assume(tangent or abs(lam1) > 1e-6)
    assert (c.verdict is Verdict.NON_TRANSVERSAL) == (abs(lam1) <= 1e-9)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.booleans())
def test_same_sign_pairs_have_no_resonance(a, b, neg):
    s = -1.0 if neg else 1.0
    assert resonance_find(s * a, s * b, 64) is None


@given(st.integers(1, 20), st.integers(1, 20), st.floats(0.1, 10))
def test_resonance_is_sound_and_minimal(p, q, l1):
    l2 = -p * l1 / q
    hit = resonance_find(l1, l2, 64)
    assert hit is not None
    pp, qq, order = hit
    assert abs(pp * l1 + qq * l2) <= 1e-9 * (pp * abs(l1) + qq * abs(l2))
    # exhaustive search finds nothing of lower order
    for o in range(2, order):
        for i in range(1, o):
            assert abs(i * l1 + (o - i) * l2) > 1e-9 * (i * abs(l1) + (o - i) * abs(l2))


@settings(max_examples=200)
@given(seeds, st.floats(-1, 1), st.floats(-5, 5))
def test_vertical_lines_over_the_locus_are_invariant(seed, y0, p):
    rng = np.random.default_rng(seed)
    ode = SingularOde(X * random_poly(rng, 2), CubicField(tuple(random_poly(rng, 3) for _ in range(4))))
    v = field_eval(ode, (0.0, y0, p))
    assert v.dx == 0.0 and v.dy == 0.0


@settings(max_examples=200)
@given(seeds, st.floats(-1, 1), st.floats(-2, 2))
def test_spectrum_matches_eigenvalue_formula(seed, y0, p):
    rng = np.random.default_rng(seed)
    g = random_poly(rng, 2) + 1.0
    delta = X * g
    mu = [random_poly(rng, 2) for _ in range(4)]
    q = (0.0, y0)
    r = sum(poly_eval(m, q) * p**i for i, m in enumerate(mu))
    mu[0] = mu[0] - r
    ode = SingularOde(delta, CubicField(tuple(mu)))
    assume(abs(ode.M(0.0, y0, p)) < 1e-12)
    s = spectrum_at_singular(ode, (0.0, y0, p))
    J = jacobian(ode, (0.0, y0, p))
    assert J[0, 2] == 0.0 and J[1, 2] == 0.0
    lam1 = J[0, 0] + p * J[0, 1]
    lam2 = J[2, 2]
    assert s.eigenvalues[0] == 0.0
    for got, want in zip(s.eigenvalues[1:], (lam1, lam2)):
        assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


@given(seeds)
def test_classify_is_deterministic(seed):
    rng = np.random.default_rng(seed)
    ode = SingularOde(X * (random_poly(rng, 1) + 1.0), CubicField(tuple(random_poly(rng, 2) for _ in range(4))))
    ds = admissible_directions(ode, (0.0, 0.3))
    assume(ds is not ALL_DIRECTIONS_DEGENERATE)
    for d in ds:
        assert classify(ode, (0.0, 0.3), d.dir) == classify(ode, (0.0, 0.3), d.dir)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_direction_normal_form(u, v):
    assume(math.hypot(u, v) > 1e-9)
    d = Direction(u, v)
    assert math.isclose(math.hypot(d.u, d.v), 1.0, rel_tol=1e-12)
    assert d.u > 0 or (d.u == 0 and d.v > 0)
    assert Direction(-u, -v) == d
