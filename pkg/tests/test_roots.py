import numpy as np
import pytest

from singode.roots import complex_roots, effective_degree, real_roots


def expand(roots):
    """Ascending coefficients of prod (p - r)."""
    c = np.array([1.0])
    for r in roots:
        c = np.convolve(c, [-r, 1.0])
    return list(c)


@pytest.mark.parametrize("roots, want", [
    ([0.0, 1.0, -1.0], [(-1.0, 1), (0.0, 1), (1.0, 1)]),
    ([0.0, 0.0, 2.0], [(0.0, 2), (2.0, 1)]),
    ([1.5, 1.5, 1.5], [(1.5, 3)]),
    ([-3.0, 0.25], [(-3.0, 1), (0.25, 1)]),
    ([7.0], [(7.0, 1)]),
])
def test_real_roots_with_multiplicity(roots, want):
    got = real_roots(expand(roots))
    assert [m for _, m in got] == [m for _, m in want]
    for (a, _), (b, _) in zip(got, want):
        assert abs(a - b) < 1e-6


def test_complex_pair_is_dropped():
    # (p - 2)(p^2 + 1)
    assert [(round(r, 12), m) for r, m in real_roots([-2.0, 1.0, -2.0, 1.0])] == [(2.0, 1)]


def test_effective_degree():
    assert effective_degree([1.0, 0.0, 2.0, 0.0]) == 2
    assert effective_degree([0.0, 0.0, 0.0, 0.0]) == -1
    assert effective_degree([1.0, 1e-12], tol=1e-10) == 0


def test_roots_match_numpy(rng):
    for _ in range(300):
        c = rng.normal(size=4)
        ours = sorted(complex_roots(list(c)), key=lambda z: (z.real, z.imag))
        ref = sorted(np.roots(c[::-1]), key=lambda z: (z.real, z.imag))
        assert len(ours) == 3
        for a, b in zip(ours, ref):
            assert abs(a - b) <= 1e-7 * (1 + abs(b))


def test_constant_has_no_roots():
    assert real_roots([3.0]) == []


def test_tiny_linear_coefficient_does_not_underflow():
    # -p^3 + 3.6e-277 p: three real roots, two of them ~1e-138 apart from zero
    got = real_roots([0.0, 3.569096917328337e-277, 0.0, -1.0])
    assert sum(m for _, m in got) == 3
    assert all(abs(r) < 1e-130 for r, _ in got)
