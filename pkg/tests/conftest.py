from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from singode.poly import CubicField, Poly2, SingularOde

EQUATIONS = Path(__file__).resolve().parent.parent / "equations"


def random_poly(rng: np.random.Generator, degree: int = 4, density: float = 0.6, scale: float = 1.0) -> Poly2:
    terms = []
    for d in range(degree + 1):
        for i in range(d + 1):
            if rng.random() < density:
                terms.append((i, d - i, float(rng.uniform(-scale, scale))))
    return Poly2.from_terms(terms)


def random_ode(rng: np.random.Generator, degree: int = 3) -> SingularOde:
    return SingularOde(random_poly(rng, degree), CubicField(tuple(random_poly(rng, degree) for _ in range(4))))


def horner2(f: Poly2, x: float, y: float) -> float:
    """Nested Horner evaluation: outer in x, inner in y. Independent of Poly2's term sum."""
    d = f.as_dict()
    if not d:
        return 0.0
    nx = max(i for i, _ in d)
    ny = max(j for _, j in d)
    acc = 0.0
    for i in range(nx, -1, -1):
        inner = 0.0
        for j in range(ny, -1, -1):
            inner = inner * y + d.get((i, j), 0.0)
        acc = acc * x + inner
    return acc


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
