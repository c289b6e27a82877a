import math

import numpy as np
import pytest

from singode.analysis import admissible_directions, classify
from singode.corpus import _ex5_form, corpus_get, corpus_list, ex5_ode, residual_check, run_checks
from singode.poly import Direction


def test_corpus_has_all_entries():
    ids = [e.id for e in corpus_list()]
    assert len(ids) >= 6
    for want in ("ex1", "ex2", "ex3", "ex4", "ex4_sqrt2", "ex4_neg_sqrt2", "ex5", "geodesic_cy"):
        assert want in ids
    with pytest.raises(KeyError):
        corpus_get("nope")


def test_ex4_directions():
    ds = admissible_directions(corpus_get("ex4").ode, (0, 0))
    assert sorted((d.slope, d.multiplicity) for d in ds) == [(-1.0, 1), (0.0, 1), (1.0, 1)]


def test_ex5_closed_form_is_x2_log_x():
    xs = np.geomspace(1e-3, 1, 50)
    _, p, _ = corpus_get("ex5").solution(xs, c=0.0)
    assert np.allclose(p, xs**2 * np.log(xs), rtol=1e-14, atol=0)


@pytest.mark.parametrize("eid, family, lo", [
    ("ex2", {"alpha": 1.0, "beta": 2.0}, 1e-2),
    ("ex3", {"alpha": 1.0, "beta": 1.0}, 1e-3),
    ("ex4", {"c": 5.0}, 1e-3),
    ("ex5", {"c": 0.7}, 1e-3),
])
def test_residuals(eid, family, lo):
    e = corpus_get(eid)
    assert residual_check(e, np.geomspace(lo, 1.0, 300), **family) < 1e-10


def test_ex5_other_polynomial_f():
    # x p' = 1.5 p + x + 3 x^4: non-integer alpha, no logarithm
    ode = ex5_ode(1.5, {1: 1.0, 4: 3.0})
    xs = np.geomspace(1e-3, 1, 100)
    y, p, dp = _ex5_form(xs, alpha=1.5, f={1: 1.0, 4: 3.0}, c=-0.4)
    res = [abs(float(ode.delta(x, 0.0)) * d - ode.M(x, yy, pp)) for x, yy, pp, d in zip(xs, y, p, dp)]
    assert max(res) < 1e-10


def test_expected_verdicts_reproduced():
    for e in corpus_list():
        for slope, want in e.expected_verdicts.items():
            assert classify(e.ode, e.point, Direction.from_slope(slope)).verdict.value == want, (e.id, slope)


def test_ex1_origin_multiple_root():
    assert classify(corpus_get("ex1").ode, (0, 0), Direction.from_slope(0.0)).verdict.value == "MultipleRoot"


def test_structural_checks_pass():
    for e in corpus_list():
        for r in run_checks(e, numeric=False):
            assert r.passed, r.line()


def test_check_line_format():
    r = run_checks(corpus_get("ex4"), numeric=False)[0]
    line = r.line()
    assert line.startswith("ex4") and line.endswith("PASS") and "threshold=" in line
    d = r.as_dict()
    assert set(d) == {"entry", "check", "measured", "threshold", "passed"}
    assert isinstance(d["passed"], bool) and not math.isnan(d["threshold"])
