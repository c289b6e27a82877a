import json
import math
import subprocess
import sys

import pytest

from conftest import EQUATIONS
from singode.cli import main


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "singode", *args], capture_output=True, text=True, cwd=cwd)


def test_analyze_example4_origin():
    r = run("analyze", "--input", str(EQUATIONS / "ex4.json"), "--point", "0,0")
    assert r.returncode == 0, r.stderr
    rep = json.loads(r.stdout)
    lams = {d["p"]: d["lambda"] for d in rep["directions"]}
    assert lams == {-1.0: 2.0, 0.0: -1.0, 1.0: 2.0}
    assert rep["meta"]["options"]["tol_locus"] == 1e-10
    assert rep["oscillation"] == "excluded"


def test_analyze_off_locus(capsys):
    assert main(["analyze", "--input", str(EQUATIONS / "ex4.json"), "--point", "0.5,1"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "NotSingular"


def test_analyze_metric_file(capsys):
    assert main(["analyze", "--input", str(EQUATIONS / "geodesic_cy.json"), "--point", "0,0"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["mu"] == [0.0, 0.0, -1.0, 0.0]
    assert rep["delta_gradient"] == [0.0, 1.0]


def test_analyze_grid_lists_crossings(capsys, tmp_path):
    out = tmp_path / "g.json"
    assert main(["analyze", "--input", str(EQUATIONS / "ex4.json"), "--grid=-1,1,-1,1,4,3", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert len(rep["grid"]["verdicts"]) == 3 and len(rep["grid"]["verdicts"][0]) == 4
    pts = [c["point"] for c in rep["crossings"]]
    assert pts and all(abs(x) < 1e-12 for x, _ in pts)
    assert all(c["verdict"] == "Singular" for c in rep["crossings"])


def test_analyze_tolerance_override(capsys):
    assert main(["analyze", "--input", str(EQUATIONS / "ex4.json"), "--point", "1e-6,0", "--tol-locus", "1e-3"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"] == "Singular" and rep["meta"]["options"]["tol_locus"] == 1e-3


@pytest.mark.parametrize("args", [
    ["analyze", "--input", "missing.json", "--point", "0,0"],
    ["analyze", "--input", str(EQUATIONS / "ex4.json"), "--point", "0"],
    ["analyze", "--input", str(EQUATIONS / "ex4.json")],
    ["analyze", "--input", str(EQUATIONS / "ex4.json"), "--point", "0,0", "--grid", "0,1,0,1,2,2"],
    ["analyze", "--input", str(EQUATIONS / "ex4.json"), "--grid", "0,1,0,1,2.5,2"],
    ["trace", "--input", str(EQUATIONS / "ex4.json"), "--point", "0,0", "--dir", "up", "--side", "plus",
     "--offsets", "0", "--out", "x.csv"],
    ["portrait", "--input", str(EQUATIONS / "ex4.json"), "--window", "1,1,-1,1", "--out", "p.svg"],
    ["portrait", "--input", str(EQUATIONS / "ex4.json"), "--window=-1,1,-1,1", "--out", "p.png"],
    ["verify", "--example", "nope"],
])
def test_bad_input_exits_2(args, tmp_path):
    r = run(*args, cwd=tmp_path)
    assert r.returncode == 2
    assert r.stderr and not r.stdout


def test_malformed_equation_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"delta": [[0, 0, 1]], "mu": [[], []]}')
    assert main(["analyze", "--input", str(bad), "--point", "0,0"]) == 2
    bad.write_text("{not json")
    assert main(["analyze", "--input", str(bad), "--point", "0,0"]) == 2


def test_trace_writes_csvs_and_summary(tmp_path):
    out = tmp_path / "node.csv"
    code = main(["trace", "--input", str(EQUATIONS / "ex4_sqrt2.json"), "--point", "0,0", "--dir", "1",
                 "--side", "plus", "--offsets=-2,-1,-0.5,0.25,0.4", "--out", str(out)])
    assert code == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == ["node_0.csv", "node_1.csv", "node_2.csv", "node_3.csv", "node_4.csv", "node_summary.json"]
    summary = json.loads((tmp_path / "node_summary.json").read_text())
    assert abs(summary["exponent_hat"] / (2 * math.sqrt(2)) - 1) < 0.01
    assert summary["classification"]["verdict"] == "NodeNonResonant"
    assert summary["log_coefficient_hat"] is None
    head = (tmp_path / "node_0.csv").read_text().splitlines()[:2]
    assert head[0].startswith("# {") and head[1] == "t,x,y,p"


def test_trace_log_coefficient(tmp_path):
    out = tmp_path / "ex5"
    assert main(["trace", "--input", str(EQUATIONS / "ex5.json"), "--point", "0,0", "--dir", "0",
                 "--side", "plus", "--offsets=-1,0,1", "--out", str(out)]) == 0
    summary = json.loads((tmp_path / "ex5_summary.json").read_text())
    assert abs(summary["log_coefficient_hat"] - 1) < 0.02


def test_trace_vertical_direction(tmp_path):
    assert main(["trace", "--input", str(EQUATIONS / "geodesic_cy.json"), "--point", "0,0", "--dir", "inf",
                 "--side", "plus", "--offsets=-1,1", "--out", str(tmp_path / "v")]) == 0
    assert json.loads((tmp_path / "v_summary.json").read_text())["dir"] == "inf"


def test_numerical_failure_exits_3(monkeypatch, tmp_path, capsys):
    from singode import cli
    from singode.errors import StepSizeUnderflow

    def boom(*a, **k):
        raise StepSizeUnderflow(0.5, (0.0, 0.0, 0.0))

    monkeypatch.setattr(cli, "trace_from_singular", boom)
    code = main(["trace", "--input", str(EQUATIONS / "ex4.json"), "--point", "0,0", "--dir", "1",
                 "--side", "plus", "--offsets", "0", "--out", str(tmp_path / "t")])
    assert code == 3
    assert "step size underflow" in capsys.readouterr().err


def test_trace_untraceable_exits_4(tmp_path):
    r = run("trace", "--input", str(EQUATIONS / "ex2.json"), "--point", "0,0", "--dir", "0", "--side", "plus",
            "--offsets", "0", "--out", "t.csv", cwd=tmp_path)
    assert r.returncode == 4
    assert "DegenerateLocus" in r.stderr


def test_portrait_svg_example4(tmp_path):
    out = tmp_path / "p.svg"
    assert main(["portrait", "--input", str(EQUATIONS / "ex4_sqrt2.json"), "--window=-1,1,-1,1",
                 "--out", str(out)]) == 0
    svg = out.read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert 'stroke="#c0392b"' in svg  # saddle pencil
    assert 'stroke="#2471a3"' in svg  # node pencils
    assert 'stroke-dasharray' in svg  # the locus


def test_portrait_csv_labels(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["portrait", "--input", str(EQUATIONS / "ex4_sqrt2.json"), "--window=-1,1,-1,1",
                 "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    labels = {(r[4], r[5]) for r in rows if r[0] == "point"}
    assert labels == {("0", "Saddle"), ("1", "NodeNonResonant"), ("-1", "NodeNonResonant")}


def test_portrait_zero_ode_has_no_arrows(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["portrait", "--input", str(EQUATIONS / "zero.json"), "--window=-1,1,-1,1", "--out", str(out)]) == 0
    assert out.read_text() == "kind,group,x,y,slope,label\n"


def test_verify_single_example(capsys):
    assert main(["verify", "--example", "ex4"]) == 0
    text = capsys.readouterr().out
    lines = [line for line in text.splitlines() if line.startswith("ex4 ")]
    assert lines and all(line.endswith("PASS") for line in lines)
    summary = json.loads(text[text.index("{"):])
    assert summary["failed"] == 0 and summary["total"] == len(lines)


def test_help_shows_defaults():
    r = run("analyze", "--help")
    assert "1e-10" in r.stdout and "64" in r.stdout
