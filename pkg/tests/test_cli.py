import csv
import io
import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from dirac_lp.cli import main

SVG = "{http://www.w3.org/2000/svg}"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def csv_body(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.reader(io.StringIO("\n".join(lines))))


@pytest.mark.parametrize("argv", [
    [],
    ["region", "--p", "0.5"],
    ["region", "--k", "0"],
    ["region", "--lambda0", "1", "--factor", '{"type":"point"}'],
    ["region", "--c", "1", "2", "--k", "1", "2", "3"],
    ["region", "--factor", '{"type":"sphere"}'],
    ["membership", "--mu", "1,2,3"],
    ["radial", "--lam", "1", "--mu", "1"],
    ["weyl", "--n-list", "2,x"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_region_json_landmark(capsys):
    code, out = run(capsys, "region", "--c", "1", "--k", "2", "--lambda0", "2", "--p", "1",
                    "--format", "json")
    assert code == 0
    data = json.loads(out)
    region = data["regions"][0]
    assert region["case"] == "R"
    assert region["landmark"] == pytest.approx(math.sqrt(3), abs=1e-12)
    assert data["config"]["lambda0"] == [2.0]
    assert data["config"]["p"] == [1.0]


def test_region_factor_flag(capsys):
    factor = json.dumps({"type": "circle", "L": 2 * math.pi, "structure": "nontrivial"})
    _, out = run(capsys, "region", "--factor", factor, "--p", "1", "2")
    regions = json.loads(out)["regions"]
    assert [r["case"] for r in regions] == ["M", "R"]
    assert regions[0]["landmark"] == pytest.approx(math.sqrt(0.75))


def test_region_csv(capsys):
    _, out = run(capsys, "region", "--lambda0", "0.5", "--format", "csv", "--samples", "5")
    assert out.startswith("# config: {")
    rows = csv_body(out)
    assert rows[0] == ["panel", "case", "landmark", "re", "im"]
    assert len(rows) == 1 + 4 * 5


def test_region_svg_strip_and_rays(capsys):
    _, out = run(capsys, "region", "--c", "1", "--k", "2", "--lambda0", "0", "1", "--p", "1", "2",
                 "--format", "svg")
    root = ET.fromstring(out)
    assert root.tag == SVG + "svg" and root.get("version") == "1.1"
    panels = [g for g in root.iter(SVG + "g") if g.get("class") == "panel"]
    assert len(panels) == 2
    strip, rays = panels
    assert any(p.get("class") == "region" for p in strip.iter(SVG + "path"))
    ray_paths = [p for p in rays.iter(SVG + "path") if "ray" in (p.get("class") or "")]
    assert ray_paths
    desc = root.find(SVG + "desc")
    assert json.loads(desc.text)["format"] == "svg"


@pytest.mark.parametrize("mu, verdict, code", [
    ("3,0.5", "inside", 0), ("0,5", "outside", 1), ("0,1", "boundary", 0),
])
def test_membership(capsys, mu, verdict, code):
    rc, out = run(capsys, "membership", "--c", "1", "--k", "2", "--lambda0", "0", "--p", "1",
                  "--mu", mu)
    assert rc == code
    line = out.splitlines()[-1]
    assert line.split()[0] == verdict
    assert "threshold=1.0" in line
    assert out.startswith("# config: ")


def test_membership_rays(capsys):
    rc, _ = run(capsys, "membership", "--lambda0", "1", "--p", "2", "--mu", "0.5,0")
    assert rc == 1
    rc, _ = run(capsys, "membership", "--lambda0", "1", "--p", "inf", "--mu", "0.5,0")
    assert rc == 0


def test_compare_laplacian(capsys):
    _, out = run(capsys, "compare-laplacian", "--k", "3", "--p", "2", "--samples", "7")
    assert "shift=2.25" in out
    rows = csv_body(out)
    assert rows[0] == ["s", "re_d_squared", "im_d_squared", "re_laplacian", "im_laplacian"]
    for row in rows[1:]:
        assert float(row[3]) - float(row[1]) == pytest.approx(2.25)
    _, svg = run(capsys, "compare-laplacian", "--format", "svg")
    ET.fromstring(svg)


def test_radial_csv(capsys):
    _, out = run(capsys, "radial", "--r-end", "12", "--window", "6,12", "--steps", "201")
    comments = [ln for ln in out.splitlines() if ln.startswith("#")]
    assert json.loads(comments[0][len("# config: "):])["r_end"] == 12.0
    fields = dict(item.split("=", 1) for ln in comments[1:] for item in ln[2:].split()
                  if "=" in item)
    assert float(fields["fitted_exponent"]) == pytest.approx(-2.0, rel=0.01)
    assert float(fields["predicted_exponent"]) == -2.0
    rows = csv_body(out)
    assert rows[0] == ["r", "log_abs_phi"] and len(rows) == 202


def test_radial_flat(capsys):
    _, out = run(capsys, "radial", "--c", "0", "--r-end", "210", "--window", "50,200",
                 "--steps", "2001")
    assert "fitted_beta=" in out and "predicted_gamma=-1.0" in out


def test_weyl_table(capsys, monkeypatch):
    monkeypatch.setenv("DIRAC_SPECTRA_THREADS", "2")
    _, out = run(capsys, "weyl", "--k", "1", "--n-list", "2,4", "--squared")
    rows = csv_body(out)
    assert rows[0] == ["n", "p", "s", "sign", "ratio", "triangle_bound", "analytic_bound"]
    assert [r[0] for r in rows[1:]] == ["2", "4"]
    for row in rows[1:]:
        assert float(row[4]) <= float(row[5]) <= float(row[6])
    assert '"squared": true' in out


def test_ball_json(capsys):
    _, out = run(capsys, "ball", "--k", "2", "--p", "2", "3")
    rows = json.loads(out)["ball_integrals"]
    assert [r["classification"] for r in rows] == ["DIVERGENT", "FINITE"]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "region.json"
    code, out = run(capsys, "region", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["regions"][0]["case"] == "L"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dirac_lp", "membership", "--mu", "0,9"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stdout.splitlines()[-1].startswith("outside")
