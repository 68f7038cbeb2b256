import csv
import io
import json
import shutil
import subprocess

import pytest

from conftest import CAT_ROWS, SALEM_ROWS
from toral_entropy.cli import main


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def run(argv):
    out = io.StringIO()
    return main(argv, out), out.getvalue()


@pytest.fixture
def cat_file(tmp_path):
    return write(tmp_path, "cat.json", {"l": 2, "rows": CAT_ROWS})


@pytest.fixture
def cert_file(tmp_path, cat_file):
    path = str(tmp_path / "cert.json")
    assert run(["solve", cat_file, "0.3", "0.5", "--json-out", path])[0] == 0
    return path


def test_analyze(tmp_path, cat_file):
    rep = str(tmp_path / "rep.json")
    code, text = run(["analyze", cat_file, "--json-out", rep])
    assert code == 0 and "h_top          0.9624236501" in text
    d = json.load(open(rep))
    assert d["spectral"]["flags"]["hyperbolic"] and "timings" in d and "chart" in d


def test_analyze_errors(tmp_path):
    assert run(["analyze", write(tmp_path, "bad.json", {"rows": [[2, 0], [0, 1]]})])[0] == 3
    assert run(["analyze", write(tmp_path, "junk.json", "{not json")])[0] == 2
    assert run(["analyze", write(tmp_path, "frac.json", {"rows": [[1.5, 0], [0, 1]]})])[0] == 2
    assert run(["analyze", str(tmp_path / "missing.json")])[0] == 2


def test_solve_and_verify(cert_file):
    d = json.load(open(cert_file))
    assert d["contained"] and d["k"] * d["beta"][0] <= d["log_g"][0] <= d["log_g"][1] <= d["k"] * d["beta"][1]
    code, text = run(["verify", cert_file])
    assert code == 0 and json.loads(text)["pass"]


def test_solve_exit_codes(tmp_path, cat_file):
    assert run(["solve", cat_file, "0.5", "3.0"])[0] == 5
    assert run(["solve", cat_file, "0.5", "0.5001", "--k-max", "30"])[0] == 4


@pytest.mark.parametrize("field,change", [
    ("log_g", lambda v: [v[0] * (1 + 1e-9), v[1]]),
    ("r", lambda v: [v[0] * 0.5]),
    ("epsilon", lambda v: v * 1.01),
    ("contained", lambda v: False),
])
def test_verify_detects_tampering(tmp_path, cert_file, field, change):
    d = json.load(open(cert_file))
    d[field] = change(d[field])
    code, text = run(["verify", write(tmp_path, "tampered.json", d)])
    assert code == 6 and json.loads(text)["diff"]


def test_verify_malformed(tmp_path):
    assert run(["verify", write(tmp_path, "m.json", {"rows": CAT_ROWS})])[0] == 2


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def test_export_spectrum(tmp_path):
    code, text = run(["export", write(tmp_path, "s.json", {"rows": SALEM_ROWS}), "spectrum"])
    rows = rows_of(text)
    assert code == 0 and rows[0] == ["index", "re", "im", "modulus", "residual"] and len(rows) == 5


def test_export_bounds_sweep_starts_at_certificate(cert_file):
    d = json.load(open(cert_file))
    rows = rows_of(run(["export", cert_file, "bounds-sweep", "--points", "11"])[1])
    assert len(rows) == 12
    t0 = [float(v) for v in rows[1]]
    if d["path"] == "lower-corner":
        assert t0[1] == pytest.approx(d["per_k_window"][0], rel=1e-12)
    mins = [float(r[1]) for r in rows[1:]]
    assert mins == sorted(mins)


def test_export_psi_curve(tmp_path, cat_file):
    out = str(tmp_path / "psi.csv")
    assert run(["export", cat_file, "psi-curve", out, "--epsilon", "0.01", "--k-max", "10000"])[0] == 0
    rows = rows_of(open(out).read())
    k, val, lim = (float(v) for v in rows[-1])
    assert k == 10000 and abs(val - lim) < 1e-4


def test_export_components(cert_file):
    rows = rows_of(run(["export", cert_file, "components", "--generations", "3"])[1])
    assert [r[0] for r in rows] == ["generation", "1", "2", "3"]


def test_export_unknown(cert_file, cat_file):
    assert run(["export", cert_file, "nonsense"])[0] == 2
    assert run(["export", cat_file, "components"])[0] == 2


def test_deterministic_bytes(tmp_path, cat_file):
    paths = []
    for i, th in enumerate(("1", "4", "1")):
        p = str(tmp_path / f"c{i}.json")
        assert run(["solve", cat_file, "0.1", "0.2", "--threads", th, "--json-out", p])[0] == 0
        paths.append(open(p, "rb").read())
    assert paths[0] == paths[1] == paths[2]


@pytest.mark.skipif(shutil.which("toral-entropy") is None, reason="console script not installed")
def test_console_script(cat_file):
    proc = subprocess.run(["toral-entropy", "analyze", cat_file], capture_output=True, text=True)
    assert proc.returncode == 0 and "x^2 - 3*x + 1" in proc.stdout
