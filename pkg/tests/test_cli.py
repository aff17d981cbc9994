from __future__ import annotations

import csv
import json
import math
import subprocess
import sys

import pytest

from lapzeta.cli import main, parse_grid


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def value_of(table: str, key: str) -> str:
    for line in table.splitlines():
        parts = line.split()
        if parts and parts[0] == key:
            return parts[1]
    raise KeyError(key)


def test_logdet_dirichlet(capsys):
    code, out, _ = run(capsys, "logdet", "--dims", "3", "--bc", "dirichlet")
    assert code == 0
    assert float(value_of(out, "logdet")) == pytest.approx(math.log(3), rel=1e-15)
    assert len(value_of(out, "logdet").replace(".", "").lstrip("0")) == 17


def test_logdet_periodic_excluded(capsys):
    code, out, _ = run(capsys, "logdet", "--dims", "3", "--bc", "periodic", "--exclude-zero-modes", "--format", "json")
    assert code == 0
    assert json.loads(out)["logdet"] == pytest.approx(math.log(9), rel=1e-15)


def test_exit_codes(capsys):
    code, out, err = run(capsys, "logdet", "--dims", "2,2", "--bc", "periodic")
    assert code == 3 and out == "" and "zero" in err
    with pytest.raises(SystemExit) as exc:
        main(["logdet", "--dims", "0"])
    assert exc.value.code == 2
    code, _, _ = run(capsys, "zeta-det", "--box", "1", "--mass", "0", "--geometry", "torus")
    assert code == 2
    code, _, err = run(capsys, "zeta-det", "--box", "1,1", "--abs-tol", "1e-300", "--rel-tol", "1e-300")
    assert code in (0, 4)


def test_quadrature_failure_exit_code(capsys, monkeypatch):
    import lapzeta.cli as cli
    from lapzeta.errors import QuadratureFailure

    def boom(*a, **k):
        raise QuadratureFailure("budget exhausted")

    monkeypatch.setattr(cli, "zeta_decomposition_box", boom)
    code, _, err = run(capsys, "zeta-det", "--box", "1")
    assert code == 4 and "numerical failure" in err


def test_zeta_det(capsys):
    code, out, _ = run(capsys, "zeta-det", "--box", "1.0")
    assert float(value_of(out, "log_det_zeta")) == pytest.approx(math.log(2), abs=1e-12)
    code, out, _ = run(capsys, "zeta-det", "--box", "1.0", "--mass", "1.0", "--geometry", "torus")
    assert float(value_of(out, "log_det_zeta")) == pytest.approx(math.log(4 * math.sinh(0.5) ** 2), abs=1e-10)
    code, out, _ = run(capsys, "zeta-det", "--box", "1,1", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and math.isfinite(doc["log_det_zeta"]) and "volume_term" in doc["terms"]


def test_verify_hypercube_writes_files_and_round_trips(capsys, tmp_path):
    jpath, cpath = tmp_path / "r.json", tmp_path / "r.csv"
    code, out, _ = run(capsys, "verify-hypercube", "--box", "1", "--u-grid", "8:512:geometric",
                       "--json", str(jpath), "--csv", str(cpath))
    assert code == 0
    doc = json.loads(jpath.read_text())
    assert doc["converged"] and max(abs(r["residual"]) for r in doc["records"]) <= 1e-6
    rows = list(csv.reader(cpath.open()))
    assert rows[0] == ["u", "logdet", "predicted", "residual"] and len(rows) == 8
    code, again, _ = run(capsys, "render", str(jpath))
    assert code == 0 and again == out


def test_verify_failure_record(capsys, tmp_path):
    # a grid too coarse to show convergence with an impossible tolerance
    code, out, err = run(capsys, "verify-hypercube", "--box", "1,1", "--u-grid", "4,5,4",
                         "--residual-tol", "1e-12")
    assert code == 5
    record = json.loads(err.strip().splitlines()[-1])
    assert record["status"] == "fail" and record["failures"]


def test_verify_massive_torus(capsys):
    code, out, _ = run(capsys, "verify-massive-torus", "--box", "1,1", "--mass", "1", "--u-grid", "16:64:geometric",
                       "--format", "json")
    assert code == 0 and json.loads(out)["converged"]


def test_ratio2d(capsys):
    code, out, _ = run(capsys, "ratio2d", "--n1", "3", "--n2", "4", "--mass-squared", "0.5", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and doc["printed_mismatch"]
    assert doc["lhs_over_printed"] == pytest.approx(0.5, rel=1e-12)


def test_reglim(capsys):
    code, out, _ = run(capsys, "reglim", "--d", "1", "--n-grid", "8:1024:geometric", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["fit"]["a00"] == pytest.approx(0.0, abs=1e-9)
    assert doc["log_det_zeta"] == pytest.approx(math.log(2), abs=1e-9)


def test_coeffs_and_chebyshev(capsys):
    code, out, _ = run(capsys, "coeffs", "--d", "2", "--format", "json")
    doc = json.loads(out)
    assert doc["entries"]["2"]["value"] == pytest.approx(1.1662436161232750, abs=1e-12)
    code, out, _ = run(capsys, "chebyshev", "--n", "2", "--x", "2", "--format", "csv")
    assert "product_full_cycle,12" in out


def test_grid_parsing():
    assert parse_grid("8:64:geometric") == [8, 16, 32, 64]
    assert parse_grid("1:4:linear") == [1, 2, 3, 4]
    assert parse_grid("2:10:linear:4") == [2, 6, 10]
    assert parse_grid("16:32:geometric:1.5") == [16, 24]
    import argparse
    for bad in ("8:4:geometric", "1:2:cubic", "5:5:geometric", "a:b:linear"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_grid(bad)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lapzeta", "logdet", "--dims", "4", "--format", "json"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["logdet"] == pytest.approx(math.log(4), rel=1e-15)
