import csv
import json

import numpy as np
import pytest

from rescaled_greedy import objectives as ob
from rescaled_greedy.cli import TRACE_COLUMNS, InputError, load_spec, main


def write_spec(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def quad_spec(tmp_path):
    return write_spec(tmp_path / "quad.ini", """
[objective]
source = builtin:quadratic
seed = 2

[run]
mu = 2
weakness = 0.5
variants = rescaled, no_rescale_baseline

[scan]
mu_grid = 1.5, 2, 4, 8
""")


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_quad1d(tmp_path, capsys):
    spec = write_spec(tmp_path / "s.ini", "[objective]\nsource = builtin:quad1d\n")
    assert main(["run", "--spec", spec, "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "trace_rescaled.csv")
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert len(rows) == 2
    summary = json.loads((tmp_path / "o" / "summary_rescaled.json").read_text())
    assert summary["termination"] == "gradient_zero"
    assert summary["bound_check"] == "pass"


def test_run_two_variants(tmp_path, quad_spec, capsys):
    out = tmp_path / "o"
    assert main(["run", "--spec", quad_spec, "--out", str(out), "--k-max", "60"]) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "summary_no_rescale_baseline.json", "summary_rescaled.json",
        "trace_no_rescale_baseline.csv", "trace_rescaled.csv"]
    both = json.loads(capsys.readouterr().out)
    assert set(both) == {"rescaled", "no_rescale_baseline"}
    assert both["no_rescale_baseline"]["bound_check"] == "not_applicable"
    assert all(v["final_error"] is not None for v in both.values())


def test_run_missing_objective_leaves_nothing(tmp_path, capsys):
    spec = write_spec(tmp_path / "s.ini", "[objective]\nsource = missing.txt\n")
    out = tmp_path / "o"
    assert main(["run", "--spec", spec, "--out", str(out)]) == 2
    assert "not found" in capsys.readouterr().err
    assert not out.exists()


def test_missing_spec_file(tmp_path, capsys):
    assert main(["run", "--spec", str(tmp_path / "nope.ini")]) == 2


def test_objective_file_source(tmp_path, capsys):
    obj = ob.QuadraticObjective(np.eye(3), [1.0, -2.0, 0.5])
    ob.save_objective(obj, tmp_path / "obj.txt")
    spec = write_spec(tmp_path / "s.ini", "[objective]\nsource = obj.txt\n[output]\ndir = res\n")
    assert main(["run", "--spec", spec]) == 0
    assert (tmp_path / "res" / "trace_rescaled.csv").exists()


def test_dictionary_dim_mismatch(tmp_path, capsys):
    (tmp_path / "d.txt").write_text("2 2 canonical_basis\n1 0\n0 1\n")
    spec = write_spec(tmp_path / "s.ini",
                      "[objective]\nsource = builtin:linear\n[dictionary]\nsource = d.txt\n")
    assert main(["run", "--spec", spec, "--out", str(tmp_path / "o")]) == 2


def test_bad_variant_rejected(tmp_path):
    spec = write_spec(tmp_path / "s.ini", "[run]\nvariants = rescaled, fancy\n")
    with pytest.raises(InputError):
        load_spec(spec)


def test_bound_passes(tmp_path, quad_spec, capsys):
    out = tmp_path / "o"
    assert main(["bound", "--spec", quad_spec, "--out", str(out), "--k-max", "100"]) == 0
    rows = read_csv(out / "bound.csv")
    assert rows[0] == ["k", "observed_error", "rpga_bound", "wrpga_bound"]
    assert len(rows) == 100
    for _, obs, rb, _ in rows[1:]:
        assert float(obs) <= float(rb) * (1 + 1e-9)
    assert json.loads(capsys.readouterr().out)["status"] == "pass"


def test_bound_k_max_one_is_skipped(tmp_path, quad_spec, capsys):
    assert main(["bound", "--spec", quad_spec, "--out", str(tmp_path / "o"), "--k-max", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "skipped"
    assert len(read_csv(tmp_path / "o" / "bound.csv")) == 1


def test_bound_unknown_minimum_is_skipped(tmp_path, capsys):
    # a linear objective has no minimizer; its zero curvature needs an explicit alpha
    spec = write_spec(tmp_path / "s.ini", "[objective]\nsource = builtin:linear\n[run]\nalpha = 1\n")
    assert main(["bound", "--spec", spec, "--out", str(tmp_path / "o"), "--k-max", "10"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "skipped"


def test_bound_rejects_undersized_mu(tmp_path, capsys):
    spec = write_spec(tmp_path / "s.ini", """
[objective]
source = builtin:quadratic
[run]
mu = 3
m_zero = 16
us_radius = 1
alpha = 2
""")
    # floor is M0 * M**(1-q) / alpha = 8, so mu = 3 is rejected before any run
    assert main(["bound", "--spec", spec, "--out", str(tmp_path / "o")]) == 2
    assert "violates" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_bound_svg(tmp_path, quad_spec, capsys):
    pytest.importorskip("matplotlib")
    out = tmp_path / "o"
    assert main(["bound", "--spec", quad_spec, "--out", str(out), "--k-max", "30", "--svg"]) == 0
    assert (out / "bound.svg").read_text().lstrip().startswith("<?xml")


def test_mu_scan(tmp_path, quad_spec, capsys):
    out = tmp_path / "o"
    assert main(["mu-scan", "--spec", quad_spec, "--out", str(out), "--k-max", "80"]) == 0
    rows = read_csv(out / "mu_scan.csv")
    assert rows[0] == ["mu", "final_error", "slope", "best"]
    assert [float(r[0]) for r in rows[1:]] == [1.5, 2.0, 4.0, 8.0]
    assert sum(int(r[3]) for r in rows[1:]) == 1
    best = min(rows[1:], key=lambda r: float(r[1]))
    assert best[3] == "1"


def test_mu_scan_singleton(tmp_path, capsys):
    spec = write_spec(tmp_path / "s.ini", "[scan]\nmu_grid = 3\n")
    assert main(["mu-scan", "--spec", spec, "--out", str(tmp_path / "o"), "--k-max", "20"]) == 0
    rows = read_csv(tmp_path / "o" / "mu_scan.csv")
    assert len(rows) == 2 and rows[1][3] == "1"


def test_mu_scan_rejects_mu_one(tmp_path, capsys):
    spec = write_spec(tmp_path / "s.ini", "[scan]\nmu_grid = 1, 2\n")
    assert main(["mu-scan", "--spec", spec, "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_mu_scan_needs_grid(tmp_path, capsys):
    spec = write_spec(tmp_path / "s.ini", "[objective]\nsource = builtin:quadratic\n")
    assert main(["mu-scan", "--spec", spec, "--out", str(tmp_path / "o")]) == 2


def test_estimate_identity(tmp_path, capsys):
    ob.save_objective(ob.QuadraticObjective(np.eye(3), [1.0, 0.0, 2.0]), tmp_path / "eye.txt")
    spec = write_spec(tmp_path / "s.ini", "[objective]\nsource = eye.txt\n[estimate]\nsamples = 2000\n")
    assert main(["estimate", "--spec", spec]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert 0.9 < rep["alpha_estimate"] <= 1.0 + 1e-9
    for row in rep["moduli"]:
        assert row["rho"] == pytest.approx(row["u"] ** 2, rel=0.1)
        assert row["lower_ok"] and row["upper_ok"]


def test_estimate_linear_unbounded(tmp_path, capsys):
    spec = write_spec(tmp_path / "s.ini", "[objective]\nsource = builtin:linear\n[estimate]\nsamples = 500\n")
    assert main(["estimate", "--spec", spec]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["level_set"] == "unbounded" and rep["m_zero_estimate"] is None


def test_estimate_logistic_below_analytic(tmp_path, capsys):
    spec = write_spec(tmp_path / "s.ini", "[objective]\nsource = builtin:logistic\n[estimate]\nsamples = 2000\n")
    assert main(["estimate", "--spec", spec]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["alpha_estimate"] <= rep["alpha_analytic"] * (1 + 1e-9)


def test_rerun_is_bit_identical(tmp_path, quad_spec, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, a, b):
        assert main(["run", "--spec", quad_spec, "--out", str(out), "--k-max", "50", "--seed", "7"]) == 0
    for name in ("trace_rescaled.csv", "trace_no_rescale_baseline.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_seed_flag_changes_instance(tmp_path, quad_spec, capsys):
    for seed in ("1", "2"):
        main(["run", "--spec", quad_spec, "--out", str(tmp_path / seed), "--k-max", "5", "--seed", seed])
    assert (tmp_path / "1" / "trace_rescaled.csv").read_bytes() != (tmp_path / "2" / "trace_rescaled.csv").read_bytes()
