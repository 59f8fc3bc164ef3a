import json
import math
import subprocess
import sys

import numpy as np
import pytest

from properclock import analytic, cli

HEADER = "dp_over_mc,ptot_over_mc,theta,phi,delta_over_mc,gamma_c_inv,gamma_q_inv"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    lines = text.strip().split("\n")
    return lines[0], np.array([[float(v) for v in line.split(",")] for line in lines[1:]])


@pytest.fixture
def scenario_file(tmp_path):
    def write(doc):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        return str(path)
    return write


NATURAL = {
    "units": "natural",
    "sigma": 1.0,
    "clock_a": {"pbar": 0.1, "delta": 0.01},
    "clock_b": {"pbar": 0.0, "delta": 0.01},
}


def test_parse_number_and_grid():
    assert cli.parse_number("pi/8") == pytest.approx(math.pi / 8)
    assert cli.parse_number("3*pi/4") == pytest.approx(3 * math.pi / 4)
    assert cli.parse_number("-2.5e-3") == -2.5e-3
    assert cli.parse_grid("0:1:3").tolist() == [0.0, 0.5, 1.0]
    for bad in ("0:1:1", "1:0:5", "0:1", "a:1:3", "0:1:x"):
        with pytest.raises(cli.InputError):
            cli.parse_grid(bad)


def test_sweep_header_and_stability(capsys):
    argv = ("sweep", "--axis", "dp", "--grid", "0.001:0.1:50", "--ptot", "0,0.05")
    code, out1, err = run(capsys, *argv)
    assert code == 0
    header, rows = _rows(out1)
    assert header == HEADER
    assert rows.shape == (100, 7)
    assert "\r" not in out1
    _, out2, _ = run(capsys, *argv)
    assert out1 == out2
    optima = json.loads(err)["optima"]
    assert [o["ptot_over_mc"] for o in optima] == [0.0, 0.05]


def test_sweep_rejects_single_point_grid(capsys):
    code, _, err = run(capsys, "sweep", "--grid", "0:1:1")
    assert code == 2 and "at least 2" in err


def test_theta_sweep_at_rest_total_momentum(capsys):
    code, out, err = run(capsys, "sweep", "--axis", "theta", "--grid", "0:pi/2:101", "--ptot", "0", "--dp", "0.17")
    _, rows = _rows(out)
    gq = rows[:, 6]
    step = math.pi / 200
    assert np.all(gq >= 0)
    assert abs(rows[np.argmax(gq), 2] - math.pi / 4) <= step


def test_json_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--grid", "0.01:0.02:3", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 3 and set(doc["rows"][0]) == set(HEADER.split(","))


def test_pdist_engines_agree(capsys, scenario_file):
    doc = dict(NATURAL, sigma=1e4)
    path = scenario_file(doc)
    outs = {}
    for engine in ("analytic", "quadrature"):
        code, out, _ = run(capsys, "pdist", "--scenario", path, "--engine", engine, "--tau-b", "20000", "--grid", "0:40000:9")
        assert code == 0
        outs[engine] = _rows(out)[1]
    assert np.abs(outs["analytic"][:, 1] - outs["quadrature"][:, 1]).max() <= 1e-6 / 1e4


def test_pdist_moments_row(capsys, scenario_file):
    path = scenario_file(NATURAL)
    k = (0.01 / 2 + 1e-4 / 4) - 1e-4 / 4
    code, out, _ = run(capsys, "pdist", "--scenario", path, "--tau-b", "0", "--grid=-10:10:4001", "--moments")
    last = out.strip().split("\n")[-1]
    assert last.startswith("mean=") and ",variance=" in last
    mean = float(last.split(",")[0].split("=")[1])
    var = float(last.split(",")[1].split("=")[1])
    assert abs(mean) <= 1e-12
    assert var == pytest.approx(analytic.variance_tau(1.0, k, 0.0), rel=1e-8)
    code, out, _ = run(capsys, "pdist", "--scenario", path, "--tau-b", "2", "--grid=-8:12:4001", "--moments")
    mean = float(out.strip().split("\n")[-1].split(",")[0].split("=")[1])
    assert mean == pytest.approx(analytic.mean_tau(2.0, 1.0, k, 0.0), rel=1e-8)


def test_pdist_equal_energies_is_gaussian(capsys, scenario_file):
    doc = dict(NATURAL, clock_a={"pbar": 0.0, "delta": 0.01})
    code, out, _ = run(capsys, "pdist", "--scenario", scenario_file(doc), "--tau-b", "1.5", "--grid=-8:11:2001", "--moments")
    lines = out.strip().split("\n")
    grid = np.array([[float(v) for v in line.split(",")] for line in lines[1:-1]])
    gauss = np.exp(-((grid[:, 0] - 1.5) ** 2) / 2) / math.sqrt(2 * math.pi)
    assert np.allclose(grid[:, 1], gauss, rtol=1e-15)
    assert float(lines[-1].split(",")[0].split("=")[1]) == pytest.approx(1.5, rel=1e-12)


def test_pdist_si_scenario(capsys, scenario_file):
    m = 1.4e-25
    doc = {
        "units": "si", "mass_kg": m, "sigma": 1e-14,
        "clock_a": {"pbar": m * 5.0, "delta": 1e-27}, "clock_b": {"pbar": 0.0, "delta": 1e-27},
    }
    code, out, _ = run(capsys, "pdist", "--scenario", scenario_file(doc), "--tau-b", "1e-13", "--grid", "5e-14:1.5e-13:201", "--moments")
    assert code == 0
    last = out.strip().split("\n")[-1]
    mean = float(last.split(",")[0].split("=")[1])
    assert mean == pytest.approx(1e-13, rel=1e-9)


def test_pdist_nonperturbative_small_sigma_is_numeric_failure(capsys, scenario_file):
    code, _, err = run(capsys, "pdist", "--scenario", scenario_file(NATURAL), "--engine", "nonperturbative", "--grid=-3:3:5")
    assert code == 3 and "rest mass" in err


def test_bad_scenario_exit_code(capsys, scenario_file):
    code, _, err = run(capsys, "pdist", "--scenario", scenario_file(dict(NATURAL, bogus=1)), "--grid=-1:1:3")
    assert code == 2
    code, _, _ = run(capsys, "pdist", "--scenario", "/nonexistent.json", "--grid=-1:1:3")
    assert code == 2


def test_estimate_preset_fields(capsys):
    code, out, _ = run(capsys, "estimate", "--preset", "rb87")
    doc = json.loads(out)
    assert code == 0
    assert set(doc) >= {"gamma_q_inv", "gamma_c_inv", "clock_resolution_s", "required_coherence_time_s"}
    assert doc["gamma_c_inv"] == pytest.approx(1.0, abs=1e-15)
    assert doc["required_coherence_time_s"] == pytest.approx(1e-14 / abs(doc["gamma_q_inv"]))


def test_estimate_unbounded_coherence(capsys, scenario_file):
    doc = dict(NATURAL, clock_a={"pbar": 0.01, "pbar_prime": 0.03, "delta": 0.01, "theta": 0.0, "phi": 0.0})
    code, out, _ = run(capsys, "estimate", "--scenario", scenario_file(doc))
    rep = json.loads(out)
    assert rep["gamma_q_inv"] == 0.0
    assert rep["required_coherence_time_s"] is None and rep["coherence_unbounded"]


def test_verify_metrology_and_negative_control(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--suite", "metrology")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert all({"measured", "threshold", "passed"} <= set(c) for c in doc["suites"]["metrology"]["checks"])
    out_path = tmp_path / "report.json"
    code, _, _ = run(capsys, "verify", "--suite", "metrology", "--inject", "mu-miscalibration", "--out", str(out_path))
    doc = json.loads(out_path.read_text())
    assert code == 1
    failed = {c["name"] for c in doc["suites"]["metrology"]["checks"] if not c["passed"]}
    assert "two_level_completeness" in failed


def test_verify_shrunken_window(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "analytic", "--inject", "shrunken-window")
    assert code == 0  # hook only affects the oracle suite


def test_povm_check(capsys):
    code, out, _ = run(capsys, "povm-check", "--model", "two-level", "--omega", "2.0")
    doc = json.loads(out)
    assert code == 0 and doc["mu"] == pytest.approx(2 / math.pi)
    code, _, _ = run(capsys, "povm-check", "--inject", "mu-miscalibration")
    assert code == 1
    code, out, _ = run(capsys, "povm-check", "--model", "ideal", "--resolution", "128")
    assert code == 0


def test_thread_cap_env(capsys, monkeypatch):
    monkeypatch.setenv("PROPERCLOCK_THREADS", "0")
    code, _, err = run(capsys, "povm-check", "--resolution", "64")
    assert code == 2 and "PROPERCLOCK_THREADS" in err
    monkeypatch.setenv("PROPERCLOCK_THREADS", "1")
    assert run(capsys, "povm-check", "--resolution", "64")[0] == 0


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "properclock.cli", "sweep", "--grid", "0.01:0.02:2"],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.startswith(HEADER + "\n")
