import json
import subprocess
import sys

import numpy as np
import pytest

from fracsheet.cli import RunConfig, main, parse_config_text

SMALL_SOLVE = """
grid = 9
paths = 20
comparison_seeds = 2
uniqueness_seeds = 2
ks_paths = 200
krylov_paths = 400
krylov_k = 1
"""


def run(tmp_path, command, text="", *extra):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(text)
    out = tmp_path / "out"
    return main([command, "--config", str(cfg), "--out", str(out), "--quiet", *extra]), out


def test_config_parsing():
    vals = parse_config_text("grid = 17  # odd\nlo = 0.1, 0.2\nN = auto\nrefine = no\n")
    assert vals == {"grid": 17, "lo": (0.1, 0.2), "N": None, "refine": False}
    assert RunConfig(**vals).validate().grid == 17


@pytest.mark.parametrize(
    "text",
    ["grid = 8", "lo = 0.5, 0.5", "mystery = 1", "grid = many", "exponents = 0.2, 0.3, 0.3, 0.2", "drift = exp"],
)
def test_invalid_config_exits_2(tmp_path, text):
    code, _ = run(tmp_path, "simulate", text)
    assert code == 2


def test_equal_pairs_message_names_order(tmp_path, capsys):
    code, _ = run(tmp_path, "solve", "lo = 0.3, 0.3\nhi = 0.3, 0.3")
    assert code == 2
    assert "≺" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["bounds", "--config", str(tmp_path / "nope.cfg"), "--quiet"]) == 2


def test_simulate_zero_paths(tmp_path):
    code, out = run(tmp_path, "simulate", "grid = 5", "--paths", "0")
    assert code == 0
    assert (out / "paths.csv").read_bytes() == b"path_id,i,j,s,t,W,B_lo,B_hi\r\n"
    assert json.loads((out / "summary.json").read_text())["status"] == "skipped"


def test_simulate_reruns_are_byte_identical(tmp_path):
    text = "grid = 9\npaths = 300\ncsv_paths = 2"
    outputs = []
    for k, workers in enumerate(("1", "1", "3")):
        d = tmp_path / str(k)
        d.mkdir()
        code, out = run(d, "simulate", text, "--workers", workers, "--seed", "17")
        assert code in (0, 1)
        outputs.append(((out / "paths.csv").read_bytes(), (out / "summary.json").read_bytes()))
    assert outputs[0] == outputs[1] == outputs[2]


def test_bounds_zero_depth(tmp_path):
    code, out = run(tmp_path, "bounds", "bounds_N = 0")
    doc = json.loads((out / "bounds.json").read_text())
    assert code == 0
    assert len(doc["C"]) == 1 and len(doc["Cstar"]) == 1


def test_bounds_reports_failed_displayed_estimate(tmp_path):
    # the one-sided estimates as displayed fail the randomized check, so the exit code is 1
    code, out = run(tmp_path, "bounds", "bounds_N = 20\nneumann_grid = 33\ntrials = 500")
    doc = json.loads((out / "bounds.json").read_text())
    assert code == 1
    failed = {c["name"] for c in doc["checks"] if c["status"] == "fail"}
    assert failed == {"difference estimate RF1", "difference estimate RF2"}


def test_solve_zero_drift_solution(tmp_path):
    code, out = run(tmp_path, "solve", SMALL_SOLVE + "drift = zero\nx0 = 0.25")
    assert code == 0
    rows = np.loadtxt(out / "solution.csv", delimiter=",", skiprows=1)
    # X = x0 + B_lo + B_hi up to the order of the additions
    np.testing.assert_allclose(rows[:, 4], 0.25 + rows[:, 5] + rows[:, 6], rtol=0, atol=1e-15)
    doc = json.loads((out / "solve.json").read_text())
    assert doc["iterations"] == 1 and doc["status"] == "pass"


def test_girsanov_check_small(tmp_path):
    code, out = run(tmp_path, "girsanov-check", "grid = 9\npaths = 500")
    doc = json.loads((out / "girsanov.json").read_text())
    assert code == 0 and doc["case"] == "a"
    assert abs(doc["E_LT"]["z"]) <= 3.0


def test_nonconvergence_exits_3(tmp_path):
    # too few Krylov paths: the standard error exceeds 10% of the estimate
    code, _ = run(tmp_path, "solve", SMALL_SOLVE.replace("krylov_paths = 400", "krylov_paths = 3") + "krylov_k = 5")
    assert code == 3
    d = tmp_path / "trunc"
    d.mkdir()
    code, _ = run(d, "girsanov-check", "grid = 9\npaths = 10\ntol = 1e-300")
    assert code == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fracsheet.cli", "simulate", "--quiet", "--paths", "0", "--grid", "5", "--out", str(tmp_path)],
        capture_output=True,
        timeout=600,
    )
    assert proc.returncode == 0
    assert (tmp_path / "paths.csv").exists()
