import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from gdrkit.cli import main

LYING_LINES = {
    # the analytic block understates theta, so the predicted rate is too fast
    "name": "lying-lines",
    "sets": [{"type": "hyperplane", "normal": [0, 1], "offset": 0},
             {"type": "hyperplane", "normal": [-np.sin(np.pi / 18), np.cos(np.pi / 18)], "offset": 0}],
    "pairs": [[0, 1]],
    "params": "dr",
    "intersection": {"type": "points", "points": [[0, 0]]},
    "x0": [1, 0],
    "analytic": {"thetas": [0.1], "kappa": 1.01, "pair_kappas": [1.01]},
}


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_run_two_lines(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["run", "--instance", "two-lines-45deg", "--out", str(out)]) == 0
    rep = _report(out)
    assert rep["fitted"]["rate"] == pytest.approx(np.cos(np.pi / 4), abs=0.02)
    assert all(a["passed"] for a in rep["audits"])
    rows = list(csv.reader((out / "trajectory.csv").open()))
    assert rows[0][:5] == ["step", "cycle", "op", "residual", "dC"]
    assert len(rows) == 1 + rep["steps"] + 1
    assert "two-lines-45deg" in capsys.readouterr().out


def test_run_is_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["run", "--instance", "random-convex-pair-s3", "--cycles", "40", "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_run_four_set_shadows_disagree(tmp_path):
    cfg = _write(tmp_path / "c.json", {"instance": "four-set-r3", "x0": [1, 1, 1], "n_cycles": 5})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert _report(tmp_path / "o")["shadow_consensus"]["all_equal"] is False


def test_run_reports_gap_without_intersection(tmp_path):
    assert main(["run", "--instance", "parallel-lines-gap", "--cycles", "30", "--out", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert rep["gap"]["g"] == pytest.approx([0.0, 1.0], abs=1e-12)
    assert rep["fitted_on"] == "residual"


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run", "--instance", "no-such-instance"]) == 2
    assert main(["run"]) == 2
    assert main(["run", "--instance", "two-lines-45deg", "--margin", "-1"]) == 2
    assert main(["predict", "--instance", "anchored-halfspaces"]) == 2
    assert "config error" in capsys.readouterr().err


def test_numerical_abort_exits_3(tmp_path):
    cfg = _write(tmp_path / "c.json", {"instance": "two-lines-45deg", "x0": [1e308, 1e308]})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_predict_examples(tmp_path):
    assert main(["predict", "--instance", "two-lines-45deg", "--out", str(tmp_path / "a")]) == 0
    pred = _report(tmp_path / "a")["prediction"]
    assert pred["admissible"] and pred["rho"] < 1.0
    assert main(["predict", "--instance", "epi-abs-axis", "--out", str(tmp_path / "b")]) == 0
    pred = _report(tmp_path / "b")["prediction"]
    assert pred["admissible"] is False and pred["rho"] >= 1.0


def test_predict_anchored_gives_per_pair_table(tmp_path):
    out = tmp_path / "o"
    assert main(["predict", "--instance", "anchored-halfspaces", "--delta", "2", "--samples", "2000",
                 "--out", str(out)]) == 0
    pred = _report(out)["prediction"]
    assert len(pred["pairs"]) == 2
    for row in pred["pairs"]:
        assert {"theta", "kappa", "nu", "gamma", "beta"} <= set(row)
    assert "sampled" in pred["provenance"]["theta"]
    assert pred["pairs"][1]["theta"] == pytest.approx(np.sqrt(0.5), abs=1e-6)


def test_certify_verdicts(tmp_path, capsys):
    assert main(["certify", "--instance", "perpendicular-hyperplanes", "--out", str(tmp_path / "a")]) == 0
    assert _report(tmp_path / "a")["verdict"] == "PASS"
    assert main(["certify", "--instance", "epi-abs-axis", "--out", str(tmp_path / "b")]) == 0
    rep = _report(tmp_path / "b")
    assert rep["verdict"] == "NOT-APPLICABLE" and rep["reasons"]
    cfg = _write(tmp_path / "c.json", {"instance": LYING_LINES})
    assert main(["certify", "--config", cfg, "--out", str(tmp_path / "c")]) == 4
    rep = _report(tmp_path / "c")
    assert rep["verdict"] == "FAIL"
    assert "FAIL" in capsys.readouterr().out


def test_estimate(tmp_path):
    assert main(["estimate", "--instance", "two-lines-30deg", "--delta", "0.5", "--samples", "500",
                 "--out", str(tmp_path)]) == 0
    rep = _report(tmp_path)
    assert rep["kappa_system"]["is_lower_bound"]
    assert len(rep["eps_delta"]) == 2
    assert main(["estimate", "--instance", "two-lines-30deg"]) == 2


@pytest.mark.parametrize("m,pairs,conn,full", [
    (3, [[0, 1], [1, 2]], True, False),
    (3, [[0, 1], [1, 2], [2, 0]], True, True),
    (4, [[0, 1], [0, 2], [0, 3]], True, True),
    (4, [[0, 1], [2, 3]], False, False),
])
def test_graph(tmp_path, capsys, m, pairs, conn, full):
    cfg = _write(tmp_path / "g.json", {"m": m, "pairs": pairs})
    assert main(["graph", "--config", cfg]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["connected"] is conn and rep["fully_connected"] is full
    assert (rep["witness"] is not None) == full


def test_graph_size_limit_is_a_config_error(tmp_path):
    cfg = _write(tmp_path / "g.json", {"m": 9, "pairs": [[i, i + 1] for i in range(8)]})
    assert main(["graph", "--config", cfg]) == 2


def test_catalog(capsys):
    assert main(["catalog"]) == 0
    out = capsys.readouterr().out
    assert "four-set-r3" in out and "two-lines-<phi>deg" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "gdrkit", "graph", "--instance", "anchored-halfspaces"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and json.loads(r.stdout)["fully_connected"] is True
