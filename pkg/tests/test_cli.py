import csv
import io
import json

import numpy as np
import pytest

from capbound.channels import QuantumChannel, write_channel
from capbound.cli import main
from capbound.sweep import HEADER, SweepRow, p_grid, rows_to_csv, rows_to_json, run_sweep

FAST = ["--grid", "16x32x32", "--restarts", "4"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound_damping_is_certified_and_nontrivial(capsys):
    code, out, _ = run(capsys, "bound", "--channel", "amplitude-damping:0.25", "--meas", "fig2-x3")
    assert code == 0
    fields = dict(line.split(None, 1) for line in out.strip().splitlines())
    assert float(fields["value"]) < 1.0
    assert fields["certified"] == "yes"
    assert fields["kind"] == "CertifiedUpperBound"


def test_bound_identity_trivial_measurement(capsys):
    code, out, _ = run(capsys, "bound", "--channel", "identity:2", "--meas", "trivial", "--json", *FAST)
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(1.0, abs=1e-9)


def test_bound_simple_form(capsys):
    code, out, _ = run(capsys, "bound", "--channel", "amplitude-damping:0", "--meas", "fig2-x4", "--form", "simple", "--json", *FAST)
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == pytest.approx(1.0, abs=1e-6)
    assert doc["diagnostics"]["form"] == "simple"


def test_bound_invalid_channel_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"d_in": 2, "d_out": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [0.9, 0]]]]}))
    code, _, err = run(capsys, "bound", "--channel", str(bad), "--meas", "trivial")
    assert code == 2
    assert "residual" in err


def test_bound_io_and_parse_errors_exit_1(capsys, tmp_path):
    code, _, _ = run(capsys, "bound", "--channel", str(tmp_path / "missing.json"), "--meas", "trivial")
    assert code == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    code, _, err = run(capsys, "bound", "--channel", str(broken), "--meas", "trivial")
    assert code == 1 and "line 1" in err


def test_bound_measurement_mismatch_exits_2(capsys):
    code, _, _ = run(capsys, "bound", "--channel", "depolarizing:0.2", "--meas", "fig2-x3", *FAST)
    assert code == 2


def test_bound_measurement_file(capsys, tmp_path):
    from capbound.channels import write_measurement
    from capbound.measures import fig2_measurement

    path = tmp_path / "m.json"
    write_measurement(fig2_measurement(3), path)
    code, out, _ = run(capsys, "bound", "--channel", "amplitude-damping:0", "--meas", str(path), "--json", *FAST)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.0, abs=1e-6)


def test_sweep_csv_schema_and_determinism(capsys, tmp_path):
    args = ["sweep", "--p-from", "0", "--p-to", "0.5", "--steps", "3", "--seed", "7", *FAST]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.splitlines()[0] == "p,s_max,c_arrow_min,c_bound,chi_lower,q1_lower,cea,certified"
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [float(r["p"]) for r in rows] == [0.0, 0.25, 0.5]
    assert float(rows[0]["c_bound"]) == pytest.approx(1.0, abs=1e-6)
    for r in rows:
        assert float(r["chi_lower"]) <= float(r["c_bound"]) + 1e-6
        assert float(r["c_bound"]) == pytest.approx(float(r["s_max"]) - float(r["c_arrow_min"]), abs=1e-8)
        assert r["certified"] == "true"


def test_sweep_json(capsys, tmp_path):
    out = tmp_path / "s.json"
    assert main(["sweep", "--steps", "2", "--format", "json", "--out", str(out), *FAST]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["steps"] == 2 and doc["config"]["grid"] == [16, 32, 32]
    assert [r["p"] for r in doc["rows"]] == [0.0, 0.5]
    assert set(doc["rows"][0]) == set(HEADER)


def test_sweep_unwritable_path_exits_1(capsys, tmp_path):
    code, _, _ = run(capsys, "sweep", "--steps", "2", "--out", str(tmp_path / "no" / "such" / "dir.csv"), *FAST)
    assert code == 1


def test_sweep_bad_range_exits_2(capsys):
    assert run(capsys, "sweep", "--p-from", "0.6", "--p-to", "0.2")[0] == 2
    assert run(capsys, "sweep", "--steps", "1")[0] == 2


def test_p_grid_and_rows():
    assert np.allclose(p_grid(0, 0.5, 11)[[0, -1]], [0, 0.5])
    with pytest.raises(ValueError):
        p_grid(0.2, 1.5, 3)
    row = SweepRow(0.1, 1.0, 0.1234567891234, 0.8765432108766, 0.5, 0.25, 1.5, True)
    line = rows_to_csv([row]).splitlines()[1]
    assert line == "0.1,1,0.123456789,0.876543211,0.5,0.25,1.5,true"
    assert json.loads(rows_to_json([row], {"x": 1}))["rows"][0]["c_bound"] == 0.876543211


def test_sweep_parallel_matches_serial():
    from capbound.optimize import OptimizerConfig

    cfg = OptimizerConfig(restarts=3, grid=(12, 24, 24))
    serial = run_sweep("amplitude-damping", [0.1, 0.3], "fig2-x3", cfg)
    parallel = run_sweep("amplitude-damping", [0.1, 0.3], "fig2-x3", cfg, workers=2)
    assert rows_to_csv(serial) == rows_to_csv(parallel)


@pytest.mark.parametrize(
    "channel, which, code",
    [
        ("amplitude-damping:0.25", "classical", 3),
        ("identity:2", "classical", 0),
        ("amplitude-damping:0.25", "quantum", 3),
        ("identity:2", "quantum", 0),
    ],
)
def test_certify_exit_codes(capsys, channel, which, code):
    got, out, _ = run(capsys, "certify", "--channel", channel, "--which", which, *FAST)
    assert got == code
    assert "ppt_witness" in out and "optimal_state" in out


def test_certify_indeterminate_for_qutrit_dephasing(capsys, tmp_path):
    # full qutrit dephasing: separable but PPT is not conclusive in 3x3
    K = np.zeros((3, 3, 3))
    for i in range(3):
        K[i, i, i] = 1
    path = tmp_path / "deph3.json"
    write_channel(QuantumChannel(K, "dephasing3"), path)
    got, out, _ = run(capsys, "certify", "--channel", str(path), *FAST)
    assert got == 4
    assert "Indeterminate" in out


def test_selftest_negative_control(capsys):
    code, out, _ = run(capsys, "selftest", "--trials", "1", "--tolerance", "1e-15", "--restarts", "4")
    assert code != 0
    assert "FAIL" in out
