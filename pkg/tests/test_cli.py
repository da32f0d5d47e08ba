import json

import numpy as np
import pytest

from qms.channels import depolarizing_channel, depolarizing_generator, identity_channel
from qms.cli import main
from qms.serialize import channel_to_dict, dumps_json, loads_strict


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, obj in [("depol05", depolarizing_channel(0.5)),
                      ("depol06", depolarizing_channel(0.6)),
                      ("id2", identity_channel(2)),
                      ("gen10", depolarizing_generator(1.0)),
                      ("gen11", depolarizing_generator(1.1))]:
        p = tmp_path / f"{name}.json"
        p.write_text(dumps_json(channel_to_dict(obj)))
        paths[name] = str(p)
    paths["dir"] = tmp_path
    return paths


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr().out
    return code, out


def test_validate_ok(files, capsys):
    code, out = run(["validate", files["depol05"], "--samples", "50"], capsys)
    assert code == 0
    assert "trace_preserving: True" in out


def test_validate_json_format(files, capsys):
    code, out = run(["validate", files["depol05"], "--samples", "50",
                     "--format", "json"], capsys)
    assert code == 0
    doc = loads_strict(out)
    assert doc["validation"]["completely_positive"] is True


def test_analyze_depolarizing(files, capsys):
    code, out = run(["analyze", files["depol05"], "--format", "json"], capsys)
    assert code == 0
    doc = loads_strict(out)
    assert doc["condition_numbers"]["kappa_tau_z"]["value"] == pytest.approx(2.0, abs=1e-9)
    assert doc["condition_numbers"]["spectral_lower"] == pytest.approx(2.0)
    assert doc["spectrum"]["min_dist_to_one"] == pytest.approx(0.5)
    assert doc["violations"] == 0


def test_analyze_json_roundtrip_identity(files, capsys):
    code, out = run(["analyze", files["depol05"], "--format", "json"], capsys)
    assert code == 0
    assert dumps_json(loads_strict(out)) == out


def test_analyze_text_and_json_values_agree(files, capsys):
    _, text = run(["analyze", files["depol05"]], capsys)
    _, js = run(["analyze", files["depol05"], "--format", "json"], capsys)
    doc = loads_strict(js)
    kappa = doc["condition_numbers"]["kappa_tau_z"]["value"]
    line = next(l for l in text.splitlines() if "kappa = tau(Z)" in l)
    printed = float(line.split(":")[1])
    assert printed == pytest.approx(kappa, rel=1e-12)


def test_compare_depolarizing_pair(files, capsys):
    code, out = run(["compare", files["depol05"], files["depol06"],
                     "--state", "maximally-mixed", "--restarts", "8",
                     "--format", "json"], capsys)
    assert code == 0
    doc = loads_strict(out)
    assert doc["result"]["bound_value"] == pytest.approx(0.2, abs=1e-6)
    assert doc["result"]["identity_residual"] <= 1e-8


def test_trajectory_csv(files, capsys):
    code, out = run(["trajectory", files["depol05"], files["depol06"],
                     "--steps", "10", "--pair", "auto-chi2", "--state",
                     "maximally-mixed", "--format", "csv"], capsys)
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0].startswith("instance,n_or_t,exact,bound,slack")
    assert len(lines) == 12  # header + n = 0..10


def test_trajectory_user_pair_and_eq10(files, capsys):
    code, _ = run(["trajectory", files["depol05"], files["depol06"],
                   "--steps", "5", "--pair", "1.0:0.5", "--format", "csv"], capsys)
    assert code == 0
    code, _ = run(["trajectory", files["depol05"], files["depol06"],
                   "--steps", "5", "--pair", "auto-eq10:0.6", "--format", "csv"],
                  capsys)
    assert code == 0


def test_trajectory_continuous(files, capsys):
    code, out = run(["trajectory", files["gen10"], files["gen11"],
                     "--steps", "20", "--t-max", "5", "--format", "csv"], capsys)
    assert code == 0
    assert len(out.strip().split("\n")) == 21


def test_trajectory_mixed_inputs_is_usage_error(files, capsys):
    code, _ = run(["trajectory", files["depol05"], files["gen10"]], capsys)
    assert code == 2


def test_pairs_command(files, capsys):
    code, out = run(["pairs", files["depol05"], "--format", "json"], capsys)
    assert code == 0
    doc = loads_strict(out)
    assert doc["pairs"]["chi2"]["K"] == pytest.approx(1.0, abs=1e-9)
    assert doc["pairs"]["detailed_balance"]["K"] == pytest.approx(
        2 * np.sqrt(2), abs=1e-9)
    assert doc["pairs"]["spectral_eq10"]["valid"] is True


def test_pairs_reports_inapplicable_recipes(files, capsys):
    code, out = run(["pairs", files["id2"], "--format", "json"], capsys)
    assert code == 0
    doc = loads_strict(out)
    assert "error" in doc["pairs"]["chi2"]


def test_ensemble_determinism(files, capsys, tmp_path):
    args = ["ensemble", "--dim", "2", "--count", "3", "--eps", "1e-2",
            "--seed", "11", "--steps", "10", "--restarts", "4",
            "--format", "csv"]
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_determinism_json_commands(files, capsys):
    _, a = run(["analyze", files["depol06"], "--format", "json",
                "--seed", "3"], capsys)
    _, b = run(["analyze", files["depol06"], "--format", "json",
                "--seed", "3"], capsys)
    assert a == b


def test_exit_code_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 2, "representation": "superoperator", "data": []}')
    code = main(["analyze", str(bad)])
    capsys.readouterr()
    assert code == 2


def test_exit_code_missing_file(capsys):
    code = main(["analyze", "/nonexistent/channel.json"])
    capsys.readouterr()
    assert code == 2


def test_exit_code_usage(capsys):
    code = main(["frobnicate"])
    capsys.readouterr()
    assert code == 2


def test_exit_code_violation_from_noncp_input(tmp_path, capsys):
    # transpose map: TP but not CP -> validate reports and exits 1
    d = 2
    m = np.zeros((4, 4))
    for i in range(d):
        for j in range(d):
            m[j * d + i, i * d + j] = 1.0
    doc = {"dim": 2, "representation": "superoperator",
           "data": [[[float(x), 0.0] for x in row] for row in m]}
    p = tmp_path / "transpose.json"
    p.write_text(json.dumps(doc))
    code = main(["validate", str(p), "--samples", "50"])
    capsys.readouterr()
    assert code == 1


def test_exit_code_numeric_failure(tmp_path, capsys):
    # an anti-dissipative "generator" blows up under exponentiation
    m = -200.0 * (np.outer([0.5, 0, 0, 0.5], [1, 0, 0, 1]) - np.eye(4))
    doc = {"dim": 2, "representation": "generator",
           "data": [[[float(x), 0.0] for x in row] for row in m]}
    p1 = tmp_path / "blowup.json"
    p1.write_text(json.dumps(doc))
    p2 = tmp_path / "blowup2.json"
    doc2 = {"dim": 2, "representation": "generator",
            "data": [[[float(x) * 1.01, 0.0] for x in row] for row in m]}
    p2.write_text(json.dumps(doc2))
    code = main(["trajectory", str(p1), str(p2), "--steps", "10",
                 "--t-max", "50", "--pair", "2.0:0.1"])
    capsys.readouterr()
    assert code == 3


def test_state_file_flag(files, tmp_path, capsys):
    from qms.channels import basis_state
    from qms.serialize import state_to_dict
    sp = tmp_path / "ground.json"
    sp.write_text(dumps_json(state_to_dict(basis_state(2, 0))))
    code, out = run(["trajectory", files["depol05"], files["depol06"],
                     "--steps", "5", "--state", f"file:{sp}",
                     "--format", "json"], capsys)
    assert code == 0
    doc = loads_strict(out)
    assert doc["rows"][1]["exact"] == pytest.approx(0.1, abs=1e-9)


def test_out_flag_writes_file(files, tmp_path, capsys):
    target = tmp_path / "report.json"
    code = main(["analyze", files["depol05"], "--format", "json",
                 "--out", str(target)])
    capsys.readouterr()
    assert code == 0
    doc = loads_strict(target.read_text())
    assert doc["dim"] == 2
