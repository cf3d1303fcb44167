"""
End-to-end tests for the blochop command line
"""

import json

import pytest
import yaml

from app import main
from functions.report import CSV_COLUMNS

INTERIOR_TN = {
    "symbols": {"psi1": {"poly": [1.0, 1.0]}, "psi2": {"poly": [0.0, 0.0, 1.0]}, "phi": {"poly": [0.0, 0.5]}},
    "operator": {"kind": "Tn", "n": 1},
    "space": {"kind": "qk", "p": 2.0, "q": 0.0, "kernel": {"power_s": 1.0}},
    "weight": {"alpha": 1.0},
    "grid": {"M": 12, "J": 6, "xi_M": 2},
}


@pytest.fixture
def write_config(tmp_path):
    def write(payload, name="run.yaml"):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(payload))
        return str(path)
    return write


def test_norm_command_writes_a_report(write_config, tmp_path):
    config = write_config({"function": {"poly": [0.0, 1.0]}, "weight": {"alpha": 1.0},
                           "grid": {"M": 12, "max_refinements": 0}})
    out = tmp_path / "report.json"
    assert main(["norm", "--config", config, "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["command"] == "norm"
    assert len(report["config_hash"]) == 64
    assert report["results"]["value"] == pytest.approx(1.0)


def test_reports_are_byte_identical_across_runs(write_config, tmp_path):
    config = write_config(INTERIOR_TN)
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["essnorm", "--config", config, "--out", str(first)]) == 0
    assert main(["essnorm", "--config", config, "--out", str(second), "--workers", "1"]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_essnorm_report_and_csv(write_config, tmp_path, capsys):
    config = write_config(INTERIOR_TN)
    csv_path = tmp_path / "levels.csv"
    assert main(["essnorm", "--config", config, "--csv", str(csv_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"]["verdict"] == "compact"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 3 * 6


def test_command_line_overrides_reach_the_config(write_config, tmp_path):
    config = write_config(INTERIOR_TN)
    out = tmp_path / "report.json"
    assert main(["essnorm", "--config", config, "--out", str(out), "--levels-J", "4", "--seed", "11"]) == 0
    report = json.loads(out.read_text())
    assert report["seed"] == 11
    assert len(report["results"]["levels"]) == 4


def test_check_bounded(write_config, capsys):
    config = write_config({
        "symbols": {"psi1": {"poly": [0.0]}, "psi2": {"poly": [1.0]}, "phi": {"poly": [0.0, 1.0]}},
        "weight": {"alpha": 2.0},
        "grid": {"M": 12},
    })
    assert main(["check-bounded", "--config", config]) == 0
    results = json.loads(capsys.readouterr().out)["results"]
    assert results["suprema"]["bounded"]
    assert results["rho"]["boundary"]
    assert results["weight_normal"]["ok"]
    assert set(results["space_admissible"]) == {"kernel_integrability", "boundary_integrability"}


def test_malformed_config_exits_with_schema_code(write_config):
    config = write_config({"grid": {"M": 12, "bogus": 1}})
    assert main(["norm", "--config", config]) == 2


def test_missing_config_file(tmp_path):
    assert main(["norm", "--config", str(tmp_path / "absent.yaml")]) == 2


def test_non_self_map_exits_with_domain_code(write_config):
    payload = json.loads(json.dumps(INTERIOR_TN))
    payload["symbols"]["phi"] = {"poly": [0.0, 1.5]}
    assert main(["essnorm", "--config", write_config(payload)]) == 3


def test_unpaired_operator_exits_with_pairing_code(write_config):
    payload = json.loads(json.dumps(INTERIOR_TN))
    payload["space"] = {"kind": "hinf"}
    assert main(["essnorm", "--config", write_config(payload)]) == 4


LIGHT_VERIFY = {
    "grid": {"M": 12, "J": 6, "xi_M": 2},
    "verify": {"gammas": [1.0], "ns": [0], "random_configs": 4, "sandwich_configs": 0,
               "rotation_configs": 2, "weight_configs": 2},
}


def test_tampered_certificates_fail_verify(write_config, capsys):
    config = write_config(LIGHT_VERIFY)
    assert main(["verify-paper", "--config", config, "--debug-tamper"]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "verify-paper"
    results = report["results"]
    assert not results["passed"]
    assert not results["certificates"]["passed"]
    assert results["delta_family"]["passed"]
    for name in ("equivalence_band", "rotation_invariance", "weights", "dilation_monitoring"):
        assert results[name]["passed"], name


def test_verify_is_an_alias_of_verify_paper(write_config, capsys):
    assert main(["verify", "--config", write_config(LIGHT_VERIFY), "--debug-tamper"]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "verify-paper"
    assert not report["results"]["certificates"]["passed"]


@pytest.mark.slow
def test_verify_passes_with_defaults(capsys):
    assert main(["verify"]) == 0
    results = json.loads(capsys.readouterr().out)["results"]
    assert results["certificates"]["families"] == 324
    assert results["rotation_invariance"]["configs"] == 20
    assert results["equivalence_band"]["band"] <= 10.0
    assert results["embedding"]["passed"]
