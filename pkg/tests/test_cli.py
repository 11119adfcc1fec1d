import json

import pytest

from dyqg.checks import CHECKS, RunConfig
from dyqg.cli import main, parse_complex, parse_weight


def test_list_checks(capsys):
    assert main(["--list-checks"]) == 0
    assert capsys.readouterr().out.split() == list(CHECKS)


def test_no_command_is_a_usage_error(capsys):
    assert main([]) == 2


def test_parsers():
    assert parse_complex("1.5,-2") == 1.5 - 2j
    assert parse_complex("3") == 3
    assert parse_weight("0.5,0.1;0.2,0") == (0.5 + 0.1j, 0.2 + 0j)


def test_verma_depth_zero(tmp_path):
    out, rep = tmp_path / "m.json", tmp_path / "r.json"
    assert main(["verma", "--depth", "0", "--out", str(out), "--report", str(rep)]) == 0
    doc = json.loads(rep.read_text())
    assert doc["blocks"] == 1 and doc["passed"]
    assert json.loads(out.read_text())["module"]


def test_critical_level_is_a_configuration_error(capsys):
    assert main(["verma", "--k=-2,0"]) == 2
    assert "critical level" in capsys.readouterr().err


def test_unknown_check_is_rejected():
    with pytest.raises(SystemExit):
        main(["verify", "--check", "nonsense"])


def test_verify_report_schema(tmp_path):
    rep = tmp_path / "r.json"
    assert main(["verify", "--check", "qdybe", "--seed", "7", "--samples", "2", "--report", str(rep)]) == 0
    doc = json.loads(rep.read_text())
    assert doc["schema_version"] == 1 and doc["command"] == "verify" and doc["seed"] == 7
    assert doc["config_hash"] == RunConfig.from_json(doc["config"]).config_hash()
    (check,) = doc["checks"]
    assert check["check"] == "qdybe" and check["passed"] and check["max_residual"] < 1e-8


def test_failing_check_exits_one(tmp_path):
    assert main(["verify", "--check", "qdybe", "--samples", "1", "--tol", "1e-30"]) == 1


def test_reports_are_reproducible(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        main(["verify", "--check", "periodicity-1", "--check", "unitarity", "--seed", "4", "--report", str(path)])
    a, b = (json.loads(p.read_text()) for p in paths)
    assert a["config_hash"] == b["config_hash"]
    for x, y in zip(a["checks"], b["checks"]):
        assert abs(x["max_residual"] - y["max_residual"]) <= 1e-12


def test_felder_and_gauge_fit_commands():
    assert main(["felder", "--seed", "2"]) == 0
    assert main(["gauge-fit", "--seed", "1"]) == 0


def test_functor_then_tensor(tmp_path):
    a, b, t = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "t.json"
    common = ["--depth", "1", "--k=13.5,0.1", "--samples", "1"]
    assert main(["functor", *common, "--level", "0.5,0.1", "--nu", "0.3,0.1", "--out", str(a)]) == 0
    assert main(["functor", *common, "--level", "0.4,-0.1", "--nu", "0.6,-0.2", "--out", str(b)]) == 0
    assert main(["tensor", "--a", str(a), "--b", str(b), "--out", str(t)]) == 0
    doc = json.loads(t.read_text())
    assert doc["level"] == pytest.approx([0.9, 0.0], abs=1e-12)
    assert all(v["passed"] for v in doc["verification"])


def test_tensor_rejects_mismatched_parameters(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["functor", "--depth", "0", "--k=13.5,0", "--samples", "1", "--out", str(a)]) in (0, 1)
    assert main(["functor", "--depth", "0", "--k=12.5,0", "--samples", "1", "--out", str(b)]) in (0, 1)
    assert main(["tensor", "--a", str(a), "--b", str(b)]) == 2
    assert "different" in capsys.readouterr().err
