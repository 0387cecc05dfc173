import csv
import json
from fractions import Fraction

import pytest

from hypercube_sos import cli
from hypercube_sos.poly_core import X


def _run(tmp_path, argv, name="report.json"):
    path = tmp_path / name
    code = cli.main([*argv, "--report", str(path)])
    return code, json.loads(path.read_text())


def test_parse_knapsack():
    args = cli.build_parser().parse_args(["knapsack", "--n", "25", "--P", "2", "--m", "6"])
    cfg = cli.config_from_args(args)
    assert cfg.pipeline == "knapsack"
    assert cfg.P == 2
    assert cfg.overrides == {"m": 6}
    assert cfg.precision_bits == 128
    cfg.validate()


def test_parse_setcover_and_suite():
    cfg = cli.config_from_args(cli.build_parser().parse_args(["setcover", "--n", "49", "--pipeline", "appendix"]))
    assert cfg.pipeline == "setcover-appendix"
    cfg = cli.config_from_args(cli.build_parser().parse_args(["suite", "--pipeline", "sqf", "--n", "12", "--k", "3"]))
    assert (cfg.command, cfg.pipeline, cfg.k) == ("suite", "sqf", 3)


def test_rational_flags():
    cfg = cli.config_from_args(cli.build_parser().parse_args(["knapsack", "--n", "9", "--P", "5/2", "--alpha", "1/162"]))
    assert cfg.P == Fraction(5, 2)
    assert cfg.overrides["alpha"] == Fraction(1, 162)


@pytest.mark.parametrize(
    "cfg",
    [
        cli.RunConfig("sqf", "sqf", n=10),
        cli.RunConfig("knapsack", "knapsack", n=10, P=Fraction(1)),
        cli.RunConfig("setcover", "setcover-main", n=5),
        cli.RunConfig("knapsack", "knapsack", n=10, P=Fraction(2), overrides={"e_g": 2}),
        cli.RunConfig("knapsack", "knapsack", n=10, P=Fraction(2), overrides={"m": -2}),
        cli.RunConfig("sqf", "other", n=10, k=2),
        cli.RunConfig("verify"),
    ],
)
def test_validation_rejects(cfg):
    with pytest.raises(ValueError):
        cfg.validate()


def test_missing_k_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["sqf", "--n", "20"])
    assert exc.value.code == 2


def test_precision_from_environment(monkeypatch):
    monkeypatch.setenv(cli.PRECISION_ENV, "96")
    assert cli.default_precision() == 96
    cfg = cli.config_from_args(cli.build_parser().parse_args(["knapsack", "--n", "9", "--P", "2"]))
    assert cfg.precision_bits == 96
    monkeypatch.setenv(cli.PRECISION_ENV, "lots")
    with pytest.raises(SystemExit):
        cli.default_precision()


def test_knapsack_report_schema(tmp_path):
    code, rep = _run(tmp_path, ["knapsack", "--n", "9", "--P", "2"])
    assert code == 0
    assert set(rep) >= {"header", "conditions", "diagnostics", "degrees", "polynomials", "timings", "passed"}
    assert rep["header"]["pipeline"] == "knapsack"
    assert rep["header"]["P"] == "2"
    names = [c["name"] for c in rep["conditions"]]
    assert "s1_at_0_gt_P" in names
    first = rep["conditions"][0]
    assert {"name", "statement", "verdict"} <= set(first)
    assert rep["passed"] is True
    assert all(c["verdict"] == "pass" for c in rep["conditions"])
    assert rep["degrees"]["total"] >= 1


def test_failing_pipeline_sets_exit_status(tmp_path):
    # d = 1 violates the growth premise, so the run reports a failure instead of raising
    code, rep = _run(tmp_path, ["knapsack", "--n", "9", "--P", "2", "--d", "1", "--m", "2"])
    assert code == 1
    assert rep["passed"] is False
    assert any(c["verdict"] == "fail" for c in rep["conditions"])


def test_csv_grid(tmp_path):
    out = tmp_path / "grid.csv"
    code = cli.main(["knapsack", "--n", "9", "--P", "2", "--csv", str(out), "--grid-step", "1", "--report", str(tmp_path / "r.json")])
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0][0] == "x"
    assert len(rows) == 1 + 10
    assert Fraction(rows[3][0]) == 2


def test_verify_replays_identically(tmp_path):
    code, _ = _run(tmp_path, ["knapsack", "--n", "9", "--P", "2", "--replay-data"])
    assert code == 0
    out = tmp_path / "verify.json"
    assert cli.main(["verify", str(tmp_path / "report.json"), "--report", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["replay_identical"] is True
    assert res["sign_replay_mismatches"] == []


def test_verify_detects_tampering(tmp_path):
    _run(tmp_path, ["knapsack", "--n", "9", "--P", "2", "--replay-data"])
    path = tmp_path / "report.json"
    rep = json.loads(path.read_text())
    rep["degrees"]["total"] += 1
    path.write_text(json.dumps(rep))
    ok, res = cli.verify_report(path)
    assert not ok
    assert res["differing_sections"] == ["degrees"]


def test_verify_detects_altered_certificate_polynomial(tmp_path):
    _run(tmp_path, ["knapsack", "--n", "9", "--P", "2", "--replay-data"])
    path = tmp_path / "report.json"
    rep = json.loads(path.read_text())
    item = rep["replay"]["sign_certificates"][0]
    item["poly"] = [str(Fraction(c) - 1000) if i == 0 else c for i, c in enumerate(item["poly"])]
    path.write_text(json.dumps(rep))
    ok, res = cli.verify_report(path)
    assert not ok
    assert res["sign_replay_mismatches"]


def test_sqf_search_report_and_replay(tmp_path):
    code, rep = _run(tmp_path, ["sqf", "--n", "10", "--k", "2"])
    assert code == 0
    names = {c["name"]: c["verdict"] for c in rep["conditions"]}
    assert names["final_check"] == names["integer_levels"] == names["evidence"] == "pass"
    assert all(key in rep["header"]["params"] for key in cli.SQF_KEYS)
    ok, _ = cli.verify_report(tmp_path / "report.json")
    assert ok


def test_sqf_theory_suite(tmp_path):
    code, rep = _run(tmp_path, ["suite", "--pipeline", "sqf", "--n", "12", "--k", "3"])
    assert code == 0
    assert rep["header"]["suite"] is True


def test_poly_digest_is_stable():
    assert cli.poly_digest(X + Fraction(1, 3)) == cli.poly_digest(X + Fraction(2, 6))
    assert cli.poly_digest(X) != cli.poly_digest(X + 1)
