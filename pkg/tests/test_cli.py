import json
import os

import sympy
from typer.testing import CliRunner

import newform
import verify_log
from newform import app, run
from newform_utils.repcore import format_complex, parse_descriptor
from newform_utils.special import l_factor
from newform_utils.whittaker import whittaker_gl2_closed
from newform_utils.zetaintegrals import ReportPoint, VerificationReport


def _parse_cli_json(output: str):
    first = output.find("{")
    last = output.rfind("}")
    assert first != -1 and last != -1, f"No JSON braces in output:\n{output}"
    return json.loads(output[first:last + 1])


def _parse_cli_list(output: str):
    first = output.find("[")
    last = output.rfind("]")
    assert first != -1 and last != -1, f"No JSON list in output:\n{output}"
    return json.loads(output[first:last + 1])


def test_invariants_of_holomorphic_discrete_series():
    runner = CliRunner()
    result = runner.invoke(app, ["--json", "invariants", "R: D^3 t=0"], catch_exceptions=False)
    assert result.exit_code == 0, result.output
    payload = _parse_cli_json(result.output)
    assert payload["conductor_exponent"] == 3
    assert payload["newform_ktype"] == [3, 0]
    assert payload["epsilon"]["power_of_i"] == 1
    assert payload["epsilon"]["display"] == "i^{-3}"
    assert payload["oldform_dims"]["3"] == 1
    assert payload["descriptor"] == "R: D^3 t=0.0"


def test_invariants_reorders_and_reports_it():
    runner = CliRunner()
    result = runner.invoke(app, ["--json", "invariants", "R: chi^0 t=-0.5 ; chi^1 t=0.5"], catch_exceptions=False)
    payload = _parse_cli_json(result.output)
    assert payload["langlands_ordered_input"] is False
    assert payload["descriptor"].startswith("R: chi^1 t=0.5")


def test_invariants_text_output():
    runner = CliRunner()
    result = runner.invoke(app, ["invariants", "C: chi^2 t=0 ; chi^-1 t=0", "--extra", "2"], catch_exceptions=False)
    assert result.exit_code == 0
    assert "conductor exponent    3" in result.output
    assert "m=  5" in result.output


def test_syntax_errors_exit_with_two():
    runner = CliRunner()
    result = runner.invoke(app, ["invariants", "R: chi^1 t=0 ;"], catch_exceptions=False)
    assert result.exit_code == 2
    assert "DescriptorSyntaxError" in result.output
    result = runner.invoke(app, ["invariants", "R: chi^2 t=0"], catch_exceptions=False)
    assert result.exit_code == 2
    assert "DomainError" in result.output


def test_zonal_command():
    runner = CliRunner()
    result = runner.invoke(app, ["zonal", "R", "2", "2"], catch_exceptions=False)
    assert result.exit_code == 0
    x1, x2 = sympy.symbols("x1 x2")
    assert sympy.expand(sympy.sympify(result.output.strip()) - (x2 ** 2 - x1 ** 2)) == 0
    result = runner.invoke(app, ["--json", "zonal", "C", "2", "1", "1", "--eval", "0,1"], catch_exceptions=False)
    payload = _parse_cli_json(result.output)
    assert payload["degrees"] == [1, 1]
    assert abs(complex(payload["value"].replace("i", "j")) - 1.0) < 1e-12


def test_branch_command():
    runner = CliRunner()
    result = runner.invoke(app, ["--json", "branch", "--weight", "O: 2,0,0"], catch_exceptions=False)
    payload = _parse_cli_json(result.output)
    assert sorted(t["sub_weight"] for t in payload["terms"]) == [[0, 0], [1, 0], [2, 0]]
    result = runner.invoke(app, ["--json", "branch", "R: D^3 t=0", "--max-degree", "5"], catch_exceptions=False)
    payload = _parse_cli_json(result.output)
    assert payload["degrees"]["3"] == [{"ktype": [3, 0], "multiplicity": 1}]
    assert payload["degrees"]["4"] == []
    result = runner.invoke(app, ["branch"])
    assert result.exit_code == 2


def test_lfactor_command():
    runner = CliRunner()
    result = runner.invoke(app, ["--json", "lfactor", "R: chi^0 t=0", "2"], catch_exceptions=False)
    payload = _parse_cli_json(result.output)
    assert payload["value"] == format_complex(complex(l_factor(parse_descriptor("R: chi^0 t=0"), 2.0)))
    assert payload["twist"] is None
    assert payload["epsilon"]["power_of_i"] == 0
    result = runner.invoke(app, ["lfactor", "R: chi^0 t=0", "0"], catch_exceptions=False)
    assert result.exit_code == 2
    assert "PoleError" in result.output


def test_whittaker_command_methods_agree():
    runner = CliRunner()
    rep = parse_descriptor("R: D^3 t=0")
    expected = complex(whittaker_gl2_closed(rep, 0.7))
    result = runner.invoke(app, ["--json", "whittaker", "R: D^3 t=0", "--at", "0.7"], catch_exceptions=False)
    payload = _parse_cli_json(result.output)
    assert payload["method"] == "closed"
    assert abs(complex(payload["value"].replace("i", "j")) - expected) <= 1e-14 * abs(expected)
    result = runner.invoke(app, ["--json", "whittaker", "R: D^3 t=0", "--at", "0.7", "--method", "propagate"],
                           catch_exceptions=False)
    payload = _parse_cli_json(result.output)
    assert payload["method"] == "propagate"
    assert abs(complex(payload["value"].replace("i", "j")) - expected) < 1e-6 * abs(expected) + payload["quad_err"]


def test_verify_only_binom_writes_logs(tmp_path):
    csv_path = tmp_path / "reports.csv"
    json_dir = tmp_path / "reports"
    runner = CliRunner()
    result = runner.invoke(
        app,
        ["--json", "verify", "--only", "binom", "--csv", str(csv_path), "--json-dir", str(json_dir)],
        catch_exceptions=False,
    )
    assert result.exit_code == 0, result.output
    reports = _parse_cli_list(result.output)
    assert [r["identity"] for r in reports] == ["binom"]
    assert reports[0]["verdict"] == "pass"
    assert "seconds" not in reports[0]

    rows = verify_log.read_rows(str(csv_path))
    assert len(rows) == 1 and rows[0]["verdict"] == "pass" and rows[0]["profile"] == "fast"
    dumped = os.listdir(json_dir)
    assert len(dumped) == 1
    with open(json_dir / dumped[0], encoding="utf-8") as f:
        detail = json.load(f)
    assert detail["report"]["identity"] == "binom"
    assert "seconds" in detail["report"]

    summary = runner.invoke(verify_log.app, ["--log-csv", str(csv_path)], catch_exceptions=False)
    assert summary.exit_code == 0
    assert "binom" in summary.output and "pass    1" in summary.output


def test_verify_exits_one_when_a_check_errors(tmp_path, monkeypatch):
    profile = {"checks": [{"identity": "gj", "descriptor": "R: chi^0 t=0", "s_grid": ["-1"]}]}
    (tmp_path / "broken.json").write_text(json.dumps(profile), encoding="utf-8")
    monkeypatch.setattr(newform, "PROFILE_DIR", str(tmp_path))
    runner = CliRunner()
    result = runner.invoke(app, ["verify", "--profile", "broken"], catch_exceptions=False)
    assert result.exit_code == 1
    assert "ConvergenceError" in result.output
    assert "0/1 checks passed" in result.output
    result = runner.invoke(app, ["verify", "--profile", "absent"], catch_exceptions=False)
    assert result.exit_code == 2


def test_fast_profile_passes_end_to_end(tmp_path):
    csv_path = tmp_path / "fast.csv"
    runner = CliRunner()
    result = runner.invoke(app, ["--json", "verify", "--profile", "fast", "--csv", str(csv_path)],
                           catch_exceptions=False)
    reports = _parse_cli_list(result.output)
    not_passing = [(r["label"], r["verdict"], r["message"]) for r in reports if r["verdict"] != "pass"]
    assert not not_passing, not_passing
    assert result.exit_code == 0
    assert len(verify_log.read_rows(str(csv_path))) == len(reports)

    summary = runner.invoke(verify_log.app, ["--log-csv", str(csv_path), "--profile", "fast"],
                            catch_exceptions=False)
    assert summary.exit_code == 0
    for identity in {r["identity"] for r in reports}:
        assert identity in summary.output
    assert "fail    1" not in summary.output and "error    1" not in summary.output


def test_summary_filters_by_profile_and_recency(tmp_path):
    csv_path = str(tmp_path / "mixed.csv")
    passing = VerificationReport("binom", "binom", [], tolerance=1e-6, relative=False,
                                 points=[ReportPoint.of(0, 0)])
    passing.decide()
    failing = VerificationReport("oldform", "oldform_D3", ["R: D^3 t=0"], tolerance=1e-6, relative=False,
                                 points=[ReportPoint.of(1, 0)])
    failing.decide()
    verify_log.write_reports([failing], "slow", log_file=csv_path)
    verify_log.write_reports([passing, passing], "fast", log_file=csv_path)
    runner = CliRunner()

    fast = runner.invoke(verify_log.app, ["--log-csv", csv_path, "--profile", "fast"], catch_exceptions=False)
    assert fast.exit_code == 0
    assert "binom" in fast.output and "pass    2" in fast.output
    assert "oldform" not in fast.output

    everything = runner.invoke(verify_log.app, ["--log-csv", csv_path], catch_exceptions=False)
    assert "oldform" in everything.output and "fail    1" in everything.output
    assert "oldform_D3" in everything.output

    recent = runner.invoke(verify_log.app, ["--log-csv", csv_path, "--last", "1"], catch_exceptions=False)
    assert "pass    1" in recent.output and "oldform" not in recent.output

    missing = runner.invoke(verify_log.app, ["--log-csv", csv_path, "--profile", "nightly"])
    assert missing.exit_code == 1


def test_summary_without_rows(tmp_path):
    runner = CliRunner()
    result = runner.invoke(verify_log.app, ["--log-csv", str(tmp_path / "none.csv")], catch_exceptions=False)
    assert result.exit_code == 1
    assert "no logged reports" in result.output


def test_run_returns_exit_codes():
    assert run(["zonal", "R", "1", "1"]) == 0
    assert run(["invariants", "Q: chi^0 t=0"]) == 2
