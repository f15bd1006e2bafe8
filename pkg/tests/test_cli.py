"""
Command line: exit codes, report files and byte-identical reruns.
"""
import json

import pytest

from main import build_parser, run
from ui_modules.cli_backend import RunConfig, describe_expr
from dc_modules.convex_core import CvarEnvelope, constant
from dc_modules.errors import ArgumentError, InputFormatError
from dc_modules.suite import run_verify_suite, with_tolerance
from dc_modules.verification import CheckReport


def run_report(args, out):
    code = run(args + ["--out", str(out)])
    return code, json.loads(out.read_text(encoding="utf-8")) if out.exists() else None


class TestRunConfig:
    def test_defaults_from_settings(self, tmp_path):
        settings = tmp_path / "settings.json"
        settings.write_text(json.dumps({"run": {"seed": 11, "output_dir": str(tmp_path)}}), encoding="utf-8")
        args = build_parser().parse_args(["verify-suite", "--tol", "1e-3"])
        cfg = RunConfig.from_args(args, settings)
        assert cfg.seed == 11
        assert cfg.out_path == tmp_path / "verify_suite_report.json"
        assert set(cfg.tolerances.values()) == {1e-3}
        assert cfg.tol_override == 1e-3 and cfg.samples_override is None

    def test_rejects_missing_file_and_bad_seed(self, tmp_path):
        with pytest.raises(InputFormatError):
            RunConfig("risk", input_path=tmp_path / "none.json")
        with pytest.raises(InputFormatError):
            RunConfig("risk", seed=-1)

    def test_describe_unserializable_node(self):
        env = CvarEnvelope(0.5, [1.0], [constant(1)], [constant(1)])
        assert describe_expr(env)["kind"] == env.kind


class TestCommands:
    def test_risk_cvar(self, samples_dir, tmp_path):
        code, report = run_report(["risk", "--in", str(samples_dir / "scenarios.json"),
                                   "--measure", "cvar:0.5", "--verify"], tmp_path / "risk.json")
        assert code == 0 and report["status"] == "ok"
        assert report["values"] == pytest.approx([1.0, 1.0, 1.0])
        assert {c["check"] for c in report["checks"]} == {"oracle_match", "convexity_g", "convexity_h"}

    def test_risk_minimal_scenario_file(self, tmp_path):
        scen = tmp_path / "two_point.json"
        scen.write_text(json.dumps({
            "p": [0.5, 0.5],
            "scenarios": [{"pExpr": {"kind": "affine", "a": [0.0], "c": 0.0}},
                          {"pExpr": {"kind": "affine", "a": [0.0], "c": 1.0}}],
            "domain": {"kind": "box", "lower": [0.0], "upper": [1.0]},
        }), encoding="utf-8")
        code, report = run_report(["risk", "--in", str(scen), "--measure", "cvar:0.5"], tmp_path / "r.json")
        assert code == 0
        assert report["values"] == pytest.approx([1.0] * len(report["values"]))

    def test_risk_quadratic_variance(self, samples_dir, tmp_path):
        code, report = run_report(["risk", "--in", str(samples_dir / "scenarios_quadratic.json"),
                                   "--measure", "variance"], tmp_path / "var.json")
        assert code == 0 and report["summary"]["scenarios"] == 3

    def test_qp_grid_with_dc(self, samples_dir, tmp_path):
        code, report = run_report(["qp", "--in", str(samples_dir / "qp.json"), "--query",
                                   str(samples_dir / "grid.json"), "--dc"], tmp_path / "qp.json")
        assert code == 0
        assert report["summary"]["pieces"] == 2
        names = {c["check"] for c in report["checks"]}
        assert {"min_of_pieces", "value_dc_identity", "pd_shortcut_match"} <= names

    def test_qp_points_outside_domain(self, samples_dir, tmp_path):
        code, report = run_report(["qp", "--in", str(samples_dir / "qp_saddle.json"), "--query",
                                   str(samples_dir / "saddle_points.json")], tmp_path / "saddle.json")
        assert code == 0
        inside, outside = report["solutions"]
        assert inside["in_dom"] and inside["value"] == pytest.approx(0.0)
        assert not outside["in_dom"] and outside["descent_ray"] is not None

    def test_recourse(self, samples_dir, tmp_path):
        code, report = run_report(["recourse", "--in", str(samples_dir / "recourse.json"), "--scenario", "1"],
                                  tmp_path / "rec.json")
        assert code == 0 and report["summary"]["scenario"] == 1

    def test_piecewise(self, samples_dir, tmp_path):
        code, report = run_report(["piecewise", "--in", str(samples_dir / "abs_piecewise.json")],
                                  tmp_path / "pw.json")
        assert code == 0
        assert "pwa_identity" in {c["check"] for c in report["checks"]}

    def test_folded(self, tmp_path):
        code, report = run_report(["folded", "--penalty", "fig1b1"], tmp_path / "fold.json")
        assert code == 0
        assert report["summary"]["t_minus"] == -4.0 and report["summary"]["t_plus"] == 4.0

    def test_folded_bare_expression(self, tmp_path):
        code, report = run_report(["folded", "--penalty", "log(1+u)"], tmp_path / "log.json")
        assert code == 0 and report["status"] == "ok"
        assert report["summary"]["t_minus"] == "-inf" and report["summary"]["t_plus"] == "inf"

    def test_folded_not_dc(self, tmp_path):
        code, report = run_report(["folded", "--penalty", "sqrtabs"], tmp_path / "sqrt.json")
        assert code == 1
        assert report["status"] == "error" and report["error"] == "NotDcError"


class TestInputErrors:
    def test_missing_file(self, tmp_path):
        assert run(["risk", "--in", str(tmp_path / "none.json"), "--measure", "cvar:0.5"]) == 2

    def test_invalid_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{", encoding="utf-8")
        assert run(["qp", "--in", str(bad), "--out", str(tmp_path / "r.json")]) == 2

    def test_bad_measure(self, samples_dir, tmp_path):
        args = ["risk", "--in", str(samples_dir / "scenarios.json"), "--measure", "cvar:1.5",
                "--out", str(tmp_path / "r.json")]
        assert run(args) == 2

    def test_usage_errors(self):
        assert run(["risk"]) == 2
        assert run(["unknown-command"]) == 2

    def test_dc_without_region(self, samples_dir, tmp_path):
        args = ["qp", "--in", str(samples_dir / "qp.json"), "--dc", "--out", str(tmp_path / "r.json")]
        assert run(args) == 2


@pytest.mark.slow
class TestSuiteTolerance:
    def test_rejudges_the_same_measurement(self):
        report = CheckReport("gap", 10, 1e-4, 1e-6, False, [0.5], 7)
        loose = with_tolerance(report, 1e-3)
        assert loose.passed and loose.tol == 1e-3
        assert loose.max_violation == report.max_violation and loose.witness == [0.5]
        assert not with_tolerance(loose, 1e-5).passed

    def test_rejects_empty_sample_count(self):
        with pytest.raises(ArgumentError):
            run_verify_suite(samples=0)


@pytest.mark.slow
class TestSuite:
    def test_rerun_is_byte_identical(self, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert run(["verify-suite", "--out", str(first)]) == 0
        assert run(["verify-suite", "--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_overrides_reach_the_suite(self, tmp_path):
        code, report = run_report(["verify-suite", "--samples", "40", "--tol", "1e-3"], tmp_path / "s.json")
        assert code == 0
        checks = {c["check"]: c for c in report["checks"]}
        assert {c["tol"] for c in checks.values()} == {1e-3}
        assert checks["folded_decomposition"]["trials"] == 40
        assert checks["piecewise_min_representation"]["trials"] == 40
