"""
Certification harness: reproducible sampled checks and their report records.
"""
import numpy as np
import pytest

from dc_modules.convex_core import Affine, Domain, MaxOf, QuadForm, constant
from dc_modules.dc_core import DcFunction
from dc_modules.errors import ArgumentError, InputFormatError
from dc_modules.verification import CheckReport, check_convexity, check_dc_identity, check_lc1_bound, merge_reports


class Concave:
    """-x^2 with an eval_batch, for failing convexity checks."""

    def eval_batch(self, X):
        return -X[:, 0] ** 2


class TestConvexity:
    def test_convex_passes(self, line):
        report = check_convexity(QuadForm([[2.0]]), line, trials=200)
        assert report.passed and report.witness is None
        assert report.trials == 200

    def test_concave_fails_with_witness(self, line):
        report = check_convexity(Concave(), line, trials=200)
        assert not report.passed
        x, y = report.witness
        assert len(x) == 1 and len(y) == 1
        assert report.max_violation > report.tol

    def test_plain_callable(self, line):
        assert check_convexity(lambda x: abs(x[0]), line, trials=100).passed

    def test_same_seed_same_report(self, line):
        a = check_convexity(Concave(), line, trials=50, seed=9)
        b = check_convexity(Concave(), line, trials=50, seed=9)
        assert a.to_dict() == b.to_dict()


class TestIdentity:
    def test_abs_value(self, line):
        dc = DcFunction(MaxOf([Affine([1.0]), Affine([-1.0])]), constant(1), line)
        assert check_dc_identity(dc, lambda x: abs(x[0]), samples=100).passed

    def test_mismatch(self, line):
        dc = DcFunction(Affine([1.0]), constant(1), line)
        report = check_dc_identity(dc, lambda x: x[0] + 0.1, samples=50, name="shifted")
        assert not report.passed and report.check == "shifted"
        assert 0.05 < report.max_violation <= 0.1 + 1e-12


class TestLc1:
    def test_needs_pieces(self):
        with pytest.raises(ArgumentError):
            check_lc1_bound([])

    def test_custom_domain(self):
        box = Domain.box([0.0, 0.0], [1.0, 1.0])
        pieces = [(np.eye(2), [0.0, 0.0], 0.0), (-np.eye(2), [1.0, 0.0], 0.0)]
        assert check_lc1_bound(pieces, samples=100, domain=box).passed


class TestReports:
    def test_dict_round_trip(self):
        report = CheckReport("convexity", 10, 0.5, 1e-8, False, [[0.0], [1.0]], 3, {"note": "x"})
        data = report.to_dict()
        assert data["pass"] is False and data["details"] == {"note": "x"}
        assert CheckReport.from_dict(data) == report

    def test_malformed(self):
        with pytest.raises(InputFormatError):
            CheckReport.from_dict({"check": "x"})

    def test_merge_sorted_by_name(self):
        reports = [CheckReport("zeta", 1, 0.0, 1.0, True), CheckReport("alpha", 1, 2.0, 1.0, False)]
        merged = merge_reports(reports)
        assert [c["check"] for c in merged["checks"]] == ["alpha", "zeta"]
        assert merged["pass"] is False
        assert merge_reports([])["pass"] is True
