"""Tests for the report schema."""

import math

import pytest

from markov_embed import catalog
from markov_embed.config import AnalysisConfig
from markov_embed.main import analyze_matrix
from markov_embed.models import AnalysisReport, CheckReport, ComplexValue, round_significant
from markov_embed.checks import CheckResult


class TestRounding:
    def test_twelve_significant_digits(self):
        assert round_significant(math.pi) == 3.14159265359
        assert round_significant(1.0 / 3.0 * 1e-20) == 3.33333333333e-21

    def test_non_finite_becomes_null(self):
        assert round_significant(math.inf) is None
        assert round_significant(math.nan) is None
        assert round_significant(None) is None

    def test_idempotent(self):
        value = round_significant(2.0 / 7.0)
        assert round_significant(value) == value


class TestModels:
    def test_complex_value(self):
        value = ComplexValue.of(complex(1.0, -2.0 / 3.0))
        assert value.re == 1.0
        assert value.im == -0.666666666667

    def test_unconstrained_margin_serializes_as_null(self):
        report = CheckReport.from_result(CheckResult(name="elfving", passed=True, margin=math.inf))
        assert '"margin":null' in report.model_dump_json()

    def test_certificate_rounded(self):
        result = CheckResult(
            name="det_range", passed=False, margin=-1.0, certificate={"determinant": 1.0 / 3.0}
        )
        assert CheckReport.from_result(result).certificate == {"determinant": 0.333333333333}


class TestAnalysisReport:
    """Serialization round trip of full reports."""

    @pytest.mark.parametrize("name", ["example-one", "twogen", "negative-spectrum", "cyclic-five"])
    def test_json_round_trip(self, name):
        report = analyze_matrix(catalog.get_fixture(name), AnalysisConfig(), source=name)
        text = report.model_dump_json()
        restored = AnalysisReport.model_validate_json(text)
        assert restored == report
        assert restored.model_dump_json() == text

    def test_schema_version(self, example_one):
        report = analyze_matrix(example_one, AnalysisConfig())
        assert report.model_dump()["schema_version"] == 1
        assert report.tool_version
