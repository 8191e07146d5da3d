"""
Tests for report rendering
"""

import json
from fractions import Fraction

import pytest

from tracebound.certify import HyperplaneReport, Verdict, implied_bound, verify_identity_suite, verify_measure
from tracebound.data import builtin_measure
from tracebound.exact import BigReal
from tracebound.moments import BASIS_A5, target_a, target_b
from tracebound.region import Region
from tracebound.report import (
    ReportGenerator,
    atom_positions,
    constraint_curves,
    moments_table,
    threshold_document,
    to_json,
)
from tracebound.threshold import ThresholdResult, TraceStep


@pytest.fixture
def generator():
    return ReportGenerator(template_dir=None)


@pytest.fixture
def a1_report():
    m = builtin_measure("a1-opt")
    return verify_measure(list(m.atoms), list(m.weights), m.default_region(), target_a())


def _hyperplane_report(verdict=Verdict.VALID):
    half = BigReal.of(Fraction(1, 2))
    return HyperplaneReport(
        name="demo",
        region=Region.make("sum", "geq", -1).describe(),
        basis="A5",
        expectation=Fraction(-3, 100),
        min_estimate=BigReal.of(0),
        min_point=(half, half),
        min_converged=False,
        certified_bound=BigReal.of(Fraction(-1, 1000)),
        achieved_gap=0.001,
        margin=BigReal.of(Fraction(3, 100)),
        verdict=verdict,
        conclusion="no conclusion",
    )


def _threshold_result():
    return ThresholdResult(
        case="a",
        form=Region.make("sum", "geq", 0).constraint.form,
        dir=Region.make("sum", "geq", 0).constraint.dir,
        feasible_bound=Fraction(-3, 4),
        infeasible_bound=Fraction(-5, 8),
        witness=None,
        separator=None,
        separator_expectation=Fraction(-1, 50),
        iterations=3,
        runtime=0.25,
        trace=[TraceStep(Fraction(-3, 4), "feasible", 2), TraceStep(Fraction(-5, 8), "infeasible", 4)],
        implied=implied_bound("sum", "geq", Fraction(-5, 8)),
    )


class TestTables:
    """pandas tables behind the text reports"""

    def test_moments_table(self):
        table = moments_table(target_a())
        assert len(table) == BASIS_A5.dimension
        assert table["value"].tolist() == ["0", "-1", "3", "0", "2"]

    def test_moments_table_ascii_names(self):
        table = moments_table(target_b(), unicode=False)
        assert len(table) == 32
        assert table["feature"].iloc[0] == "x"
        assert table["value"].iloc[-1] == "14"


class TestTextReports:
    """Built-in templates"""

    def test_moments(self, generator):
        text = generator.moments(target_a())
        assert text.startswith("Moment basis A5 (5 features)")

    def test_hyperplane(self, generator):
        text = generator.hyperplane(_hyperplane_report())
        assert "Separating polynomial demo over [-2, 2] x [-2, 2], x+y >= -1 [A5]" in text
        assert "(unpolished)" in text
        assert "verdict          valid" in text

    def test_measure(self, generator, a1_report):
        text = generator.measure(a1_report, BASIS_A5.names)
        assert "weights given" in text
        assert "verdict valid" in text
        assert "problem:" not in text

    def test_measure_problems_listed(self, generator):
        m = builtin_measure("a1-opt")
        report = verify_measure(list(m.atoms), list(m.weights), Region.make("sum", "geq", 0), target_a())
        text = generator.measure(report, BASIS_A5.names)
        assert "problem: atoms outside the region: [2]" in text
        assert "NO" in text

    def test_identities(self, generator):
        text = generator.identities(verify_identity_suite([Fraction(0)]))
        assert text.count("pass  eps=0") == 6
        assert text.endswith("all identities hold\n")

    def test_threshold(self, generator):
        text = generator.threshold(_threshold_result(), files=["out/witness.json"])
        assert "Threshold case A, sum geq" in text
        assert "implies          a1_min <=" in text
        assert "wrote out/witness.json" in text

    def test_bounds(self, generator):
        text = generator.bounds([{"case": "a", "statement": "a1_min <= 2/3", "certificate": "a-sum", "verdict": "valid"}])
        assert "a-sum" in text and "statement" in text

    def test_template_override(self, tmp_path):
        (tmp_path / "identities.txt").write_text("{{ r.checks | length }} checks\n")
        generator = ReportGenerator(template_dir=str(tmp_path))
        assert generator.identities(verify_identity_suite([Fraction(0)])) == "6 checks\n"
        # templates missing from the directory fall back to the built-in ones
        assert generator.moments(target_a()).startswith("Moment basis")


class TestJson:
    """Machine-readable output"""

    def test_measure_report(self, a1_report):
        document = json.loads(to_json(a1_report))
        assert document["verdict"] == "valid"
        assert len(document["weights"]) == 3
        assert document["problems"] == []

    def test_hyperplane_report(self):
        document = json.loads(to_json(_hyperplane_report()))
        assert document["name"] == "demo"
        assert document["min_converged"] is False

    def test_threshold_document(self):
        document = threshold_document(_threshold_result())
        assert document["form"] == "sum"
        assert document["width"] == Fraction(1, 8)
        assert document["implied"] == "a1_min <= -0.625"
        assert document["witness_atoms"] == 0
        assert document["witness_verdict"] is None
        assert [s["status"] for s in document["trace"]] == ["feasible", "infeasible"]
        assert json.loads(to_json(document))["feasible_bound"]["fraction"] == "-3/4"


class TestPlot:
    """SVG scatter of atoms"""

    def test_one_marker_per_atom(self, generator):
        m = builtin_measure("a1-opt")
        svg = generator.plot(list(m.atoms), m.default_region())
        assert svg.startswith("<svg")
        assert svg.count("<circle") == 3
        assert svg.count("<polyline") == 1

    def test_without_region(self, generator):
        svg = generator.plot([(Fraction(0), Fraction(1))])
        assert svg.count("<circle") == 1
        assert "<polyline" not in svg

    def test_symmetric_atom_positions(self):
        m = builtin_measure("a1-opt")
        points = atom_positions(m.atoms)
        assert points[0] == (0.0, 2.0)
        assert points[1] == (-1.5, 2.0)
        s, t = points[2]
        assert s + t == pytest.approx(-2 / 3)

    def test_product_curves(self):
        curves = constraint_curves(Region.make("product", "geq", -1))
        assert len(curves) == 2
        for curve in curves:
            assert all(x * y == pytest.approx(-1) for x, y in curve)
