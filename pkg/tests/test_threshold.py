"""
Tests for the bisection search on region bounds
"""

from fractions import Fraction

import pytest

from tracebound.certify import Verdict, verify_measure
from tracebound.exceptions import InputError, ThresholdError
from tracebound.lp import FarkasCertificate
from tracebound.moments import BASIS_A5, BASIS_B32, expectation, target_a
from tracebound.region import Direction, Form, Region
from tracebound.threshold import (
    FeasibleAt,
    InfeasibleAt,
    ThresholdOptions,
    feasible_at,
    initial_bracket,
    separator_polynomial,
    threshold,
)

QUICK = ThresholdOptions(grid_n=33, verify=False)


class TestHelpers:
    """Brackets and separator construction"""

    def test_initial_bracket(self):
        assert initial_bracket(Form.SUM, Direction.GEQ) == (Fraction(-3999, 1000), Fraction(3999, 1000))
        assert initial_bracket(Form.PRODUCT, Direction.LEQ) == (Fraction(3999, 1000), Fraction(-3999, 1000))

    def test_separator_scaled(self):
        cert = FarkasCertificate(a=[Fraction(2), Fraction(0), Fraction(-1), Fraction(0), Fraction(0)], b=Fraction(1), delta=Fraction(1))
        poly = separator_polynomial(cert, BASIS_A5)
        assert poly.coeff(0, 0) == Fraction(1, 2)
        assert poly.coeff(1, 0) == 1 and poly.coeff(0, 1) == 1
        assert poly.coeff(2, 0) == Fraction(-1, 2)
        assert poly.coeff(1, 1) == 0

    def test_separator_expectation_matches_certificate(self):
        cert = FarkasCertificate(a=[Fraction(1), Fraction(1), Fraction(0), Fraction(0), Fraction(0)], b=Fraction(0), delta=Fraction(1))
        poly = separator_polynomial(cert, BASIS_A5)
        # a . (0, -1, 3, 0, 2) + b
        assert expectation(poly, target_a()) == -1

    def test_separation_tolerance(self):
        assert ThresholdOptions(tol_lp=1e-9).separation_tol == pytest.approx(1e-11)
        assert ThresholdOptions(tol_sep=1e-6).separation_tol == 1e-6

    def test_options_from_config(self):
        from tracebound.config import RunConfig

        opts = ThresholdOptions.from_config(RunConfig(threshold_grid_n=65, max_rounds=7))
        assert opts.grid_n == 65
        assert opts.max_rounds == 7


class TestFeasibility:
    """Single-bound decisions with column generation"""

    def test_box_is_feasible(self):
        outcome = feasible_at("a", Region.box(), QUICK)
        assert isinstance(outcome, FeasibleAt)
        m = outcome.measure
        assert len(m) <= BASIS_A5.dimension + 1
        report = verify_measure(m.atoms, m.weights, Region.box(), target_a())
        assert report.verdict == Verdict.VALID

    def test_separated_region(self):
        r = Region.make("sum", "geq", 0)
        outcome = feasible_at("a", r, QUICK)
        assert isinstance(outcome, InfeasibleAt)
        assert outcome.separator_expectation < 0
        assert outcome.separator_min >= -QUICK.separation_tol

    def test_empty_region(self):
        with pytest.raises(InputError):
            feasible_at("a", Region.make("sum", "geq", 5), QUICK)

    def test_box_is_feasible_case_b(self, box, case_b):
        outcome = feasible_at("b", box, QUICK)
        assert isinstance(outcome, FeasibleAt)
        m = outcome.measure
        assert len(m) <= BASIS_B32.dimension + 1
        report = verify_measure(m.atoms, m.weights, box, case_b, tol=1e-9)
        assert report.verdict == Verdict.VALID

    def test_shifted_region_case_b(self):
        outcome = feasible_at("b", Region.make("sum", "geq", 1), QUICK)
        assert isinstance(outcome, InfeasibleAt)
        assert outcome.separator_expectation < 0

    @pytest.mark.slow
    def test_sum_bound_below_threshold_case_b(self, case_b):
        r = Region.make("sum", "geq", Fraction(-5, 2))
        outcome = feasible_at("b", r, ThresholdOptions(grid_n=65, verify=False))
        assert isinstance(outcome, FeasibleAt)
        report = verify_measure(outcome.measure.atoms, outcome.measure.weights, r, case_b, tol=1e-9)
        assert report.verdict == Verdict.VALID

    @pytest.mark.slow
    def test_sum_bound_above_threshold_case_b(self):
        outcome = feasible_at("b", Region.make("sum", "geq", Fraction(-12, 5)), ThresholdOptions(grid_n=65, verify=False))
        assert isinstance(outcome, InfeasibleAt)
        assert outcome.separator_expectation < 0
        assert outcome.separator_min >= -ThresholdOptions().separation_tol


class TestThreshold:
    """Bisection"""

    def test_bad_tolerance(self):
        with pytest.raises(InputError):
            threshold("a", "sum", "geq", 0)

    def test_bracket_must_straddle(self):
        with pytest.raises(ThresholdError):
            threshold("a", "sum", "geq", 0.1, opts=QUICK, bracket=(Fraction(0), Fraction(1)))

    @pytest.mark.slow
    def test_sum_threshold_generic_case(self):
        result = threshold("a", "sum", "geq", 0.1, opts=ThresholdOptions(grid_n=33))
        assert result.status == "ok"
        assert result.feasible_bound <= Fraction(-2, 3) <= result.infeasible_bound
        assert result.width <= Fraction(1, 10)
        assert result.witness_verdict == Verdict.VALID
        assert result.separator_verdict in (Verdict.VALID, Verdict.VALID_COARSE)
        assert str(result.implied).startswith("a1_min <=")
        assert [step.status for step in result.trace[:2]] == ["feasible", "infeasible"]

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "form,dir,value,quantity",
        [
            ("sum", "geq", Fraction(-2, 3), "a1_min"),
            ("product", "geq", Fraction(-6, 5), "a2_min"),
            ("product", "leq", Fraction(-2, 3), "a2_max"),
        ],
    )
    def test_generic_case_thresholds(self, form, dir, value, quantity):
        result = threshold("a", form, dir, 1e-6, opts=ThresholdOptions(grid_n=33))
        assert result.status == "ok"
        assert result.width <= Fraction(1, 10 ** 6)
        low, high = result.bracket
        assert low <= value <= high
        assert result.witness_verdict == Verdict.VALID
        assert result.separator_verdict in (Verdict.VALID, Verdict.VALID_COARSE)
        assert result.implied.quantity == quantity

    @pytest.mark.slow
    def test_product_threshold_bracket(self):
        result = threshold(
            "a", "product", "leq", 0.05, opts=ThresholdOptions(grid_n=33), bracket=(Fraction(-1, 2), Fraction(-1))
        )
        assert result.feasible_bound >= Fraction(-2, 3) >= result.infeasible_bound
        assert result.implied.quantity == "a2_max"

    @pytest.mark.slow
    def test_sum_threshold_case_b(self):
        result = threshold(
            "b", "sum", "geq", 1e-4, opts=ThresholdOptions(grid_n=65), bracket=(Fraction(-5, 2), Fraction(-12, 5))
        )
        assert result.status == "ok"
        assert result.width <= Fraction(1, 10 ** 4)
        assert result.feasible_bound <= Fraction("-2.4763827913319")
        assert result.infeasible_bound >= Fraction("-2.4763827913320")
        assert result.witness_verdict == Verdict.VALID
        assert result.separator_verdict in (Verdict.VALID, Verdict.VALID_COARSE)

    @pytest.mark.slow
    def test_product_threshold_case_b(self):
        result = threshold(
            "b", "product", "geq", 1e-4, opts=ThresholdOptions(grid_n=65), bracket=(Fraction(-8, 5), Fraction(-31, 20))
        )
        assert result.status == "ok"
        assert result.width <= Fraction(1, 10 ** 4)
        assert result.feasible_bound <= Fraction("-1.57854822")
        assert result.infeasible_bound >= Fraction("-1.57854823")
        assert result.implied.quantity == "a2_min"
