"""
Tests for exact bivariate polynomials
"""

import json
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from tracebound.exact import BigReal
from tracebound.exceptions import InputError
from tracebound.poly import (
    Monomial,
    Poly2,
    check_identity,
    dump,
    eval as eval_big,
    identity_mismatch,
    monomial_name,
    product,
)

X, Y = Poly2.x(), Poly2.y()


class TestConstruction:
    """Term maps and file formats"""

    def test_zero_terms_dropped(self):
        p = Poly2({(1, 0): 1, (0, 1): 0, (2, 2): Fraction(0)})
        assert len(p) == 1
        assert (X - X).is_zero()

    def test_negative_exponent(self):
        with pytest.raises(InputError):
            Poly2({(-1, 0): 1})

    def test_decimal_terms_accumulate(self):
        p = Poly2.from_decimal_terms([(1, 0, "0.5"), (1, 0, "0.25"), (0, 0, "-1")])
        assert p.coeff(1, 0) == Fraction(3, 4)
        assert p.coeff(0, 0) == -1

    def test_symmetric_table(self):
        p = Poly2.symmetric_from_table([(2, 1, "1.5"), (0, 0, "-2")])
        assert p.coeff(2, 1) == p.coeff(1, 2) == Fraction(3, 2)
        assert p == p.swap_xy()

    def test_table_above_diagonal(self):
        with pytest.raises(InputError):
            Poly2.symmetric_from_table([(1, 2, "1")])

    def test_json_round_trip_is_exact(self):
        p = Fraction(1, 3) * X ** 2 * Y - Fraction(-7, 8) * Y + 2
        document = p.to_json()
        assert any(t["coeff"] == "1/3" for t in document["terms"])
        assert Poly2.from_json(json.dumps(document)) == p

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            Poly2.from_json({"terms": [{"dx": 1, "dy": 0, "coeff": "1", "extra": 2}]})

    def test_dump_and_load(self, tmp_path):
        p = X * Y - Fraction(1, 10)
        path = dump(p, tmp_path / "nested" / "p.json")
        assert Poly2.load(path) == p


class TestArithmetic:
    """Ring operations and calculus"""

    def test_binomial(self):
        p = (X + Y) ** 2
        assert p == X ** 2 + 2 * X * Y + Y ** 2
        assert p.degree() == 2

    def test_scalar_mixing(self):
        assert 1 - X == -(X - 1)
        assert (X * Fraction(1, 2)).coeff(1, 0) == Fraction(1, 2)
        assert Poly2.constant(3) == 3

    def test_bad_power(self):
        with pytest.raises(InputError):
            X ** -1

    def test_gradient_and_hessian(self):
        p = X ** 3 * Y + 2 * Y ** 2
        px, py = p.gradient()
        assert px == 3 * X ** 2 * Y
        assert py == X ** 3 + 4 * Y
        pxx, pxy, pyy = p.hessian()
        assert pxx == 6 * X * Y and pxy == 3 * X ** 2 and pyy == 4

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(3)
        h = Fraction(1, 10 ** 6)
        for _ in range(100):
            terms = {}
            for _ in range(int(rng.integers(1, 12))):
                dx, dy = (int(v) for v in rng.integers(0, 5, size=2))
                terms[(dx, dy)] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
            p = Poly2(terms)
            px, py = p.gradient()
            x, y = (Fraction(int(v), 1000) for v in rng.integers(-2000, 2001, size=2))
            dpx = (p.eval_exact(x + h, y) - p.eval_exact(x - h, y)) / (2 * h)
            dpy = (p.eval_exact(x, y + h) - p.eval_exact(x, y - h)) / (2 * h)
            # central differences are exact up to the cubic term, O(h^2)
            assert abs(dpx - px.eval_exact(x, y)) < Fraction(1, 10 ** 6)
            assert abs(dpy - py.eval_exact(x, y)) < Fraction(1, 10 ** 6)

    def test_reflect(self):
        p = X ** 3 + X * Y ** 2 + Y
        assert p.reflect(-1, 1) == -(X ** 3) - X * Y ** 2 + Y
        assert p.reflect(-1, -1) == -(X ** 3) - X * Y ** 2 - Y
        with pytest.raises(InputError):
            p.reflect(2, 1)

    def test_coefficient_bound(self):
        p = X ** 2 - 3 * Y
        assert p.coefficient_bound(Fraction(2), Fraction(2)) == 10

    def test_str(self):
        assert str(Poly2.zero()) == "0"
        assert str(X - Y) == "x - y"


class TestEvaluation:
    """Exact, working-precision and float evaluation agree"""

    p = Fraction(1, 3) * X ** 4 * Y - X * Y ** 2 + Fraction(5, 7)

    def test_exact(self):
        value = self.p.eval_exact(Fraction(1, 2), Fraction(-2))
        assert value == Fraction(1, 3) * Fraction(1, 16) * -2 - Fraction(1, 2) * 4 + Fraction(5, 7)

    def test_dispatch_by_kind(self):
        exact = self.p.evaluate(Fraction(1, 2), Fraction(-2))
        assert isinstance(exact, Fraction)
        assert isinstance(self.p.evaluate(0.5, -2.0), float)
        big = self.p.evaluate(BigReal.of(Fraction(1, 2)), BigReal.of(-2))
        assert isinstance(big, BigReal)
        assert abs(big - exact) < Fraction(1, 10 ** 50)
        assert isinstance(self.p.evaluate(Decimal("0.5"), Decimal("-2")), Decimal)

    def test_eval_big_uses_lower_precision(self):
        value = eval_big(self.p, BigReal.of(1, 30), BigReal.of(1, 60))
        assert value.digits == 30

    def test_array(self):
        xs = np.array([0.0, 0.5, -1.0])
        ys = np.array([1.0, -2.0, 2.0])
        values = self.p.eval_array(xs, ys)
        expected = [self.p.eval_float(x, y) for x, y in zip(xs, ys)]
        assert np.allclose(values, expected, rtol=1e-14, atol=1e-14)


class TestIdentities:
    """Coefficient-wise identity checks"""

    def test_factorisation(self):
        assert check_identity([X - Y, X + Y], X ** 2 - Y ** 2)
        assert product([]) == 1

    def test_first_mismatch(self):
        mismatch = identity_mismatch([X - Y, X + Y], X ** 2 + Y ** 2)
        assert mismatch == (Monomial(0, 2), Fraction(-1), Fraction(1))

    def test_monomial_names(self):
        assert monomial_name(0, 0) == "1"
        assert monomial_name(2, 1) == "x^2*y"
        assert monomial_name(2, 3, unicode=True) == "x²y³"
        assert Monomial(0, 4).name() == "y^4"
