"""
Tests for the convex-hull feasibility kernel
"""

from fractions import Fraction

import numpy as np
import pytest

from tracebound.exceptions import InputError, SolverError
from tracebound.lp import (
    FLOAT,
    RATIONAL,
    AtomicMeasure,
    Feasible,
    HullProblem,
    Infeasible,
    atom_features,
    caratheodory_reduce,
    measure_from_feasible,
    solve_feasibility,
)
from tracebound.moments import BASIS_A5, BASIS_B32, featurize
from tracebound.region import Region, SymmetricAtom, grid

TRIANGLE = [[Fraction(0), Fraction(0)], [Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]


def _reconstruct(prob: HullProblem, result: Feasible):
    return [sum(w * Fraction(prob.columns[k][row]) for k, w in zip(result.support, result.weights)) for row in range(prob.d)]


class TestRationalMode:
    """Exact pivoting in small dimension"""

    def test_segment_midpoint(self):
        prob = HullProblem([[0], [2]], [1])
        result = solve_feasibility(prob, mode=RATIONAL)
        assert isinstance(result, Feasible)
        assert result.exact
        assert result.weights == [Fraction(1, 2), Fraction(1, 2)]

    def test_triangle_interior(self):
        prob = HullProblem(TRIANGLE, [Fraction(1, 4), Fraction(1, 4)])
        result = solve_feasibility(prob)
        assert isinstance(result, Feasible)
        assert sum(result.weights) == 1
        assert all(w >= 0 for w in result.weights)
        assert _reconstruct(prob, result) == [Fraction(1, 4), Fraction(1, 4)]

    def test_vertex_target(self):
        result = solve_feasibility(HullProblem(TRIANGLE, [1, 0]))
        assert isinstance(result, Feasible)
        assert result.support == [1] and result.weights == [1]

    @pytest.mark.parametrize("target", [[1, 1], [Fraction(-1, 100), 0], [Fraction(1, 2), Fraction(51, 100)]])
    def test_farkas_certificate(self, target):
        prob = HullProblem(TRIANGLE, target)
        result = solve_feasibility(prob)
        assert isinstance(result, Infeasible)
        cert = result.certificate
        assert all(cert.value(col) >= 0 for col in TRIANGLE)
        assert cert.value(target) == -cert.delta
        assert cert.delta > 0
        assert cert.min_column_value >= 0

    def test_negative_target_rows(self):
        prob = HullProblem([[-2, -1], [-1, -3], [-3, -2]], [-2, -2])
        result = solve_feasibility(prob)
        assert isinstance(result, Feasible)
        assert _reconstruct(prob, result) == [-2, -2]

    def test_float_request_stays_rational_in_small_dimension(self):
        result = solve_feasibility(HullProblem([[0], [3]], [1]), mode=FLOAT)
        assert isinstance(result, Feasible)
        assert result.exact
        assert result.weights == [Fraction(2, 3), Fraction(1, 3)]

    def test_pivot_guard(self):
        with pytest.raises(SolverError):
            solve_feasibility(HullProblem(TRIANGLE, [Fraction(1, 4), Fraction(1, 4)]), max_iterations=1)


class TestFloatMode:
    """Float pivoting above dimension 8 with exact re-verification"""

    d = 9

    def _simplex_columns(self):
        columns = [[Fraction(0)] * self.d]
        for i in range(self.d):
            col = [Fraction(0)] * self.d
            col[i] = Fraction(1)
            columns.append(col)
        return columns

    def test_feasible_weights_recovered_exactly(self):
        columns = self._simplex_columns()
        target = [Fraction(1, 10)] * self.d
        result = solve_feasibility(HullProblem(columns, target), mode=FLOAT)
        assert isinstance(result, Feasible)
        assert result.exact
        assert sum(result.weights) == 1
        assert all(w == Fraction(1, 10) for w in result.weights)

    def test_infeasible_certificate_verified(self):
        columns = self._simplex_columns()
        target = [Fraction(1, 5)] * self.d
        result = solve_feasibility(HullProblem(columns, target), mode=FLOAT)
        assert isinstance(result, Infeasible)
        cert = result.certificate
        assert cert.delta > 0
        assert all(cert.value(col) >= -Fraction(1, 10 ** 9) for col in columns)


class TestCaseBDimension:
    """Float pivoting on the 32 known monomials"""

    def test_box_grid_contains_target(self, case_b):
        points = grid(Region.box(), 33)
        columns = [featurize(x, y, BASIS_B32) for x, y in points]
        prob = HullProblem(columns, list(case_b.values))
        result = solve_feasibility(prob, mode=FLOAT)
        assert isinstance(result, Feasible)
        assert result.residual <= 1e-9
        assert len(result.support) <= BASIS_B32.dimension + 1
        assert all(w >= 0 for w in result.weights)
        assert sum(result.weights) == pytest.approx(1.0, abs=1e-12)

    def test_shifted_region_separated(self, case_b):
        columns = [featurize(x, y, BASIS_B32) for x, y in grid(Region.make("sum", "geq", 1), 33)]
        result = solve_feasibility(HullProblem(columns, list(case_b.values)), mode=FLOAT)
        assert isinstance(result, Infeasible)
        cert = result.certificate
        assert cert.delta > 0
        assert all(cert.value(col) >= 0 for col in columns)
        assert cert.value(list(case_b.values)) == -cert.delta

    def test_interior_average_recovered(self):
        rng = np.random.default_rng(11)
        lattice = [(Fraction(i, 4), Fraction(j, 4)) for i in range(-8, 9) for j in range(-8, 9)]
        chosen = [lattice[k] for k in rng.choice(len(lattice), size=33, replace=False)]
        columns = [featurize(x, y, BASIS_B32) for x, y in chosen]
        raw = [Fraction(int(v)) for v in rng.integers(1, 10, size=len(chosen))]
        weights = [w / sum(raw) for w in raw]
        target = [sum(w * col[row] for w, col in zip(weights, columns)) for row in range(BASIS_B32.dimension)]
        prob = HullProblem(columns, target)
        result = solve_feasibility(prob, mode=FLOAT)
        assert isinstance(result, Feasible)
        assert result.residual <= 1e-9
        rebuilt = _reconstruct(prob, result)
        assert max(abs(float(a - b)) for a, b in zip(rebuilt, target)) <= 1e-9


class TestInputs:
    """Malformed problems"""

    def test_no_columns(self):
        with pytest.raises(InputError):
            HullProblem([], [0])

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            HullProblem([[0, 1], [1]], [0, 0])

    def test_unknown_mode(self):
        with pytest.raises(InputError):
            solve_feasibility(HullProblem([[0], [1]], [0]), mode="interior-point")


class TestMeasures:
    """Atomic measures and Caratheodory reduction"""

    def test_check(self):
        assert AtomicMeasure([(0, 0), (1, 1)], [Fraction(1, 2), Fraction(1, 2)]).check() == []
        problems = AtomicMeasure([(0, 0), (1, 1)], [Fraction(3, 2), Fraction(-1, 4)]).check()
        assert any("negative" in p for p in problems)
        assert any("sum" in p for p in problems)

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            AtomicMeasure([(0, 0)], [])

    def test_symmetric_atom_features(self):
        atom = SymmetricAtom.from_pair(Fraction(-3, 2), 2)
        assert atom_features(atom, BASIS_A5) == featurize(Fraction(-3, 2), Fraction(2), BASIS_A5)
        with pytest.raises(InputError):
            atom_features(atom, BASIS_B32)

    def test_caratheodory_preserves_averages(self):
        points = [(0, 0), (1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1), (1, -1), (2, 1)]
        atoms = [(Fraction(x), Fraction(y)) for x, y in points]
        measure = AtomicMeasure(atoms, [Fraction(1, 9)] * len(atoms))
        reduced = caratheodory_reduce(measure, BASIS_A5)
        assert len(reduced) <= BASIS_A5.dimension + 1
        assert sum(reduced.weights) == 1
        assert all(w > 0 for w in reduced.weights)

        def averages(m):
            rows = [atom_features(a, BASIS_A5) for a in m.atoms]
            return [sum(w * row[k] for w, row in zip(m.weights, rows)) for k in range(BASIS_A5.dimension)]

        assert averages(reduced) == averages(measure)

    def test_small_measure_untouched(self):
        measure = AtomicMeasure([(Fraction(0), Fraction(0))], [Fraction(1)])
        assert caratheodory_reduce(measure, BASIS_A5) is measure

    @pytest.mark.slow
    def test_random_monomial_measure(self):
        rng = np.random.default_rng(5)
        atoms = [(Fraction(int(i), 4), Fraction(int(j), 4)) for i, j in rng.integers(-8, 9, size=(50, 2))]
        raw = [Fraction(int(v)) for v in rng.integers(1, 20, size=50)]
        measure = AtomicMeasure(atoms, [w / sum(raw) for w in raw])
        reduced = caratheodory_reduce(measure, BASIS_B32)
        assert len(reduced) <= BASIS_B32.dimension + 1
        assert sum(reduced.weights) == 1
        assert all(w > 0 for w in reduced.weights)
        assert set(reduced.atoms) <= set(atoms)

        def averages(m):
            rows = [atom_features(a, BASIS_B32) for a in m.atoms]
            return [sum(w * row[k] for w, row in zip(m.weights, rows)) for k in range(BASIS_B32.dimension)]

        assert averages(reduced) == averages(measure)
        assert caratheodory_reduce(reduced, BASIS_B32) is reduced

    def test_reduction_idempotent(self):
        atoms = [(Fraction(x), Fraction(y)) for x in range(-1, 2) for y in range(-1, 2)]
        measure = AtomicMeasure(atoms, [Fraction(1, 9)] * len(atoms))
        once = caratheodory_reduce(measure, BASIS_A5)
        twice = caratheodory_reduce(once, BASIS_A5)
        assert twice.atoms == once.atoms
        assert twice.weights == once.weights

    def test_measure_from_feasible(self):
        result = Feasible(support=[2, 0], weights=[Fraction(1, 3), Fraction(2, 3)])
        measure = measure_from_feasible(result, ["a", "b", "c"])
        assert measure.atoms == ["c", "a"]
