"""
Convex-hull feasibility kernel

Decides whether a target vector is a convex combination of given columns
with a phase-I revised simplex. Exact mode pivots on rationals (numpy
object arrays of Fractions) under Bland's rule; float mode refactorises a
row-scaled basis every pivot and refines its weights against the exact
columns. On infeasibility the phase-I duals give a Farkas certificate: an affine
functional nonnegative on every column and negative at the target.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .exact import nullspace_vector, solve_exact, to_rational
from .exceptions import InputError, SolverError
from .moments import MomentBasis, featurize, featurize_symmetric
from .region import SymmetricAtom

logger = logging.getLogger(__name__)

RATIONAL = "rational"
FLOAT = "float"
AUTO = "auto"

RATIONAL_MAX_DIM = 8

# float mode, on rows scaled to unit max-norm
FLOAT_FEAS_TOL = 1e-9
FLOAT_OPT_TOL = 1e-10
FLOAT_PIVOT_TOL = 1e-9
DEGENERATE_STREAK = 50
REFINE_STEPS = 6


@dataclass
class HullProblem:
    """Is target a convex combination of the columns?"""
    columns: List[Sequence]
    target: Sequence

    def __post_init__(self):
        if not self.columns:
            raise InputError("hull problem needs at least one column")
        d = len(self.target)
        for k, col in enumerate(self.columns):
            if len(col) != d:
                raise InputError(f"column {k} has length {len(col)}, target has length {d}")

    @property
    def d(self) -> int:
        return len(self.target)


@dataclass
class FarkasCertificate:
    """a . column + b >= 0 on every column, a . target + b = -delta < 0"""
    a: List[Fraction]
    b: Fraction
    delta: Fraction
    min_column_value: Fraction = Fraction(0)

    def value(self, column: Sequence) -> Fraction:
        return sum((ai * to_rational(ci) for ai, ci in zip(self.a, column)), Fraction(0)) + self.b


@dataclass
class Feasible:
    """Weights on a subset of the columns"""
    support: List[int]
    weights: List
    residual: float = 0.0
    exact: bool = False

    @property
    def kind(self) -> str:
        return "feasible"


@dataclass
class Infeasible:
    certificate: FarkasCertificate

    @property
    def kind(self) -> str:
        return "infeasible"


FeasibilityResult = Union[Feasible, Infeasible]

Atom = Union[Tuple[Fraction, Fraction], SymmetricAtom]


@dataclass
class AtomicMeasure:
    """Finitely supported probability measure"""
    atoms: List[Atom]
    weights: List = field(default_factory=list)

    def __post_init__(self):
        if len(self.atoms) != len(self.weights):
            raise InputError(f"{len(self.atoms)} atoms but {len(self.weights)} weights")

    def __len__(self):
        return len(self.atoms)

    def check(self, tol=0) -> List[str]:
        """Violations of the probability-vector conditions (empty when fine)"""
        problems = []
        negative = [k for k, w in enumerate(self.weights) if w < 0]
        if negative:
            problems.append(f"negative weights at {negative}")
        total = sum((to_rational(w) for w in self.weights), Fraction(0))
        if abs(total - 1) > to_rational(tol):
            problems.append(f"weights sum to {float(total):.17g}, not 1")
        return problems


def atom_features(atom: Atom, basis: MomentBasis) -> List:
    """Feature vector of an atom; symmetric atoms are featurized over (e1, e2)"""
    if isinstance(atom, SymmetricAtom):
        if basis.id != "A5":
            raise InputError("symmetric atoms only carry A5 features")
        return featurize_symmetric(atom.e1, atom.e2)
    return featurize(atom[0], atom[1], basis)


def _choose_mode(mode: str, d: int) -> str:
    if mode == AUTO:
        return RATIONAL if d <= RATIONAL_MAX_DIM else FLOAT
    if mode not in (RATIONAL, FLOAT):
        raise InputError(f"unknown LP mode {mode!r}")
    if mode == FLOAT and d <= RATIONAL_MAX_DIM:
        logger.debug(f"Float mode requested at dimension {d}; pivoting stays rational")
        return RATIONAL
    return mode


class _PhaseOne:
    """
    Exact revised simplex on  min sum(artificials)  s.t.  A w + I s = b, w, s >= 0

    Rows with negative right-hand side are negated first so that the
    all-artificial basis is feasible. Bland's rule on both sides of the pivot.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, max_iterations: int):
        self.m, self.n = A.shape
        self.signs = [(-1 if v < 0 else 1) for v in b]
        flip = np.array([Fraction(s) for s in self.signs], dtype=object)
        self.A = A * flip[:, None]
        self.b = b * flip
        self.Binv = np.array(
            [[Fraction(int(i == j)) for j in range(self.m)] for i in range(self.m)],
            dtype=object,
        )
        self.xB = self.b.copy()
        self.basis = [self.n + i for i in range(self.m)]
        self.max_iterations = max_iterations
        self.iterations = 0

    def _cost_basis(self) -> np.ndarray:
        return np.array([Fraction(int(k >= self.n)) for k in self.basis], dtype=object)

    def duals(self) -> np.ndarray:
        return self._cost_basis() @ self.Binv

    def objective(self):
        return self._cost_basis() @ self.xB

    def basic_values(self) -> List:
        return list(self.xB)

    def run(self):
        while True:
            if self.iterations >= self.max_iterations:
                raise SolverError(f"simplex did not finish within {self.max_iterations} pivots")
            y = self.duals()
            reduced = -(y @ self.A)
            entering = np.flatnonzero(reduced < 0)
            if entering.size == 0:
                return
            # Bland: lowest-index improving column
            j = int(entering[0])
            u = self.Binv @ self.A[:, j]
            row, best = None, None
            for i in range(self.m):
                if u[i] > 0:
                    ratio = self.xB[i] / u[i]
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[row]):
                        row, best = i, ratio
            if row is None:
                raise SolverError("phase-one problem reported unbounded")
            self._pivot(row, j, u)
            self.iterations += 1

    def _pivot(self, r: int, j: int, u: np.ndarray):
        pivot = u[r]
        self.Binv[r] = self.Binv[r] / pivot
        self.xB[r] = self.xB[r] / pivot
        for i in range(self.m):
            if i != r and u[i] != 0:
                self.Binv[i] = self.Binv[i] - u[i] * self.Binv[r]
                self.xB[i] = self.xB[i] - u[i] * self.xB[r]
        self.basis[r] = j


class _FloatPhaseOne:
    """
    The same phase-one problem in floating point

    Rows are scaled to unit max-norm and the basis is refactorised from its
    columns after every pivot, so no product-form error accumulates. Pricing
    is Dantzig's rule; after DEGENERATE_STREAK pivots without progress it
    switches to Bland's rule until the objective moves again. The ratio test
    is Harris's two-pass test with a relative pivot tolerance.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, max_iterations: int):
        self.m, self.n = A.shape
        self.signs = [(-1 if v < 0 else 1) for v in b]
        flip = np.array(self.signs, dtype=float)
        A, b = A * flip[:, None], b * flip
        scale = np.maximum(np.abs(A).max(axis=1), np.abs(b))
        scale[scale == 0] = 1.0
        self.row_scale = 1.0 / scale
        self.A = A * self.row_scale[:, None]
        self.b = b * self.row_scale
        self.columns = np.hstack([self.A, np.eye(self.m)])
        self.basis = [self.n + i for i in range(self.m)]
        self.max_iterations = max_iterations
        self.iterations = 0
        self._factor()

    def _factor(self):
        self.B = self.columns[:, self.basis]
        cost = np.array([1.0 if k >= self.n else 0.0 for k in self.basis])
        try:
            self.xB = np.linalg.solve(self.B, self.b)
            self.y = np.linalg.solve(self.B.T, cost)
        except np.linalg.LinAlgError as e:
            raise SolverError(f"basis became singular after {self.iterations} pivots") from e

    def duals(self) -> np.ndarray:
        """Duals of the unscaled (sign-flipped) rows"""
        return self.y * self.row_scale

    def objective(self) -> float:
        return float(sum(max(v, 0.0) for k, v in zip(self.basis, self.xB) if k >= self.n))

    def basic_values(self) -> List[float]:
        return [max(float(v), 0.0) for v in self.xB]

    def run(self):
        streak = 0
        last = self.objective()
        while True:
            if self.iterations >= self.max_iterations:
                raise SolverError(f"simplex did not finish within {self.max_iterations} pivots")
            reduced = -(self.y @ self.A)
            cutoff = FLOAT_OPT_TOL * max(1.0, float(np.abs(self.y).max()))
            improving = np.flatnonzero(reduced < -cutoff)
            if improving.size == 0:
                return
            bland = streak >= DEGENERATE_STREAK
            j = int(improving[0]) if bland else int(improving[np.argmin(reduced[improving])])
            u = np.linalg.solve(self.B, self.A[:, j])
            row = self._ratio_test(u, bland)
            if row is None:
                raise SolverError("phase-one problem reported unbounded")
            self.basis[row] = j
            self.iterations += 1
            self._factor()
            now = self.objective()
            streak = 0 if now < last * (1 - 1e-12) - 1e-15 else streak + 1
            last = now

    def _ratio_test(self, u: np.ndarray, bland: bool) -> Optional[int]:
        floor = FLOAT_PIVOT_TOL * max(1.0, float(np.abs(u).max()))
        eligible = [i for i in range(self.m) if u[i] > floor]
        if not eligible:
            return None
        values = np.maximum(self.xB, 0.0)
        # pass one: longest step that keeps every basic value above -FLOAT_FEAS_TOL
        step = min((values[i] + FLOAT_FEAS_TOL) / u[i] for i in eligible)
        ties = [i for i in eligible if values[i] / u[i] <= step]
        if bland:
            return min(ties, key=lambda i: self.basis[i])
        # pass two: largest pivot among the rows that block within that step
        return max(ties, key=lambda i: (u[i], -self.basis[i]))


def _as_exact(rows) -> List[List[Fraction]]:
    return [[to_rational(v) for v in row] for row in rows]


def solve_feasibility(
    prob: HullProblem,
    mode: str = AUTO,
    tol: float = 1e-9,
    max_iterations: Optional[int] = None,
) -> FeasibilityResult:
    """
    Decide target in conv(columns)

    Args:
        prob: columns and target
        mode: "rational", "float" or "auto" (rational up to dimension 8)
        tol: residual allowed for float-mode weights and slack allowed for
            float-mode separators

    Returns:
        Feasible with weights on a column subset, or Infeasible with a
        Farkas certificate that has been re-verified in exact arithmetic

    Raises:
        InputError: On dimension mismatch
        SolverError: If the pivot guard trips or a float verdict fails
            exact re-verification
    """
    d = prob.d
    n = len(prob.columns)
    mode = _choose_mode(mode, d)
    exact = mode == RATIONAL
    max_iterations = max_iterations or 50 * (n + d + 1)
    logger.debug(f"Hull feasibility: {n} columns in dimension {d}, {mode} mode")

    if exact:
        exact_cols = _as_exact(prob.columns)
        A = np.array([[col[i] for col in exact_cols] for i in range(d)] + [[Fraction(1)] * n], dtype=object)
        b = np.array([to_rational(v) for v in prob.target] + [Fraction(1)], dtype=object)
        solver = _PhaseOne(A, b, max_iterations)
    else:
        A = np.vstack([np.array([[float(v) for v in col] for col in prob.columns]).T, np.ones(n)])
        b = np.array([float(v) for v in prob.target] + [1.0])
        solver = _FloatPhaseOne(A, b, max_iterations)

    solver.run()
    objective = solver.objective()
    logger.debug(f"Phase one finished after {solver.iterations} pivots, objective {float(objective):.3e}")

    if exact:
        if objective == 0:
            return _feasible_exact(solver)
        return _infeasible(prob, solver, exact=True, tol=0)

    if objective <= max(tol, FLOAT_FEAS_TOL):
        return _feasible_float(prob, solver, tol)
    return _infeasible(prob, solver, exact=False, tol=tol)


def _feasible_exact(solver: _PhaseOne) -> Feasible:
    support, weights = [], []
    for i, k in enumerate(solver.basis):
        if k < solver.n and solver.xB[i] != 0:
            support.append(k)
            weights.append(solver.xB[i])
    pairs = sorted(zip(support, weights))
    return Feasible([k for k, _ in pairs], [w for _, w in pairs], 0.0, True)


def _feasible_float(prob: HullProblem, solver: _FloatPhaseOne, tol: float) -> Feasible:
    """Exact weights on the final basis when they exist, else refined float weights"""
    values = dict(zip(solver.basis, solver.basic_values()))
    support = sorted(k for k in solver.basis if k < solver.n)
    exact_cols = _as_exact([prob.columns[k] for k in support])
    matrix = [list(row) for row in zip(*exact_cols)] + [[Fraction(1)] * len(support)]
    rhs = [to_rational(v) for v in prob.target] + [Fraction(1)]
    solution, _, consistent = solve_exact(matrix, rhs)
    if consistent and all(w >= 0 for w in solution):
        keep = [(k, w) for k, w in zip(support, solution) if w != 0]
        return Feasible([k for k, _ in keep], [w for _, w in keep], 0.0, True)

    support = [k for k in support if values[k] > 0]
    weights = _refine(prob, support, np.array([values[k] for k in support]))
    if np.any(weights < 0):
        # drop the atoms refinement pushed negative and refine once more
        keep = weights > 0
        support = [k for k, flag in zip(support, keep) if flag]
        weights = _refine(prob, support, weights[keep])
    weights = np.maximum(weights, 0.0)
    support, values = [k for k, w in zip(support, weights) if w > 0], [float(w) for w in weights if w > 0]
    residual = _residual(prob, support, values)
    if residual > tol:
        raise SolverError(f"float weights leave moment residual {residual:.3e} > {tol:.1e}")
    logger.debug(f"Refined float weights on {len(support)} columns, residual {residual:.3e}")
    return Feasible(support, values, residual, False)


def _exact_residual_vector(prob: HullProblem, support: Sequence[int], weights: Sequence) -> List[Fraction]:
    """target - sum w_k column_k, with the unit-mass row last, summed exactly"""
    ws = [to_rational(w) for w in weights]
    out = []
    for row in range(prob.d):
        total = sum((w * to_rational(prob.columns[k][row]) for k, w in zip(support, ws)), Fraction(0))
        out.append(to_rational(prob.target[row]) - total)
    out.append(1 - sum(ws, Fraction(0)))
    return out


def _refine(prob: HullProblem, support: Sequence[int], weights: np.ndarray) -> np.ndarray:
    """
    Iterative refinement of weights on a fixed support

    The residual is formed exactly from the rational columns; each
    correction is a least-squares solve with the row-scaled float matrix.
    """
    if not support:
        return weights
    M = np.vstack([np.array([[float(v) for v in prob.columns[k]] for k in support]).T, np.ones(len(support))])
    scale = np.abs(M).max(axis=1)
    scale[scale == 0] = 1.0
    M = M / scale[:, None]
    w = np.array(weights, dtype=float)
    for _ in range(REFINE_STEPS):
        r = np.array([float(v) for v in _exact_residual_vector(prob, support, w)]) / scale
        if float(np.abs(r).max()) == 0.0:
            break
        correction, *_ = np.linalg.lstsq(M, r, rcond=None)
        w = w + correction
    return w


def _residual(prob: HullProblem, support: Sequence[int], weights: Sequence) -> float:
    """Max-norm moment residual, summed exactly"""
    return float(max(abs(v) for v in _exact_residual_vector(prob, support, weights)))


def _infeasible(prob: HullProblem, solver, exact: bool, tol: float) -> Infeasible:
    y = solver.duals()
    y = [to_rational(v) * s for v, s in zip(y, solver.signs)]
    alpha, beta = y[:-1], y[-1]
    cert = FarkasCertificate(a=[-v for v in alpha], b=-beta, delta=Fraction(0))
    cert.min_column_value = min(cert.value(col) for col in prob.columns)
    if not exact and cert.min_column_value < 0:
        # float duals: lift the constant until every column is exactly nonnegative
        cert.b -= cert.min_column_value
        cert.min_column_value = Fraction(0)
    cert.delta = -cert.value(prob.target)
    tol_q = to_rational(tol)
    if cert.delta <= tol_q or cert.min_column_value < -tol_q:
        raise SolverError(
            f"separator failed re-verification: delta={float(cert.delta):.3e}, "
            f"min over columns={float(cert.min_column_value):.3e}"
        )
    return Infeasible(cert)


def caratheodory_reduce(m: AtomicMeasure, basis: MomentBasis) -> AtomicMeasure:
    """
    Reduce a measure to at most d + 1 atoms with the same feature averages

    Repeatedly takes d + 2 atoms, finds an exact affine dependency among
    their lifted feature vectors and moves weight along it until an atom
    drops out.
    """
    d = basis.dimension
    if len(m) <= d + 1:
        return m
    atoms = list(m.atoms)
    weights = [to_rational(w) for w in m.weights]
    lifted = [[to_rational(v) for v in atom_features(a, basis)] + [Fraction(1)] for a in atoms]

    keep = [k for k, w in enumerate(weights) if w != 0]
    while len(keep) > d + 1:
        subset = keep[: d + 2]
        matrix = [[lifted[k][row] for k in subset] for row in range(d + 1)]
        direction = nullspace_vector(matrix)
        if direction is None:
            raise SolverError("no affine dependency among d + 2 lifted atoms")
        theta = min(weights[k] / lam for k, lam in zip(subset, direction) if lam > 0)
        for k, lam in zip(subset, direction):
            weights[k] -= theta * lam
        keep = [k for k in keep if weights[k] != 0]
    logger.debug(f"Reduced {len(m)} atoms to {len(keep)}")
    return AtomicMeasure([atoms[k] for k in keep], [weights[k] for k in keep])


def measure_from_feasible(result: Feasible, atoms: Sequence[Atom]) -> AtomicMeasure:
    return AtomicMeasure([atoms[k] for k in result.support], list(result.weights))
