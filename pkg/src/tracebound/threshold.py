"""
Optimal provable bounds by bisection

For a region V_u the question "is the target moment vector a convex
combination of feature vectors of points of V_u?" is answered by column
generation: solve the hull LP over a finite point set; on infeasibility
turn the Farkas functional into a polynomial, minimize it over the region
and add its negative minima as new points. The feasible bounds form an
interval, so bisection on u finds the threshold between a witness measure
and a separating polynomial.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .certify import Verdict, implied_bound, verify_hyperplane, verify_measure, ImpliedBound
from .exact import DEFAULT_DIGITS, BigReal, to_rational
from .exceptions import InputError, SolverError, ThresholdError
from .lp import (
    RATIONAL,
    AtomicMeasure,
    FarkasCertificate,
    Feasible,
    HullProblem,
    atom_features,
    caratheodory_reduce,
    measure_from_feasible,
    solve_feasibility,
)
from .moments import A5, MomentBasis, MomentVector, basis_for_case, expectation, target_for_case
from .optimize import global_min
from .poly import Poly2
from .region import Direction, Form, Region, grid, is_empty, snap
from .utils import timed

logger = logging.getLogger(__name__)

MAX_NEW_COLUMNS = 16
BRACKET_MARGIN = Fraction(1, 1000)


@dataclass
class ThresholdOptions:
    tol_lp: float = 1e-9
    tol_sep: Optional[float] = None
    max_rounds: int = 60
    grid_n: int = 129
    seed_grid_n: Optional[int] = None
    digits: int = DEFAULT_DIGITS
    tol_kkt: float = 1e-30
    gap: float = 0.01
    budget: int = 20000
    verify: bool = True

    @property
    def separation_tol(self) -> float:
        if self.tol_sep is not None:
            return self.tol_sep
        return self.tol_lp / 100 if self.tol_lp > 0 else 1e-11

    @classmethod
    def from_config(cls, config) -> "ThresholdOptions":
        return cls(
            tol_lp=config.tol_lp,
            tol_sep=config.tol_sep,
            max_rounds=config.max_rounds,
            grid_n=config.threshold_grid_n,
            digits=config.precision_digits,
            tol_kkt=config.tol_kkt,
            gap=config.gap,
            budget=config.budget,
        )


@dataclass
class FeasibleAt:
    measure: AtomicMeasure
    rounds: int
    columns: int
    status: str = "feasible"


@dataclass
class InfeasibleAt:
    separator: Poly2
    certificate: FarkasCertificate
    separator_min: BigReal
    separator_expectation: Fraction
    rounds: int
    columns: int
    status: str = "infeasible"


@dataclass
class IndeterminateAt:
    reason: str
    rounds: int
    columns: int
    status: str = "indeterminate"


Outcome = Union[FeasibleAt, InfeasibleAt, IndeterminateAt]


def separator_polynomial(cert: FarkasCertificate, basis: MomentBasis) -> Poly2:
    """b + sum a_k f_k, scaled so that max |a_k| = 1"""
    scale = max((abs(a) for a in cert.a), default=Fraction(0)) or abs(cert.b) or Fraction(1)
    poly = Poly2.constant(cert.b / scale)
    for a, feature in zip(cert.a, basis.features):
        if a != 0:
            poly = poly + feature * (a / scale)
    return poly


def _seed_grid_n(case_basis: MomentBasis, opts: ThresholdOptions) -> int:
    if opts.seed_grid_n is not None:
        return opts.seed_grid_n
    return 9 if case_basis.id == A5 else 33


def feasible_at(case: str, r: Region, opts: Optional[ThresholdOptions] = None) -> Outcome:
    """
    Decide whether the case target lies in the hull of the region's features

    Returns:
        FeasibleAt with a reduced witness measure, InfeasibleAt with a
        separating polynomial whose minimum over r is at least -tol_sep, or
        IndeterminateAt when the exchange stalls or runs out of rounds
    """
    opts = opts or ThresholdOptions()
    if is_empty(r):
        raise InputError(f"region {r.describe()} is empty")
    basis = basis_for_case(case)
    target = target_for_case(case)
    mode = RATIONAL if basis.id == A5 else "float"
    tol_sep = opts.separation_tol

    points: List[Tuple[Fraction, Fraction]] = grid(r, _seed_grid_n(basis, opts))
    known = set(points)
    columns = [[to_rational(v) for v in atom_features(p, basis)] for p in points]
    logger.info(f"Feasibility over {r.describe()} (case {case.upper()}), {len(points)} seed points")

    for round_no in range(1, opts.max_rounds + 1):
        try:
            result = solve_feasibility(HullProblem(columns, list(target.values)), mode=mode, tol=opts.tol_lp)
        except SolverError as e:
            logger.warning(f"Round {round_no}: LP failed: {str(e)}")
            return IndeterminateAt(f"LP failed: {str(e)}", round_no, len(points))

        if isinstance(result, Feasible):
            measure = caratheodory_reduce(measure_from_feasible(result, points), basis)
            logger.info(f"Feasible after {round_no} rounds with {len(measure)} atoms")
            return FeasibleAt(measure, round_no, len(points))

        separator = separator_polynomial(result.certificate, basis)
        found = global_min(separator, r, grid_n=opts.grid_n, digits=opts.digits, tol_kkt=opts.tol_kkt)
        sep_expectation = expectation(separator, target)
        logger.debug(
            f"Round {round_no}: separator minimum {float(found.value):.3e}, "
            f"target value {float(sep_expectation):.3e}"
        )

        if found.value >= -tol_sep:
            if -sep_expectation > 10 * Fraction(tol_sep):
                logger.info(f"Infeasible after {round_no} rounds, margin {float(-sep_expectation):.3e}")
                return InfeasibleAt(separator, result.certificate, found.value, sep_expectation, round_no, len(points))
            return IndeterminateAt("separation margin below the noise floor", round_no, len(points))

        fresh = 0
        candidates = [c for c in found.local_minima if c.value < -tol_sep] or [found]
        for c in candidates:
            if fresh >= MAX_NEW_COLUMNS:
                break
            point = snap(r, c.point[0], c.point[1])
            if point is None or point in known:
                continue
            known.add(point)
            points.append(point)
            columns.append([to_rational(v) for v in atom_features(point, basis)])
            fresh += 1
        if fresh == 0:
            return IndeterminateAt("separation produced no new points", round_no, len(points))

    return IndeterminateAt(f"no verdict within {opts.max_rounds} rounds", opts.max_rounds, len(points))


@dataclass
class TraceStep:
    bound: Fraction
    status: str
    rounds: int


@dataclass
class ThresholdResult:
    """Bracket around the optimal bound with certificates at both ends"""
    case: str
    form: Form
    dir: Direction
    feasible_bound: Fraction
    infeasible_bound: Fraction
    witness: Optional[AtomicMeasure]
    separator: Optional[Poly2]
    separator_expectation: Optional[Fraction]
    iterations: int
    runtime: float
    status: str = "ok"
    trace: List[TraceStep] = field(default_factory=list)
    implied: Optional[ImpliedBound] = None
    witness_verdict: Optional[Verdict] = None
    separator_verdict: Optional[Verdict] = None

    @property
    def bracket(self) -> Tuple[Fraction, Fraction]:
        return tuple(sorted((self.feasible_bound, self.infeasible_bound)))

    @property
    def width(self) -> Fraction:
        return abs(self.infeasible_bound - self.feasible_bound)

    @property
    def midpoint(self) -> Fraction:
        return (self.feasible_bound + self.infeasible_bound) / 2


def initial_bracket(form: Form, dir: Direction) -> Tuple[Fraction, Fraction]:
    """(feasible end, infeasible end) just inside the range of x+y or xy on [-2, 2]^2"""
    lo, hi = Fraction(-4), Fraction(4)
    if Direction(dir) == Direction.GEQ:
        return lo + BRACKET_MARGIN, hi - BRACKET_MARGIN
    return hi - BRACKET_MARGIN, lo + BRACKET_MARGIN


def threshold(
    case: str,
    form: Union[Form, str],
    dir: Union[Direction, str],
    tol: float,
    opts: Optional[ThresholdOptions] = None,
    bracket: Optional[Tuple[Fraction, Fraction]] = None,
) -> ThresholdResult:
    """
    Bisect on the region bound until the bracket is narrower than tol

    Args:
        case: "a" or "b"
        form, dir: which constraint is moved
        tol: target bracket width
        bracket: optional (feasible end, infeasible end)

    Raises:
        ThresholdError: If the initial bracket is not feasible/infeasible
    """
    opts = opts or ThresholdOptions()
    form, dir = Form(form), Direction(dir)
    if tol <= 0:
        raise InputError("threshold tolerance must be positive")
    feasible_u, infeasible_u = bracket or initial_bracket(form, dir)
    feasible_u, infeasible_u = Fraction(feasible_u), Fraction(infeasible_u)
    base = Region.make(form, dir, feasible_u)
    tol_q = Fraction(tol)
    trace: List[TraceStep] = []
    logger.info(f"Threshold search case {case.upper()}, {form.value} {dir.value}, tol {tol}")

    with timed("threshold") as clock:
        low = feasible_at(case, base.with_bound(feasible_u), opts)
        trace.append(TraceStep(feasible_u, low.status, low.rounds))
        high = feasible_at(case, base.with_bound(infeasible_u), opts)
        trace.append(TraceStep(infeasible_u, high.status, high.rounds))
        if not isinstance(low, FeasibleAt) or not isinstance(high, InfeasibleAt):
            raise ThresholdError(
                f"no valid initial bracket: {low.status} at {float(feasible_u)}, {high.status} at {float(infeasible_u)}"
            )

        status = "ok"
        while abs(infeasible_u - feasible_u) > tol_q:
            mid = (feasible_u + infeasible_u) / 2
            outcome = feasible_at(case, base.with_bound(mid), opts)
            trace.append(TraceStep(mid, outcome.status, outcome.rounds))
            logger.info(f"Bound {float(mid):.12g}: {outcome.status} after {outcome.rounds} rounds")
            if isinstance(outcome, FeasibleAt):
                feasible_u, low = mid, outcome
            elif isinstance(outcome, InfeasibleAt):
                infeasible_u, high = mid, outcome
            else:
                logger.warning(f"Indeterminate at {float(mid):.12g}: {outcome.reason}")
                status = "indeterminate"
                break

    result = ThresholdResult(
        case=case.lower(),
        form=form,
        dir=dir,
        feasible_bound=feasible_u,
        infeasible_bound=infeasible_u,
        witness=low.measure,
        separator=high.separator,
        separator_expectation=high.separator_expectation,
        iterations=len(trace),
        runtime=clock["seconds"],
        status=status,
        trace=trace,
        implied=implied_bound(form, dir, infeasible_u),
    )
    if opts.verify:
        _reverify(result, opts)
    return result


def _reverify(result: ThresholdResult, opts: ThresholdOptions):
    """Check both endpoint certificates through certify alone"""
    target: MomentVector = target_for_case(result.case)
    base = Region.make(result.form, result.dir, result.feasible_bound)
    measure = result.witness
    tol = 0 if target.basis.id == A5 else opts.tol_lp
    report = verify_measure(measure.atoms, measure.weights, base, target, tol=tol)
    result.witness_verdict = report.verdict
    separator_report = verify_hyperplane(
        result.separator,
        base.with_bound(result.infeasible_bound),
        target,
        name="separator",
        grid_n=opts.grid_n,
        digits=opts.digits,
        tol_kkt=opts.tol_kkt,
        gap=opts.gap,
        budget=opts.budget,
    )
    result.separator_verdict = separator_report.verdict
    logger.info(f"Endpoint certificates: witness {report.verdict.value}, separator {separator_report.verdict.value}")
