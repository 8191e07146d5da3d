"""
Certificate verification

Two kinds of evidence are checked end to end. A separating polynomial
proves that a positive proportion of primes leave a region: its exact
expectation under the known moments lies below its minimum on the region.
An atomic measure shows that no such polynomial exists: it lives on the
region and reproduces every known moment.
"""

import logging
from enum import Enum
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from .exact import DEFAULT_DIGITS, BigReal, to_rational
from .exceptions import InputError, SolverError
from .lp import AtomicMeasure, HullProblem, Infeasible, atom_features, solve_feasibility
from .moments import A5, MomentVector, expectation
from .optimize import global_min, lower_bound
from .poly import Poly2, identity_mismatch, monomial_name
from .region import Direction, Form, Region, SymmetricAtom, contains, reflect, symmetric_atom_in_region
from .utils import exact_decimal_string

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    VALID = "valid"
    VALID_COARSE = "valid-coarse"
    INVALID = "invalid"
    INDETERMINATE = "indeterminate"

    @property
    def exit_code(self) -> int:
        return {"valid": 0, "valid-coarse": 0, "invalid": 1, "indeterminate": 3}[self.value]


class HyperplaneReport(BaseModel):
    """Outcome of checking a separating polynomial against a region"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    region: str
    basis: str
    expectation: Fraction
    min_estimate: BigReal
    min_point: Tuple[BigReal, BigReal]
    min_converged: bool
    certified_bound: BigReal
    achieved_gap: float
    margin: BigReal
    verdict: Verdict
    conclusion: str


class AtomCheck(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    index: int
    atom: str
    inside: bool
    slack: Fraction


class MeasureReport(BaseModel):
    """Outcome of checking an atomic measure against a region and moments"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    region: str
    basis: str
    membership: List[AtomCheck]
    weights: List[Fraction]
    weights_source: str
    moment_residual: List[Fraction]
    max_residual: Fraction
    tolerance: Fraction
    problems: List[str]
    verdict: Verdict
    farkas_delta: Optional[Fraction] = None


class IdentityCheck(BaseModel):
    name: str
    epsilon: str
    passed: bool
    mismatch: Optional[str] = None


class IdentityReport(BaseModel):
    checks: List[IdentityCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def classify(expectation_value: Fraction, min_estimate: BigReal, certified_bound: BigReal, achieved_gap: float) -> Verdict:
    """Verdict of a separating polynomial from its expectation and minimum estimates"""
    if certified_bound > expectation_value:
        return Verdict.VALID
    if min_estimate <= expectation_value:
        return Verdict.INVALID
    if certified_bound > expectation_value - Fraction(achieved_gap):
        return Verdict.VALID_COARSE
    return Verdict.INDETERMINATE


def verify_hyperplane(
    p: Poly2,
    r: Region,
    m: MomentVector,
    name: str = "polynomial",
    grid_n: int = 257,
    digits: int = DEFAULT_DIGITS,
    tol_kkt: float = 1e-30,
    gap: float = 0.01,
    budget: int = 20000,
) -> HyperplaneReport:
    """
    Check that p separates the target moments from the region

    Raises:
        UnknownMomentError: If p needs a moment the basis does not know
    """
    logger.info(f"Verifying separating polynomial {name} over {r.describe()}")
    try:
        e = expectation(p, m)
        found = global_min(p, r, grid_n=grid_n, digits=digits, tol_kkt=tol_kkt)
        certified = lower_bound(p, r, gap=gap, budget=budget, digits=digits)
        verdict = classify(e, found.value, certified.bound, certified.achieved_gap)
        if verdict == Verdict.VALID_COARSE and not found.converged:
            verdict = Verdict.INDETERMINATE
        if verdict in (Verdict.VALID, Verdict.VALID_COARSE):
            conclusion = f"a positive proportion of primes violate {r.constraint.describe() if r.constraint else 'the box'}"
        else:
            conclusion = "no conclusion"
        report = HyperplaneReport(
            name=name,
            region=r.describe(),
            basis=m.basis.id,
            expectation=e,
            min_estimate=found.value,
            min_point=found.point,
            min_converged=found.converged,
            certified_bound=certified.bound,
            achieved_gap=certified.achieved_gap,
            margin=found.value - e,
            verdict=verdict,
            conclusion=conclusion,
        )
        logger.info(f"{name}: expectation {float(e):.13g}, minimum {float(found.value):.13g}, verdict {verdict.value}")
        return report
    except InputError:
        raise
    except Exception as e:
        logger.error(f"Error verifying {name}: {str(e)}")
        raise


def verify_mirror(p: Poly2, r: Region, m: MomentVector, sign_x: int, sign_y: int, **opts) -> HyperplaneReport:
    """Check the mirrored certificate reflect(p) over reflect(r)"""
    name = opts.pop("name", "polynomial")
    return verify_hyperplane(
        p.reflect(sign_x, sign_y), reflect(r, sign_x, sign_y), m, name=f"{name} mirrored ({sign_x:+d}, {sign_y:+d})", **opts
    )


def _describe_atom(atom) -> str:
    if isinstance(atom, SymmetricAtom):
        return f"(e1={atom.e1}, e2={atom.e2})"
    return f"({float(atom[0]):.17g}, {float(atom[1]):.17g})"


def _atom_slack(atom, r: Region) -> Fraction:
    """Smallest slack over the box sides and the constraint"""
    if isinstance(atom, SymmetricAtom):
        c = r.constraint
        if c is None:
            return Fraction(0)
        value = atom.e1 if c.form == Form.SUM else atom.e2
        return value - c.bound if c.dir == Direction.GEQ else c.bound - value
    x, y = to_rational(atom[0]), to_rational(atom[1])
    (xlo, xhi), (ylo, yhi) = r.x_range, r.y_range
    slacks = [x - xlo, xhi - x, y - ylo, yhi - y]
    if r.constraint is not None:
        slacks.append(r.constraint.slack(x, y))
    return min(slacks)


def verify_measure(
    atoms: Sequence,
    weights: Optional[Sequence],
    r: Region,
    m: MomentVector,
    tol=None,
) -> MeasureReport:
    """
    Check that an atomic measure lives on r and matches the moments m

    Args:
        atoms: (x, y) pairs, or SymmetricAtom values for the symmetric basis
        weights: probabilities, or None to solve for them
        tol: membership and moment tolerance; 0 for the symmetric basis and
            1e-9 otherwise when not given
    """
    if not atoms:
        raise InputError("measure has no atoms")
    tol_q = to_rational(tol if tol is not None else (0 if m.basis.id == A5 else 1e-9))
    basis = m.basis
    logger.info(f"Verifying a {len(atoms)}-atom measure over {r.describe()}")

    membership = []
    for k, atom in enumerate(atoms):
        if isinstance(atom, SymmetricAtom):
            inside = symmetric_atom_in_region(atom, r)
        else:
            inside = contains(r, atom[0], atom[1], tol_q)
        membership.append(AtomCheck(index=k, atom=_describe_atom(atom), inside=inside, slack=_atom_slack(atom, r)))

    columns = [[to_rational(v) for v in atom_features(a, basis)] for a in atoms]
    problems: List[str] = []
    farkas_delta = None
    solve_failed = False
    if weights is None:
        source = "solved"
        try:
            result = solve_feasibility(HullProblem(columns, list(m.values)), tol=float(tol_q) or 1e-9)
        except SolverError as e:
            logger.warning(f"Weight solve failed: {str(e)}")
            problems.append(f"weight solve failed: {str(e)}")
            solve_failed = True
            result = None
        if isinstance(result, Infeasible):
            farkas_delta = result.certificate.delta
            problems.append("no weights reproduce the moments (separating functional found)")
            weight_list = [Fraction(0)] * len(atoms)
        elif result is None:
            weight_list = [Fraction(0)] * len(atoms)
        else:
            weight_list = [Fraction(0)] * len(atoms)
            for k, w in zip(result.support, result.weights):
                weight_list[k] = to_rational(w)
    else:
        source = "given"
        if len(weights) != len(atoms):
            raise InputError(f"{len(atoms)} atoms but {len(weights)} weights")
        weight_list = [to_rational(w) for w in weights]

    problems += AtomicMeasure(list(atoms), weight_list).check(tol_q)
    residual = [
        sum((w * col[row] for w, col in zip(weight_list, columns)), Fraction(0)) - m.values[row]
        for row in range(basis.dimension)
    ]
    max_residual = max(abs(v) for v in residual)
    outside = [c.index for c in membership if not c.inside]
    if outside:
        problems.append(f"atoms outside the region: {outside}")
    if max_residual > tol_q:
        problems.append(f"moment residual {float(max_residual):.3e} exceeds {float(tol_q):.1e}")

    if solve_failed:
        verdict = Verdict.INDETERMINATE
    else:
        verdict = Verdict.VALID if not problems else Verdict.INVALID
    logger.info(f"Measure verdict {verdict.value}, max residual {float(max_residual):.3e}")
    return MeasureReport(
        region=r.describe(),
        basis=basis.id,
        membership=membership,
        weights=weight_list,
        weights_source=source,
        moment_residual=residual,
        max_residual=max_residual,
        tolerance=tol_q,
        problems=problems,
        verdict=verdict,
        farkas_delta=farkas_delta,
    )


# identity suite


def _st() -> Tuple[Poly2, Poly2]:
    return Poly2.x(), Poly2.y()


def identity_suite(eps: Fraction) -> List[Tuple[str, List[Poly2], Poly2]]:
    """(name, factors of the left side, expanded right side) for each proof identity"""
    s, t = _st()
    st = s * t
    e = Fraction(eps)
    return [
        (
            "(2-s)(2-t)(3s+3t+2-eps)",
            [2 - s, 2 - t, 3 * s + 3 * t + (2 - e)],
            (8 - 4 * e) + (8 + 2 * e) * (s + t) - 6 * (s * s + t * t) - (10 + e) * st + 3 * (s * st + st * t),
        ),
        (
            "(3st+2+eps)(st+4)",
            [3 * st + (2 + e), st + 4],
            3 * st * st + (14 + e) * st + (8 + 4 * e),
        ),
        (
            "(5st+6-eps)(4-st)",
            [5 * st + (6 - e), 4 - st],
            -5 * st * st + (14 + e) * st + (24 - 4 * e),
        ),
        (
            "(s+t)^2 - 1 - 2(st+1)",
            [(s + t) ** 2 - 1 - 2 * (st + 1)],
            s * s + t * t - 3,
        ),
        (
            "(s+t)(st+1) - (s+t)",
            [(s + t) * (st + 1) - (s + t)],
            s * st + st * t,
        ),
        (
            "(st+1)^2 - 1 - 2(st+1)",
            [(st + 1) ** 2 - 1 - 2 * (st + 1)],
            st * st - 2,
        ),
    ]


def check_identities(cases: Sequence[Tuple[str, List[Poly2], Poly2]], eps: Fraction) -> List[IdentityCheck]:
    checks = []
    for name, factors, rhs in cases:
        mismatch = identity_mismatch(factors, rhs)
        detail = None
        if mismatch is not None:
            mono, lhs_c, rhs_c = mismatch
            detail = f"coefficient of {monomial_name(*mono)}: expanded {lhs_c}, stated {rhs_c}"
            logger.warning(f"Identity {name} fails at eps={eps}: {detail}")
        checks.append(IdentityCheck(name=name, epsilon=str(eps), passed=mismatch is None, mismatch=detail))
    return checks


def verify_identity_suite(
    epsilons: Sequence[Fraction] = (Fraction(0), Fraction(1)),
    suite: Callable[[Fraction], List[Tuple[str, List[Poly2], Poly2]]] = identity_suite,
) -> IdentityReport:
    """Expand every proof identity exactly at each epsilon"""
    checks: List[IdentityCheck] = []
    for eps in epsilons:
        checks += check_identities(suite(Fraction(eps)), Fraction(eps))
    return IdentityReport(checks=checks)


# implied statements


class ImpliedBound(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    quantity: str
    relation: str
    value: Fraction

    def __str__(self):
        return f"{self.quantity} {self.relation} {exact_decimal_string(self.value)}"


def implied_bound(form: Form, dir: Direction, bound: Fraction) -> ImpliedBound:
    """
    Statement about a1 = x + y or a2 = x y + 2 proved by a valid certificate
    for the region {form dir bound}
    """
    form, dir, bound = Form(form), Direction(dir), Fraction(bound)
    if form == Form.SUM:
        if dir == Direction.GEQ:
            return ImpliedBound(quantity="a1_min", relation="<=", value=bound)
        return ImpliedBound(quantity="a1_max", relation=">=", value=bound)
    if dir == Direction.GEQ:
        return ImpliedBound(quantity="a2_min", relation="<=", value=bound + 2)
    return ImpliedBound(quantity="a2_max", relation=">=", value=bound + 2)
