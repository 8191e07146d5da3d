"""
Moment systems for the two trace distributions

Case A (generic surface): five symmetric features of the pair of traces
(s, t), whose limiting averages follow from the pole orders of five
L-functions. Case B (B[C2] type): 32 monomials x^k y^l with Catalan-product
averages. Expectations are exact rationals and are refused for polynomials
that need an unknown moment.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exact import BigReal, solve_exact
from .exceptions import InputError, UnderdeterminedError, UnknownMomentError
from .poly import Monomial, Poly2, monomial_name

logger = logging.getLogger(__name__)

A5 = "A5"
B32 = "B32"

# Column order of the 32-dimensional feature map, frozen.
B32_ORDER: Tuple[Tuple[int, int], ...] = (
    (1, 0), (0, 1),
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
    (4, 0), (3, 1), (2, 2), (1, 3), (0, 4),
    (5, 0), (4, 1), (3, 2), (2, 3), (1, 4), (0, 5),
    (6, 0), (4, 2), (3, 3), (2, 4), (0, 6),
    (7, 0), (4, 3), (3, 4), (0, 7),
    (8, 0), (4, 4), (0, 8),
)


@dataclass(frozen=True)
class MomentBasis:
    """Ordered feature polynomials whose limiting averages are known"""
    id: str
    features: Tuple[Poly2, ...]
    names: Tuple[str, ...]
    unicode_names: Tuple[str, ...]
    _monomial_index: Dict[Monomial, int] = field(default_factory=dict, compare=False, repr=False)

    def __len__(self):
        return len(self.features)

    @property
    def dimension(self) -> int:
        return len(self.features)

    @property
    def is_monomial(self) -> bool:
        return bool(self._monomial_index)

    def decompose(self, p: Poly2) -> Tuple[Fraction, List[Fraction]]:
        """
        Write p as c0 + sum c_k * feature_k

        Args:
            p: polynomial in x, y

        Returns:
            (c0, [c_k]) exact

        Raises:
            UnknownMomentError: If p is not in span(features, 1)
        """
        if self.is_monomial:
            coeffs = [Fraction(0)] * len(self)
            constant = Fraction(0)
            for m, c in p.items():
                if m == (0, 0):
                    constant = c
                    continue
                index = self._monomial_index.get(m)
                if index is None:
                    raise UnknownMomentError(monomial_name(*m))
                coeffs[index] = c
            return constant, coeffs

        constant_poly = Poly2.constant(1)
        columns = [constant_poly] + list(self.features)
        support = set(p.terms)
        for f in columns:
            support |= set(f.terms)
        monomials = sorted(support)
        matrix = [[f.coeff(*m) for f in columns] for m in monomials]
        rhs = [p.coeff(*m) for m in monomials]
        solution, _, consistent = solve_exact(matrix, rhs)
        if not consistent:
            known = set()
            for f in columns:
                known |= set(f.terms)
            offending = next((m for m in sorted(p.terms) if m not in known), None)
            if offending is None:
                offending = sorted(p.terms)[0]
            raise UnknownMomentError(
                monomial_name(*offending),
                f"polynomial is not in the span of the {self.id} features "
                f"(offending monomial {monomial_name(*offending)})",
            )
        return solution[0], solution[1:]


def _monomial_basis() -> MomentBasis:
    features = tuple(Poly2.monomial(dx, dy) for dx, dy in B32_ORDER)
    return MomentBasis(
        id=B32,
        features=features,
        names=tuple(monomial_name(dx, dy) for dx, dy in B32_ORDER),
        unicode_names=tuple(monomial_name(dx, dy, unicode=True) for dx, dy in B32_ORDER),
        _monomial_index={Monomial(dx, dy): i for i, (dx, dy) in enumerate(B32_ORDER)},
    )


def _symmetric_basis() -> MomentBasis:
    s, t = Poly2.x(), Poly2.y()
    features = (s + t, s * t, s * s + t * t, s * s * t + s * t * t, s * s * t * t)
    return MomentBasis(
        id=A5,
        features=features,
        names=("s+t", "s*t", "s^2+t^2", "s^2*t+s*t^2", "s^2*t^2"),
        unicode_names=("s+t", "st", "s²+t²", "s²t+st²", "s²t²"),
    )


BASIS_B32 = _monomial_basis()
BASIS_A5 = _symmetric_basis()


def basis_for_case(case: str) -> MomentBasis:
    case = case.upper()
    if case in ("A", A5):
        return BASIS_A5
    if case in ("B", B32):
        return BASIS_B32
    raise InputError(f"unknown case {case!r}; expected 'a' or 'b'")


@dataclass(frozen=True)
class MomentVector:
    """Known limiting averages of a basis' features"""
    basis: MomentBasis
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.values) != len(self.basis):
            raise InputError(
                f"moment vector has {len(self.values)} values for a basis of {len(self.basis)}"
            )

    def __len__(self):
        return len(self.values)

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(zip(self.basis.names, self.values))


@dataclass(frozen=True)
class ConstraintSpec:
    """Trace polynomials with the pole order of their L-function at s = 1"""
    entries: Tuple[Tuple[Poly2, int], ...]

    def __post_init__(self):
        for _, order in self.entries:
            if order < 0:
                raise InputError("pole orders are nonnegative")


def catalan(n: int) -> Fraction:
    """n-th Catalan number binom(2n, n) / (n + 1)"""
    if n < 0:
        raise InputError("Catalan index must be nonnegative")
    return Fraction(comb(2 * n, n), n + 1)


def haar_moment_b(k: int, l: int) -> Fraction:
    """Limiting average of x^k y^l for independent semicircle traces"""
    if k < 0 or l < 0:
        raise InputError("moment exponents must be nonnegative")
    if k % 2 or l % 2:
        return Fraction(0)
    return catalan(k // 2) * catalan(l // 2)


def is_known_monomial_b(k: int, l: int) -> bool:
    """Both exponents at most 4, or one of them zero and the other at most 8"""
    if (k, l) == (0, 0) or k < 0 or l < 0:
        return False
    return (k <= 4 and l <= 4) or (k == 0 and l <= 8) or (l == 0 and k <= 8)


def known_monomials_b() -> List[Monomial]:
    """The 32 known monomials in feature-map order"""
    return [Monomial(dx, dy) for dx, dy in B32_ORDER]


def target_b() -> MomentVector:
    return MomentVector(BASIS_B32, tuple(haar_moment_b(dx, dy) for dx, dy in B32_ORDER))


def generic_constraint_spec() -> ConstraintSpec:
    """Traces of V, W, V⊗V, V⊗W, W⊗W with their pole orders"""
    s, t = Poly2.x(), Poly2.y()
    tr_v = s + t
    tr_w = s * t + 1
    return ConstraintSpec(
        entries=(
            (tr_v, 0),
            (tr_w, 0),
            (tr_v * tr_v, 1),
            (tr_v * tr_w, 0),
            (tr_w * tr_w, 1),
        )
    )


def constraints_from_poles(spec: ConstraintSpec, basis: Optional[MomentBasis] = None) -> MomentVector:
    """
    Translate pole orders into feature expectations

    Each entry says E[trace_poly] = pole_order; trace polynomials are written
    over (basis features, 1) and the resulting linear system is solved exactly.

    Raises:
        UnknownMomentError: If a trace polynomial is not in the span
        UnderdeterminedError: If some feature expectation is not pinned down
        InputError: If the constraints contradict each other
    """
    basis = basis or BASIS_A5
    matrix, rhs = [], []
    for trace_poly, order in spec.entries:
        constant, coeffs = basis.decompose(trace_poly)
        matrix.append(coeffs)
        rhs.append(Fraction(order) - constant)
    if not matrix:
        raise UnderdeterminedError("underdetermined: no constraints given")
    solution, rank, consistent = solve_exact(matrix, rhs)
    if not consistent:
        raise InputError("inconsistent pole-order constraints")
    if rank < len(basis):
        raise UnderdeterminedError(
            f"underdetermined: {len(spec.entries)} constraints of rank {rank} "
            f"for {len(basis)} features"
        )
    logger.debug(f"Pole orders give expectations {[str(v) for v in solution]}")
    return MomentVector(basis, tuple(solution))


def target_a() -> MomentVector:
    return constraints_from_poles(generic_constraint_spec(), BASIS_A5)


def target_for_case(case: str) -> MomentVector:
    basis = basis_for_case(case)
    return target_b() if basis is BASIS_B32 else target_a()


def expectation(p: Poly2, m: MomentVector) -> Fraction:
    """
    Exact limiting average of p under the known moments

    Raises:
        UnknownMomentError: If p needs a moment outside the basis
    """
    constant, coeffs = m.basis.decompose(p)
    return constant + sum((c * v for c, v in zip(coeffs, m.values)), Fraction(0))


Scalar = Union[int, Fraction, float, BigReal]


def featurize(x: Scalar, y: Scalar, basis: MomentBasis) -> List:
    """Feature values at (x, y), in the scalar kind of the inputs"""
    return [f.evaluate(x, y) for f in basis.features]


def feature_matrix(xs: np.ndarray, ys: np.ndarray, basis: MomentBasis) -> np.ndarray:
    """Float feature values for arrays of points, one row per point"""
    return np.column_stack([f.eval_array(xs, ys) for f in basis.features])


def featurize_symmetric(e1: Fraction, e2: Fraction) -> List[Fraction]:
    """A5 features of a pair with s + t = e1 and s t = e2"""
    return [e1, e2, e1 * e1 - 2 * e2, e1 * e2, e2 * e2]


def a1_a2(x, y):
    """Frobenius coefficients a1 = x + y and a2 = x y + 2"""
    return x + y, x * y + 2


def sample_semicircle(rng: np.random.Generator) -> float:
    """One accept-reject draw from the density sqrt(4 - x^2) / (2 pi) on [-2, 2]"""
    while True:
        x = rng.uniform(-2.0, 2.0)
        # uniform envelope; acceptance ratio sqrt(4 - x^2) / 2
        if rng.uniform(0.0, 1.0) * 2.0 <= np.sqrt(4.0 - x * x):
            return float(x)


class SemicircleSampler:
    """Vectorised semicircle sampler owning its generator"""

    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def sample(self) -> float:
        return sample_semicircle(self.rng)

    def sample_array(self, n: int) -> np.ndarray:
        out = np.empty(0)
        while out.size < n:
            batch = max(1024, int((n - out.size) * 1.4))
            xs = self.rng.uniform(-2.0, 2.0, batch)
            us = self.rng.uniform(0.0, 1.0, batch)
            out = np.concatenate([out, xs[us * 2.0 <= np.sqrt(4.0 - xs * xs)]])
        return out[:n]


def monte_carlo_moments(n: int, seed: int = 0) -> List[float]:
    """Empirical averages of the 32 known monomials over n independent pairs"""
    sampler = SemicircleSampler(seed)
    xs = sampler.sample_array(n)
    ys = sampler.sample_array(n)
    return [float(np.mean(xs ** dx * ys ** dy)) for dx, dy in B32_ORDER]


def format_basis_table(m: MomentVector) -> List[Tuple[str, Fraction]]:
    return list(zip(m.basis.unicode_names, m.values))
