"""
Exact bivariate polynomials

A `Poly2` is a sparse map from monomials x^dx y^dy to `Fraction` coefficients.
Zero coefficients are never stored, so two equal polynomials always have the
same term map. Evaluation is available in three scalar kinds: exact rationals,
`BigReal`/`Decimal` at a working precision, and float (scalars or numpy
arrays) for grid scans.
"""

import json
import logging
from decimal import Decimal, getcontext, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .exact import MIN_DIGITS, BigReal, parse_decimal, parse_rational, to_decimal, working_context
from .exceptions import InputError
from .utils import exact_decimal_string

logger = logging.getLogger(__name__)

_SUPERSCRIPTS = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


class Monomial(NamedTuple):
    """Exponent pair of x^dx y^dy"""
    dx: int
    dy: int

    def name(self, unicode: bool = False) -> str:
        return monomial_name(self.dx, self.dy, unicode=unicode)


def monomial_name(dx: int, dy: int, unicode: bool = False) -> str:
    """Render x^dx y^dy as "x^2*y" (or "x²y" when unicode=True)"""
    if dx == 0 and dy == 0:
        return "1"
    parts = []
    for var, exp in (("x", dx), ("y", dy)):
        if exp == 0:
            continue
        if exp == 1:
            parts.append(var)
        elif unicode:
            parts.append(var + str(exp).translate(_SUPERSCRIPTS))
        else:
            parts.append(f"{var}^{exp}")
    return ("" if unicode else "*").join(parts)


class PolyTermModel(BaseModel):
    """One term of the polynomial file format"""
    model_config = ConfigDict(extra="forbid")

    dx: int = Field(..., ge=0)
    dy: int = Field(..., ge=0)
    coeff: str


class PolyFileModel(BaseModel):
    """Polynomial file format: {"terms": [{"dx", "dy", "coeff"}, ...]}"""
    model_config = ConfigDict(extra="forbid")

    terms: List[PolyTermModel]


Scalar = Union[int, Fraction, Decimal, float, BigReal]


class Poly2:
    """Immutable sparse bivariate polynomial with exact rational coefficients"""

    __slots__ = ("_terms", "_hash", "_decimal_cache", "_derivatives")

    def __init__(self, terms: Optional[Mapping[Tuple[int, int], object]] = None):
        clean: Dict[Monomial, Fraction] = {}
        for (dx, dy), coeff in (terms or {}).items():
            if dx < 0 or dy < 0:
                raise InputError(f"negative exponent in monomial ({dx}, {dy})")
            value = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
            if value != 0:
                key = Monomial(int(dx), int(dy))
                clean[key] = clean.get(key, Fraction(0)) + value
                if clean[key] == 0:
                    del clean[key]
        self._terms = dict(sorted(clean.items()))
        self._hash = None
        self._decimal_cache: Dict[int, List[Tuple[int, int, Decimal]]] = {}
        self._derivatives: Dict[str, "Poly2"] = {}

    # construction

    @classmethod
    def zero(cls) -> "Poly2":
        return cls()

    @classmethod
    def constant(cls, c) -> "Poly2":
        return cls({(0, 0): c})

    @classmethod
    def x(cls) -> "Poly2":
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> "Poly2":
        return cls({(0, 1): 1})

    @classmethod
    def monomial(cls, dx: int, dy: int, coeff=1) -> "Poly2":
        return cls({(dx, dy): coeff})

    @classmethod
    def from_decimal_terms(cls, terms: Iterable[Tuple[int, int, str]]) -> "Poly2":
        """Build from (dx, dy, "decimal") triples; repeated monomials add up"""
        result: Dict[Tuple[int, int], Fraction] = {}
        for dx, dy, coeff in terms:
            result[(dx, dy)] = result.get((dx, dy), Fraction(0)) + parse_decimal(coeff)
        return cls(result)

    @classmethod
    def symmetric_from_table(cls, table: Iterable[Tuple[int, int, str]]) -> "Poly2":
        """
        Build a polynomial symmetric in x and y from its lower triangle

        Args:
            table: (i, j, "decimal") entries with j <= i, the coefficient of
                x^i y^j; the mirrored term x^j y^i gets the same coefficient

        Returns:
            Symmetric Poly2
        """
        result: Dict[Tuple[int, int], Fraction] = {}
        for i, j, coeff in table:
            if j > i:
                raise InputError(f"table entry x^{i} y^{j} lies above the diagonal")
            value = parse_decimal(coeff)
            result[(i, j)] = value
            result[(j, i)] = value
        return cls(result)

    @classmethod
    def from_json(cls, document: Union[str, dict]) -> "Poly2":
        """Parse the polynomial file format; unknown fields are rejected"""
        data = json.loads(document) if isinstance(document, str) else document
        model = PolyFileModel.model_validate(data)
        result: Dict[Tuple[int, int], Fraction] = {}
        for t in model.terms:
            key = (t.dx, t.dy)
            result[key] = result.get(key, Fraction(0)) + parse_rational(t.coeff)
        return cls(result)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Poly2":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_json(json.load(f))

    def to_json(self, places: int = 40) -> dict:
        """Polynomial file document; coefficients with finite decimal expansion are exact"""
        return {
            "terms": [
                {"dx": m.dx, "dy": m.dy, "coeff": exact_decimal_string(c, places)}
                for m, c in self._terms.items()
            ]
        }

    # inspection

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, dx: int, dy: int) -> Fraction:
        return self._terms.get(Monomial(dx, dy), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((m.dx + m.dy for m in self._terms), default=0)

    def max_exponents(self) -> Tuple[int, int]:
        return (
            max((m.dx for m in self._terms), default=0),
            max((m.dy for m in self._terms), default=0),
        )

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if isinstance(other, Poly2):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Poly2.constant(other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"Poly2({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        pieces = []
        for m, c in sorted(self._terms.items(), key=lambda kv: (kv[0].dx + kv[0].dy, -kv[0].dx)):
            name = monomial_name(m.dx, m.dy)
            text = str(c) if name == "1" else (name if c == 1 else f"-{name}" if c == -1 else f"{c}*{name}")
            pieces.append(text)
        return " + ".join(pieces).replace("+ -", "- ")

    # arithmetic

    def __add__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        merged = dict(self._terms)
        for m, c in other._terms.items():
            merged[m] = merged.get(m, Fraction(0)) + c
        return Poly2(merged)

    __radd__ = __add__

    def __neg__(self):
        return Poly2({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly2({m: c * other for m, c in self._terms.items()})
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        product: Dict[Tuple[int, int], Fraction] = {}
        for (ax, ay), ac in self._terms.items():
            for (bx, by), bc in other._terms.items():
                key = (ax + bx, ay + by)
                product[key] = product.get(key, Fraction(0)) + ac * bc
        return Poly2(product)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise InputError("polynomial powers must be nonnegative integers")
        result = Poly2.constant(1)
        for _ in range(n):
            result = result * self
        return result

    # calculus and symmetry

    def gradient(self) -> Tuple["Poly2", "Poly2"]:
        """Exact partial derivatives (d/dx, d/dy)"""
        if "x" not in self._derivatives:
            self._derivatives["x"] = Poly2(
                {(m.dx - 1, m.dy): c * m.dx for m, c in self._terms.items() if m.dx > 0}
            )
            self._derivatives["y"] = Poly2(
                {(m.dx, m.dy - 1): c * m.dy for m, c in self._terms.items() if m.dy > 0}
            )
        return self._derivatives["x"], self._derivatives["y"]

    def hessian(self) -> Tuple["Poly2", "Poly2", "Poly2"]:
        """Exact second derivatives (xx, xy, yy)"""
        px, py = self.gradient()
        pxx, pxy = px.gradient()
        _, pyy = py.gradient()
        return pxx, pxy, pyy

    def swap_xy(self) -> "Poly2":
        return Poly2({(m.dy, m.dx): c for m, c in self._terms.items()})

    def reflect(self, sign_x: int, sign_y: int) -> "Poly2":
        """Substitute (sign_x * x, sign_y * y) with signs in {+1, -1}"""
        if sign_x not in (1, -1) or sign_y not in (1, -1):
            raise InputError("reflection signs must be +1 or -1")
        return Poly2(
            {m: c * (sign_x ** m.dx) * (sign_y ** m.dy) for m, c in self._terms.items()}
        )

    # evaluation

    def evaluate(self, x: Scalar, y: Scalar):
        """Evaluate in the scalar kind of the inputs (Fraction/int, Decimal, BigReal, float)"""
        if isinstance(x, BigReal) or isinstance(y, BigReal):
            digits = min(v.digits for v in (x, y) if isinstance(v, BigReal))
            return eval(self, BigReal.of(x, digits), BigReal.of(y, digits))
        if isinstance(x, Decimal) or isinstance(y, Decimal):
            digits = max(getcontext().prec, MIN_DIGITS)
            return self.eval_decimal(to_decimal(x, digits), to_decimal(y, digits), digits)
        if isinstance(x, float) or isinstance(y, float):
            return self.eval_float(float(x), float(y))
        return self.eval_exact(Fraction(x), Fraction(y))

    def eval_exact(self, x: Fraction, y: Fraction) -> Fraction:
        """Exact rational evaluation"""
        max_dx, max_dy = self.max_exponents()
        xp = _powers(Fraction(x), max_dx, Fraction(1))
        yp = _powers(Fraction(y), max_dy, Fraction(1))
        return sum((c * xp[m.dx] * yp[m.dy] for m, c in self._terms.items()), Fraction(0))

    def _decimal_terms(self, digits: int) -> List[Tuple[int, int, Decimal]]:
        cached = self._decimal_cache.get(digits)
        if cached is None:
            cached = [(m.dx, m.dy, to_decimal(c, digits)) for m, c in self._terms.items()]
            self._decimal_cache[digits] = cached
        return cached

    def eval_decimal(self, x: Decimal, y: Decimal, digits: int) -> Decimal:
        """Evaluation in a round-half-even context of `digits` significant digits"""
        terms = self._decimal_terms(digits)
        max_dx, max_dy = self.max_exponents()
        with localcontext(working_context(digits)):
            xp = _powers(+x, max_dx, Decimal(1))
            yp = _powers(+y, max_dy, Decimal(1))
            total = Decimal(0)
            for dx, dy, c in terms:
                total += c * xp[dx] * yp[dy]
            return +total

    def eval_float(self, x: float, y: float) -> float:
        max_dx, max_dy = self.max_exponents()
        xp = _powers(x, max_dx, 1.0)
        yp = _powers(y, max_dy, 1.0)
        return float(sum(float(c) * xp[m.dx] * yp[m.dy] for m, c in self._terms.items()))

    def eval_array(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Vectorised float evaluation over matching arrays of coordinates"""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        max_dx, max_dy = self.max_exponents()
        xp = _powers(xs, max_dx, np.ones_like(xs))
        yp = _powers(ys, max_dy, np.ones_like(ys))
        total = np.zeros(np.broadcast(xs, ys).shape)
        for m, c in self._terms.items():
            total = total + float(c) * xp[m.dx] * yp[m.dy]
        return total

    def coefficient_bound(self, mx: Fraction, my: Fraction) -> Fraction:
        """Sum of |c| * mx^dx * my^dy: bounds |p| on the rectangle |x| <= mx, |y| <= my"""
        return sum(
            (abs(c) * (mx ** m.dx) * (my ** m.dy) for m, c in self._terms.items()),
            Fraction(0),
        )


def _powers(base, n: int, one):
    result = [one]
    for _ in range(n):
        result.append(result[-1] * base)
    return result


def _as_poly(value) -> Optional[Poly2]:
    if isinstance(value, Poly2):
        return value
    if isinstance(value, (int, Fraction)):
        return Poly2.constant(value)
    return None


def eval(p: Poly2, x: BigReal, y: BigReal) -> BigReal:
    """
    Evaluate at working precision

    Args:
        p: polynomial
        x, y: coordinates; the smaller of their precisions is used

    Returns:
        BigReal value, each operation rounded half-even
    """
    digits = min(x.digits, y.digits)
    return BigReal(p.eval_decimal(x.value, y.value, digits), digits)


def add(p: Poly2, q: Poly2) -> Poly2:
    return p + q


def scale(p: Poly2, c: Fraction) -> Poly2:
    return p * Fraction(c)


def mul(p: Poly2, q: Poly2) -> Poly2:
    return p * q


def gradient(p: Poly2) -> Tuple[Poly2, Poly2]:
    return p.gradient()


def swap_xy(p: Poly2) -> Poly2:
    return p.swap_xy()


def reflect(p: Poly2, sign_x: int, sign_y: int) -> Poly2:
    return p.reflect(sign_x, sign_y)


def product(factors: Sequence[Poly2]) -> Poly2:
    result = Poly2.constant(1)
    for f in factors:
        result = result * f
    return result


def identity_mismatch(
    lhs_factors: Sequence[Poly2], rhs: Poly2
) -> Optional[Tuple[Monomial, Fraction, Fraction]]:
    """First monomial where the expanded product differs from rhs, or None"""
    lhs = product(lhs_factors)
    for m in sorted(set(lhs.terms) | set(rhs.terms)):
        if lhs.coeff(*m) != rhs.coeff(*m):
            return m, lhs.coeff(*m), rhs.coeff(*m)
    return None


def check_identity(lhs_factors: Sequence[Poly2], rhs: Poly2) -> bool:
    """True iff the product of the factors equals rhs coefficient-wise"""
    return identity_mismatch(lhs_factors, rhs) is None


def dump(p: Poly2, path: Union[str, Path]) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as f:
        json.dump(p.to_json(), f, indent=2)
    logger.info(f"Polynomial with {len(p)} terms written to {out}")
    return out
