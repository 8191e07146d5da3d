"""
Exact rational and working-precision real arithmetic

Every coefficient and coordinate enters the package as a decimal string and is
stored as a `fractions.Fraction`. Reals that need more than double precision
(minimizer polishing, certificate margins) are `BigReal` values: a `Decimal`
together with the number of significant digits it was computed at. All
rounding is round-half-even.
"""

import re
from dataclasses import dataclass
from decimal import Context, Decimal, ROUND_HALF_EVEN, localcontext
from fractions import Fraction
from functools import total_ordering
from typing import List, Optional, Sequence, Union

from .exceptions import InputError

Rational = Fraction

DEFAULT_DIGITS = 60
MIN_DIGITS = 30

_DECIMAL_PATTERN = re.compile(r"^([+-]?)(\d+)(?:\.(\d*))?$")
_RATIONAL_PATTERN = re.compile(r"^([+-]?\d+)\s*/\s*(\d+)$")

Number = Union[int, Fraction, Decimal, float, "BigReal"]


def parse_decimal(s: str) -> Fraction:
    """
    Parse a decimal string into the exact rational it denotes

    Args:
        s: optional sign, digits, optional fractional part ("-12.543")

    Returns:
        Fraction in lowest terms

    Raises:
        InputError: if the string is not a plain decimal
    """
    if not isinstance(s, str):
        raise InputError(f"expected a decimal string, got {type(s).__name__}")
    match = _DECIMAL_PATTERN.match(s.strip())
    if match is None:
        raise InputError(f"malformed decimal string: {s!r}")
    sign, whole, frac = match.groups()
    frac = frac or ""
    value = Fraction(int(whole + frac), 10 ** len(frac))
    return -value if sign == "-" else value


def parse_rational(s: str) -> Fraction:
    """Parse either "p/q" or a decimal string exactly"""
    if not isinstance(s, str):
        raise InputError(f"expected a rational string, got {type(s).__name__}")
    match = _RATIONAL_PATTERN.match(s.strip())
    if match is None:
        return parse_decimal(s)
    numerator, denominator = int(match.group(1)), int(match.group(2))
    if denominator == 0:
        raise InputError(f"zero denominator in {s!r}")
    return Fraction(numerator, denominator)


def working_context(digits: int) -> Context:
    """Decimal context with `digits` significant digits and round-half-even"""
    if digits < MIN_DIGITS:
        raise InputError(f"precision must be at least {MIN_DIGITS} digits, got {digits}")
    return Context(prec=digits, rounding=ROUND_HALF_EVEN, Emin=-999999, Emax=999999)


def to_decimal(value: Number, digits: int) -> Decimal:
    """Round any supported scalar to a Decimal at `digits` significant digits"""
    ctx = working_context(digits)
    if isinstance(value, BigReal):
        return ctx.plus(value.value)
    if isinstance(value, Fraction):
        return ctx.divide(Decimal(value.numerator), Decimal(value.denominator))
    if isinstance(value, (int, Decimal)):
        return ctx.plus(Decimal(value))
    if isinstance(value, float):
        # Decimal(float) is the exact binary value
        return ctx.plus(Decimal(value))
    raise InputError(f"cannot convert {type(value).__name__} to a real")


def to_rational(value: Number) -> Fraction:
    """Exact rational value of a Decimal, float, int or BigReal"""
    if isinstance(value, BigReal):
        return Fraction(value.value)
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


def decimal_string(value: Number, places: int = 16) -> str:
    """Fixed-point rendering with `places` digits after the point (half-even)"""
    digits = max(MIN_DIGITS, places + 40)
    with localcontext(working_context(digits)):
        d = to_decimal(value, digits)
        quantum = Decimal(1).scaleb(-places)
        return format(d.quantize(quantum, rounding=ROUND_HALF_EVEN), "f")


@total_ordering
@dataclass(frozen=True)
class BigReal:
    """A real number carried at a fixed number of significant decimal digits"""
    value: Decimal
    digits: int = DEFAULT_DIGITS

    def __post_init__(self):
        if self.digits < MIN_DIGITS:
            raise InputError(f"precision must be at least {MIN_DIGITS} digits, got {self.digits}")

    @classmethod
    def of(cls, value: Number, digits: int = DEFAULT_DIGITS) -> "BigReal":
        return cls(to_decimal(value, digits), digits)

    def _coerce(self, other: Number):
        if isinstance(other, BigReal):
            digits = min(self.digits, other.digits)
            return other.value, digits
        if isinstance(other, (int, Fraction, Decimal, float)):
            return to_decimal(other, self.digits), self.digits
        return None, None

    def _binary(self, other, op):
        rhs, digits = self._coerce(other)
        if rhs is None:
            return NotImplemented
        ctx = working_context(digits)
        return BigReal(getattr(ctx, op)(self.value, rhs), digits)

    def _reflected(self, other, op):
        lhs, digits = self._coerce(other)
        if lhs is None:
            return NotImplemented
        ctx = working_context(digits)
        return BigReal(getattr(ctx, op)(lhs, self.value), digits)

    def __add__(self, other):
        return self._binary(other, "add")

    def __radd__(self, other):
        return self._reflected(other, "add")

    def __sub__(self, other):
        return self._binary(other, "subtract")

    def __rsub__(self, other):
        return self._reflected(other, "subtract")

    def __mul__(self, other):
        return self._binary(other, "multiply")

    def __rmul__(self, other):
        return self._reflected(other, "multiply")

    def __truediv__(self, other):
        return self._binary(other, "divide")

    def __rtruediv__(self, other):
        return self._reflected(other, "divide")

    def __neg__(self):
        return BigReal(-self.value, self.digits)

    def __abs__(self):
        return BigReal(abs(self.value), self.digits)

    def __eq__(self, other):
        rhs, _ = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self.value == rhs

    def __lt__(self, other):
        rhs, _ = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self.value < rhs

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return float(self.value)

    def __str__(self):
        return str(self.value)

    def sqrt(self) -> "BigReal":
        return BigReal(working_context(self.digits).sqrt(self.value), self.digits)

    def to_rational(self) -> Fraction:
        return Fraction(self.value)


def to_bigreal(q: Fraction, digits: int = DEFAULT_DIGITS) -> BigReal:
    """
    Round a rational to `digits` significant digits

    Args:
        q: exact rational
        digits: working precision, at least 30

    Returns:
        BigReal with relative error at most 10^(1-digits)

    Raises:
        InputError: if digits < 30
    """
    if digits < MIN_DIGITS:
        raise InputError(f"precision must be at least {MIN_DIGITS} digits, got {digits}")
    return BigReal(to_decimal(Fraction(q), digits), digits)


def _row_reduce(rows: List[List[Fraction]], ncols: int):
    """In-place Gauss-Jordan elimination over the first `ncols` columns; returns pivot columns"""
    pivots = []
    r = 0
    for col in range(ncols):
        if r == len(rows):
            break
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][col]
        rows[r] = [v / lead for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    return pivots


def solve_exact(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """
    Solve a rational linear system by Gauss-Jordan elimination

    Args:
        matrix: m rows of n rationals
        rhs: m rationals

    Returns:
        (solution, rank, consistent): a particular solution with free
        variables set to zero (None when inconsistent), the rank of `matrix`
    """
    n = len(matrix[0]) if matrix else 0
    rows = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    pivots = _row_reduce(rows, n)
    rank = len(pivots)
    if any(row[-1] != 0 for row in rows[rank:]):
        return None, rank, False
    solution = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        solution[col] = rows[i][-1]
    return solution, rank, True


def nullspace_vector(matrix: Sequence[Sequence[Fraction]]) -> Optional[List[Fraction]]:
    """A nonzero rational vector v with matrix @ v = 0, or None if the columns are independent"""
    n = len(matrix[0]) if matrix else 0
    rows = [[Fraction(v) for v in row] for row in matrix]
    pivots = _row_reduce(rows, n)
    free = next((c for c in range(n) if c not in pivots), None)
    if free is None:
        return None
    vector = [Fraction(0)] * n
    vector[free] = Fraction(1)
    for i, col in enumerate(pivots):
        vector[col] = -rows[i][free]
    return vector
