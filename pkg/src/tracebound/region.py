"""
Regions of the trace plane

A region is the box [lo, hi]^2 (default [-2, 2]^2) cut by at most one
constraint of the form x + y >= u, x + y <= u, x y >= v or x y <= v.
Membership is decided exactly for rational points. The boundary of a
region is exposed as one-dimensional segments, each parametrised by a
single coordinate t, which the minimizer polishes along.
"""

import json
import logging
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .exact import BigReal, Number, parse_decimal, parse_rational, to_rational
from .exceptions import InputError
from .utils import exact_decimal_string

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, Fraction]


class Form(str, Enum):
    SUM = "sum"
    PRODUCT = "product"


class Direction(str, Enum):
    GEQ = "geq"
    LEQ = "leq"


@dataclass(frozen=True)
class Constraint:
    """One half-plane (sum) or hyperbolic (product) cut"""
    form: Form
    dir: Direction
    bound: Fraction

    def value(self, x, y):
        return x + y if self.form == Form.SUM else x * y

    def slack(self, x, y):
        """Signed distance past the bound; nonnegative inside"""
        v = self.value(x, y)
        return v - self.bound if self.dir == Direction.GEQ else self.bound - v

    def describe(self, unicode: bool = False) -> str:
        lhs = "x+y" if self.form == Form.SUM else "xy" if unicode else "x*y"
        op = (">=" if self.dir == Direction.GEQ else "<=") if not unicode else ("≥" if self.dir == Direction.GEQ else "≤")
        return f"{lhs} {op} {_render(self.bound)}"


def _render(q: Fraction) -> str:
    return exact_decimal_string(q)


@dataclass(frozen=True)
class Region:
    """The box [x_lo, x_hi] x [y_lo, y_hi] intersected with an optional constraint"""
    x_range: Tuple[Fraction, Fraction] = (Fraction(-2), Fraction(2))
    y_range: Tuple[Fraction, Fraction] = (Fraction(-2), Fraction(2))
    constraint: Optional[Constraint] = None

    def __post_init__(self):
        for lo, hi in (self.x_range, self.y_range):
            if not lo < hi:
                raise InputError(f"box side [{lo}, {hi}] must have lo < hi")

    @classmethod
    def box(cls, lo=-2, hi=2) -> "Region":
        return cls((Fraction(lo), Fraction(hi)), (Fraction(lo), Fraction(hi)))

    @classmethod
    def make(cls, form: Union[Form, str], dir: Union[Direction, str], bound, lo=-2, hi=2) -> "Region":
        bound = parse_rational(bound) if isinstance(bound, str) else Fraction(bound)
        return cls(
            (Fraction(lo), Fraction(hi)),
            (Fraction(lo), Fraction(hi)),
            Constraint(Form(form), Direction(dir), bound),
        )

    def with_bound(self, bound: Fraction) -> "Region":
        if self.constraint is None:
            raise InputError("region has no constraint to move")
        c = self.constraint
        return Region(self.x_range, self.y_range, Constraint(c.form, c.dir, Fraction(bound)))

    def corners(self) -> List[Point]:
        return [(x, y) for x in self.x_range for y in self.y_range]

    def describe(self, unicode: bool = False) -> str:
        box = f"[{_render(self.x_range[0])}, {_render(self.x_range[1])}] x [{_render(self.y_range[0])}, {_render(self.y_range[1])}]"
        if self.constraint is None:
            return box
        return f"{box}, {self.constraint.describe(unicode)}"

    def to_json(self) -> dict:
        c = self.constraint
        return {
            "box": [[_render(v) for v in self.x_range], [_render(v) for v in self.y_range]],
            "constraint": None if c is None else {
                "form": c.form.value, "dir": c.dir.value, "bound": _render(c.bound)
            },
        }


class ConstraintModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    form: Literal["sum", "product"]
    dir: Literal["geq", "leq"]
    bound: str


class RegionFileModel(BaseModel):
    """Region file format"""
    model_config = ConfigDict(extra="forbid")

    box: List[List[Union[int, str]]] = Field(default_factory=lambda: [[-2, 2], [-2, 2]])
    constraint: Optional[ConstraintModel] = None


def _box_value(v: Union[int, str]) -> Fraction:
    return Fraction(v) if isinstance(v, int) else parse_rational(v)


def region_from_json(document: Union[str, dict]) -> Region:
    data = json.loads(document) if isinstance(document, str) else document
    model = RegionFileModel.model_validate(data)
    if len(model.box) != 2 or any(len(side) != 2 for side in model.box):
        raise InputError("box must be [[x_lo, x_hi], [y_lo, y_hi]]")
    x_range = tuple(_box_value(v) for v in model.box[0])
    y_range = tuple(_box_value(v) for v in model.box[1])
    constraint = None
    if model.constraint is not None:
        constraint = Constraint(
            Form(model.constraint.form),
            Direction(model.constraint.dir),
            parse_rational(model.constraint.bound),
        )
    return Region(x_range, y_range, constraint)


_INLINE = re.compile(r"^\s*(sum|product)\s*(>=|<=)\s*(\S+)\s*$", re.IGNORECASE)


def parse_inline(text: str) -> Region:
    """Parse "sum>=-2.47", "product<=-2/3" or "box" into a region on [-2, 2]^2"""
    if text.strip().lower() in ("box", "full", "none"):
        return Region.box()
    match = _INLINE.match(text)
    if match is None:
        raise InputError(f"cannot parse region {text!r}; expected e.g. 'sum>=-2.47' or 'product<=-2/3'")
    form, op, bound = match.groups()
    return Region.make(form.lower(), "geq" if op == ">=" else "leq", parse_rational(bound))


def load_region(source: str) -> Region:
    """Region from a JSON file path, or from the inline syntax"""
    path = Path(source)
    if path.suffix.lower() == ".json" or path.exists():
        if not path.exists():
            raise InputError(f"region file not found: {source}")
        with path.open("r", encoding="utf-8") as f:
            return region_from_json(json.load(f))
    return parse_inline(source)


def contains(r: Region, x: Number, y: Number, tol: Number = 0) -> bool:
    """
    Exact membership test

    Every scalar kind is converted to its exact rational value first, so the
    test is exact for rational inputs and faithful for BigReal/float inputs.
    """
    xq, yq, tq = to_rational(x), to_rational(y), to_rational(tol)
    (xlo, xhi), (ylo, yhi) = r.x_range, r.y_range
    if xq < xlo - tq or xq > xhi + tq or yq < ylo - tq or yq > yhi + tq:
        return False
    if r.constraint is None:
        return True
    return r.constraint.slack(xq, yq) >= -tq


def contains_array(r: Region, xs: np.ndarray, ys: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Float membership mask for arrays of points"""
    (xlo, xhi), (ylo, yhi) = [tuple(float(v) for v in side) for side in (r.x_range, r.y_range)]
    mask = (xs >= xlo - tol) & (xs <= xhi + tol) & (ys >= ylo - tol) & (ys <= yhi + tol)
    c = r.constraint
    if c is not None:
        value = xs + ys if c.form == Form.SUM else xs * ys
        bound = float(c.bound)
        mask &= (value >= bound - tol) if c.dir == Direction.GEQ else (value <= bound + tol)
    return mask


def is_empty(r: Region) -> bool:
    """True iff no point of the box satisfies the constraint"""
    c = r.constraint
    if c is None:
        return False
    # sums and products over a box attain their extremes at corners
    values = [c.value(x, y) for x, y in r.corners()]
    if c.dir == Direction.GEQ:
        return max(values) < c.bound
    return min(values) > c.bound


def _require_nonempty(r: Region):
    if is_empty(r):
        raise InputError(f"region {r.describe()} is empty")


def reflect(r: Region, sign_x: int, sign_y: int) -> Region:
    """
    Image of a region under (x, y) -> (sign_x x, sign_y y)

    Sum constraints need (-1, -1); product constraints need exactly one sign
    flipped. Any other combination does not map the constraint to a region
    of the same kind.
    """
    if sign_x not in (1, -1) or sign_y not in (1, -1):
        raise InputError("reflection signs must be +1 or -1")

    def flip(side, sign):
        lo, hi = side
        return (lo, hi) if sign == 1 else (-hi, -lo)

    c = r.constraint
    new_c = None
    if c is not None:
        if c.form == Form.SUM and (sign_x, sign_y) != (-1, -1):
            raise InputError("sum regions reflect only under (-1, -1)")
        if c.form == Form.PRODUCT and sign_x * sign_y != -1:
            raise InputError("product regions reflect only under (-1, +1) or (+1, -1)")
        new_dir = Direction.LEQ if c.dir == Direction.GEQ else Direction.GEQ
        new_c = Constraint(c.form, new_dir, -c.bound)
    return Region(flip(r.x_range, sign_x), flip(r.y_range, sign_y), new_c)


def _lattice(lo: Fraction, hi: Fraction, n: int) -> List[Fraction]:
    return [lo + (hi - lo) * Fraction(i, n - 1) for i in range(n)]


def boundary_points(r: Region, xs: Sequence[Fraction], ys: Sequence[Fraction]) -> List[Point]:
    """Points on the constraint curve above/beside the given lattice lines"""
    c = r.constraint
    if c is None:
        return []
    (xlo, xhi), (ylo, yhi) = r.x_range, r.y_range
    points: List[Point] = []
    if c.form == Form.SUM:
        points += [(x, c.bound - x) for x in xs if ylo <= c.bound - x <= yhi]
        points += [(c.bound - y, y) for y in ys if xlo <= c.bound - y <= xhi]
    elif c.bound == 0:
        if xlo <= 0 <= xhi:
            points += [(Fraction(0), y) for y in ys]
        if ylo <= 0 <= yhi:
            points += [(x, Fraction(0)) for x in xs]
    else:
        points += [(x, c.bound / x) for x in xs if x != 0 and ylo <= c.bound / x <= yhi]
        points += [(c.bound / y, y) for y in ys if y != 0 and xlo <= c.bound / y <= xhi]
    return points


def grid(r: Region, n: int) -> List[Point]:
    """
    Exact lattice points of the region plus boundary samples

    Args:
        r: region
        n: points per box side, at least 2

    Returns:
        Sorted, deduplicated rational points, all inside r

    Raises:
        InputError: If n < 2 or the region is empty
    """
    if n < 2:
        raise InputError("grid needs at least 2 points per side")
    _require_nonempty(r)
    xs = _lattice(*r.x_range, n)
    ys = _lattice(*r.y_range, n)
    candidates = [(x, y) for x in xs for y in ys]
    candidates += boundary_points(r, xs, ys)
    candidates += r.corners()
    points = sorted({p for p in candidates if contains(r, p[0], p[1])})
    logger.debug(f"grid({r.describe()}, {n}) has {len(points)} points")
    return points


def grid_arrays(r: Region, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Float version of grid() for seeding searches over large n"""
    if n < 2:
        raise InputError("grid needs at least 2 points per side")
    _require_nonempty(r)
    (xlo, xhi), (ylo, yhi) = [tuple(float(v) for v in side) for side in (r.x_range, r.y_range)]
    gx, gy = np.meshgrid(np.linspace(xlo, xhi, n), np.linspace(ylo, yhi, n), indexing="ij")
    xs, ys = [gx.ravel()], [gy.ravel()]
    c = r.constraint
    if c is not None:
        line = np.linspace(xlo, xhi, 4 * n)
        bound = float(c.bound)
        if c.form == Form.SUM:
            xs.append(line)
            ys.append(bound - line)
        elif bound == 0:
            xs += [np.zeros(4 * n), line]
            ys += [np.linspace(ylo, yhi, 4 * n), np.zeros(4 * n)]
        else:
            nonzero = line[line != 0]
            xs.append(nonzero)
            ys.append(bound / nonzero)
            yline = np.linspace(ylo, yhi, 4 * n)
            yline = yline[yline != 0]
            xs.append(bound / yline)
            ys.append(yline)
    x_all, y_all = np.concatenate(xs), np.concatenate(ys)
    mask = contains_array(r, x_all, y_all, tol=1e-12)
    return x_all[mask], y_all[mask]


# one-dimensional strata


@dataclass(frozen=True)
class Segment:
    """
    A boundary piece parametrised by t in [t_lo, t_hi]

    kind is "fixed_x" (x = c, y = t), "fixed_y" (x = t, y = c),
    "sum" (x = t, y = c - t) or "product" (x = t, y = c / t).
    """
    kind: str
    c: Fraction
    t_lo: Fraction
    t_hi: Fraction
    active: Tuple[str, ...]

    def point(self, t):
        if self.kind == "fixed_x":
            return self.c + 0 * t, t
        if self.kind == "fixed_y":
            return t, self.c + 0 * t
        if self.kind == "sum":
            return t, self.c - t
        return t, self.c / t

    def derivatives(self, t):
        """(x', y', x'', y'') with respect to t"""
        zero = 0 * t
        if self.kind == "fixed_x":
            return zero, zero + 1, zero, zero
        if self.kind == "fixed_y":
            return zero + 1, zero, zero, zero
        if self.kind == "sum":
            return zero + 1, zero - 1, zero, zero
        return zero + 1, -self.c / (t * t), zero, 2 * self.c / (t * t * t)

    def endpoints(self) -> List[Point]:
        return [self.point(self.t_lo), self.point(self.t_hi)]


def _feasible_interval(lo: Fraction, hi: Fraction, cuts) -> Optional[Tuple[Fraction, Fraction]]:
    """Intersect [lo, hi] with cuts a * t <= b"""
    for a, b in cuts:
        if a == 0:
            if b < 0:
                return None
        elif a > 0:
            hi = min(hi, b / a)
        else:
            lo = max(lo, b / a)
    return (lo, hi) if lo <= hi else None


def _constraint_cuts_on_line(c: Optional[Constraint], fixed: Fraction):
    """Cuts a * t <= b expressing the constraint along an edge"""
    if c is None:
        return []
    sign = -1 if c.dir == Direction.GEQ else 1
    # value along the edge is alpha * t + beta
    if c.form == Form.SUM:
        alpha, beta = Fraction(1), fixed
    else:
        alpha, beta = fixed, Fraction(0)
    # GEQ: alpha t + beta >= bound  <=>  -alpha t <= beta - bound
    return [(sign * alpha, sign * (c.bound - beta))]


def strata(r: Region) -> List[Segment]:
    """
    The one-dimensional boundary pieces of a region

    Four box edges restricted to their feasible parts, then the constraint
    curve clipped to the box: a segment of x + y = u, the branches of
    x y = v, or the coordinate axes when v = 0.
    """
    _require_nonempty(r)
    (xlo, xhi), (ylo, yhi) = r.x_range, r.y_range
    c = r.constraint
    pieces: List[Segment] = []
    for label, x0 in (("x=lo", xlo), ("x=hi", xhi)):
        span = _feasible_interval(ylo, yhi, _constraint_cuts_on_line(c, x0))
        if span:
            pieces.append(Segment("fixed_x", x0, span[0], span[1], (label,)))
    for label, y0 in (("y=lo", ylo), ("y=hi", yhi)):
        span = _feasible_interval(xlo, xhi, _constraint_cuts_on_line(c, y0))
        if span:
            pieces.append(Segment("fixed_y", y0, span[0], span[1], (label,)))
    if c is None:
        return pieces
    if c.form == Form.SUM:
        span = _feasible_interval(xlo, xhi, [(Fraction(1), c.bound - ylo), (Fraction(-1), yhi - c.bound)])
        if span:
            pieces.append(Segment("sum", c.bound, span[0], span[1], ("constraint",)))
    elif c.bound == 0:
        if xlo <= 0 <= xhi:
            pieces.append(Segment("fixed_x", Fraction(0), ylo, yhi, ("constraint",)))
        if ylo <= 0 <= yhi:
            pieces.append(Segment("fixed_y", Fraction(0), xlo, xhi, ("constraint",)))
    else:
        v = c.bound
        for lo, hi, positive in ((max(xlo, Fraction(0)), xhi, True), (xlo, min(xhi, Fraction(0)), False)):
            if lo > hi:
                continue
            # ylo <= v / t <= yhi, multiplied through by t
            if positive:
                cuts = [(ylo, v), (-yhi, -v)]
            else:
                cuts = [(-ylo, -v), (yhi, v)]
            span = _feasible_interval(lo, hi, cuts)
            if span and span[0] != 0 and span[1] != 0:
                pieces.append(Segment("product", v, span[0], span[1], ("constraint",)))
    return pieces


def vertices(r: Region) -> List[Point]:
    """Endpoints of every stratum: box corners in r and constraint/edge crossings"""
    points = {p for seg in strata(r) for p in seg.endpoints()}
    points |= {p for p in r.corners() if contains(r, *p)}
    return sorted(points)


def snap(r: Region, x: Number, y: Number, max_denominator: int = 10 ** 12) -> Optional[Point]:
    """
    A nearby rational point of r

    Rounds to rationals of bounded denominator, then moves the point onto the
    constraint curve or clamps it into the box when rounding pushed it out.
    Returns None if no nearby point is found.
    """
    xq = to_rational(x).limit_denominator(max_denominator)
    yq = to_rational(y).limit_denominator(max_denominator)
    (xlo, xhi), (ylo, yhi) = r.x_range, r.y_range
    xq = min(max(xq, xlo), xhi)
    yq = min(max(yq, ylo), yhi)
    if contains(r, xq, yq):
        return xq, yq
    c = r.constraint
    candidates = []
    if c.form == Form.SUM:
        candidates += [(xq, c.bound - xq), (c.bound - yq, yq)]
    else:
        if xq != 0:
            candidates.append((xq, c.bound / xq))
        if yq != 0:
            candidates.append((c.bound / yq, yq))
    for p in candidates:
        if contains(r, *p):
            return p
    return None


# case-A symmetric atoms


@dataclass(frozen=True)
class SymmetricAtom:
    """An unordered pair {s, t} given by e1 = s + t and e2 = s t"""
    e1: Fraction
    e2: Fraction

    @classmethod
    def of(cls, e1, e2) -> "SymmetricAtom":
        to_q = lambda v: parse_rational(v) if isinstance(v, str) else Fraction(v)  # noqa: E731
        return cls(to_q(e1), to_q(e2))

    @classmethod
    def from_pair(cls, s, t) -> "SymmetricAtom":
        s, t = Fraction(s), Fraction(t)
        return cls(s + t, s * t)

    @property
    def discriminant(self) -> Fraction:
        return self.e1 * self.e1 - 4 * self.e2

    def is_realizable(self, lo: Fraction = Fraction(-2), hi: Fraction = Fraction(2)) -> bool:
        """Both roots of z^2 - e1 z + e2 are real and lie in [lo, hi]"""
        def f(z):
            return z * z - self.e1 * z + self.e2

        return (
            self.discriminant >= 0
            and f(lo) >= 0
            and f(hi) >= 0
            and 2 * lo <= self.e1 <= 2 * hi
        )

    def roots(self, digits: int = 60) -> Tuple[BigReal, BigReal]:
        """(s, t) with s <= t at working precision"""
        if self.discriminant < 0:
            raise InputError(f"atom (e1={self.e1}, e2={self.e2}) has complex roots")
        root = BigReal.of(self.discriminant, digits).sqrt()
        e1 = BigReal.of(self.e1, digits)
        return (e1 - root) / 2, (e1 + root) / 2


def symmetric_atom_in_region(a: SymmetricAtom, r: Region) -> bool:
    """
    Exact membership of a symmetric pair

    Raises:
        InputError: If the box is not square or the atom is not realizable in it
    """
    if r.x_range != r.y_range:
        raise InputError("symmetric atoms need a square box")
    lo, hi = r.x_range
    if not a.is_realizable(lo, hi):
        raise InputError(f"atom (e1={a.e1}, e2={a.e2}) is not realizable in [{lo}, {hi}]^2")
    c = r.constraint
    if c is None:
        return True
    value = a.e1 if c.form == Form.SUM else a.e2
    return value >= c.bound if c.dir == Direction.GEQ else value <= c.bound


def parse_point(x: str, y: str) -> Point:
    return parse_decimal(x), parse_decimal(y)
