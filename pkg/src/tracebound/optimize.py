"""
Global minimization of bivariate polynomials over regions

`global_min` scans a float grid for seeds, then polishes every stratum of
the region at working precision: the interior by two-dimensional Newton on
the gradient, each boundary segment by one-dimensional Newton on the
derivative along its parametrisation, and the vertices by direct exact
evaluation. `lower_bound` is the rigorous counterpart: exact branch and
bound over dyadic cells.
"""

import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exact import DEFAULT_DIGITS, BigReal, to_bigreal
from .exceptions import InputError
from .poly import Poly2, eval as eval_big
from .region import Direction, Region, Segment, contains, contains_array, grid_arrays, is_empty, strata, vertices

logger = logging.getLogger(__name__)

MAX_NEWTON = 200
INTERIOR_SEEDS = 24
LOWEST_SEEDS = 8
SEGMENT_SEEDS = 8
DEFAULT_GRID_N = 257
DEFAULT_TOL_KKT = 1e-30


@dataclass
class Candidate:
    """A polished stationary point of one stratum"""
    point: Tuple[BigReal, BigReal]
    value: BigReal
    kkt_residual: BigReal
    active_set: Tuple[str, ...]
    converged: bool

    @property
    def xy_float(self) -> Tuple[float, float]:
        return float(self.point[0]), float(self.point[1])


@dataclass
class MinResult:
    """Best point found over all strata, with every polished local minimum"""
    point: Tuple[BigReal, BigReal]
    value: BigReal
    kkt_residual: BigReal
    active_set: Tuple[str, ...]
    converged: bool
    local_minima: List[Candidate] = field(default_factory=list)
    grid_value: float = float("inf")

    def to_dict(self) -> dict:
        return {
            "point": [str(self.point[0]), str(self.point[1])],
            "value": str(self.value),
            "kkt_residual": str(self.kkt_residual),
            "active_set": list(self.active_set),
            "converged": self.converged,
            "local_minima": len(self.local_minima),
        }


class _Derivatives:
    """Gradient and Hessian polynomials of p, computed once"""

    def __init__(self, p: Poly2):
        self.p = p
        self.px, self.py = p.gradient()
        self.pxx, self.pxy, self.pyy = p.hessian()


def _big(v, digits: int) -> BigReal:
    return BigReal.of(v, digits)


def _active_at(r: Region, x: Fraction, y: Fraction) -> Tuple[str, ...]:
    active = []
    (xlo, xhi), (ylo, yhi) = r.x_range, r.y_range
    for label, hit in (("x=lo", x == xlo), ("x=hi", x == xhi), ("y=lo", y == ylo), ("y=hi", y == yhi)):
        if hit:
            active.append(label)
    if r.constraint is not None and r.constraint.slack(x, y) == 0:
        active.append("constraint")
    return tuple(active)


# seeding


def _lattice_seeds(p: Poly2, r: Region, n: int) -> List[Tuple[float, float]]:
    """Discrete local minima of p on the feasible n x n lattice, plus the lowest points"""
    (xlo, xhi), (ylo, yhi) = [tuple(float(v) for v in side) for side in (r.x_range, r.y_range)]
    gx, gy = np.meshgrid(np.linspace(xlo, xhi, n), np.linspace(ylo, yhi, n), indexing="ij")
    values = p.eval_array(gx, gy)
    values = np.where(contains_array(r, gx, gy), values, np.inf)

    padded = np.pad(values, 1, constant_values=np.inf)
    centre = padded[1:-1, 1:-1]
    is_min = np.isfinite(centre)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            neighbour = padded[1 + dx:n + 1 + dx, 1 + dy:n + 1 + dy]
            is_min &= centre <= neighbour

    seeds: List[Tuple[float, float]] = []
    idx = np.argwhere(is_min)
    order = np.argsort(values[is_min])[:INTERIOR_SEEDS]
    seeds += [(gx[tuple(idx[k])], gy[tuple(idx[k])]) for k in order]
    flat = np.argsort(values, axis=None)[:LOWEST_SEEDS]
    for k in flat:
        i, j = np.unravel_index(k, values.shape)
        if np.isfinite(values[i, j]):
            seeds.append((gx[i, j], gy[i, j]))
    return seeds


def _segment_arrays(seg: Segment, ts: np.ndarray):
    c = float(seg.c)
    if seg.kind == "fixed_x":
        return np.full_like(ts, c), ts
    if seg.kind == "fixed_y":
        return ts, np.full_like(ts, c)
    if seg.kind == "sum":
        return ts, c - ts
    return ts, c / ts


def _segment_seeds(p: Poly2, seg: Segment, n: int) -> List[float]:
    lo, hi = float(seg.t_lo), float(seg.t_hi)
    ts = np.linspace(lo, hi, max(4 * n, 16))
    xs, ys = _segment_arrays(seg, ts)
    values = p.eval_array(xs, ys)
    padded = np.concatenate([[np.inf], values, [np.inf]])
    is_min = (values <= padded[:-2]) & (values <= padded[2:])
    picks = np.flatnonzero(is_min)
    picks = picks[np.argsort(values[picks])][:SEGMENT_SEEDS]
    return [float(ts[k]) for k in picks]


# polishing


def _polish_interior(d: _Derivatives, r: Region, x0: float, y0: float, digits: int, tol: float) -> Optional[Candidate]:
    """Newton on the gradient; None when the iterate leaves the region"""
    x, y = _big(x0, digits), _big(y0, digits)
    eps = _big(Fraction(1, 10 ** (digits - 4)), digits)
    residual = None
    for _ in range(MAX_NEWTON):
        gx, gy = eval_big(d.px, x, y), eval_big(d.py, x, y)
        residual = max(abs(gx), abs(gy))
        if residual < tol:
            break
        hxx, hxy, hyy = eval_big(d.pxx, x, y), eval_big(d.pxy, x, y), eval_big(d.pyy, x, y)
        det = hxx * hyy - hxy * hxy
        if det == 0:
            return None
        sx = (hyy * gx - hxy * gy) / det
        sy = (hxx * gy - hxy * gx) / det
        x, y = x - sx, y - sy
        if not contains(r, x, y):
            return None
        if max(abs(sx), abs(sy)) < eps:
            gx, gy = eval_big(d.px, x, y), eval_big(d.py, x, y)
            residual = max(abs(gx), abs(gy))
            break
    if not contains(r, x, y):
        return None
    return Candidate((x, y), eval_big(d.p, x, y), residual, (), residual < tol)


def _slope(d: _Derivatives, seg: Segment, t: BigReal):
    """First and second derivative of p along the segment at t"""
    x, y = seg.point(t)
    x1, y1, x2, y2 = seg.derivatives(t)
    px, py = eval_big(d.px, x, y), eval_big(d.py, x, y)
    pxx, pxy, pyy = eval_big(d.pxx, x, y), eval_big(d.pxy, x, y), eval_big(d.pyy, x, y)
    first = px * x1 + py * y1
    second = pxx * x1 * x1 + 2 * pxy * x1 * y1 + pyy * y1 * y1 + px * x2 + py * y2
    return first, second


def _polish_segment(d: _Derivatives, seg: Segment, t0: float, digits: int, tol: float, fallback_step: Fraction) -> Candidate:
    """Newton along the segment, clamped to its parameter interval"""
    lo, hi = _big(seg.t_lo, digits), _big(seg.t_hi, digits)
    t = min(max(_big(t0, digits), lo), hi)
    h = _big(fallback_step, digits)
    eps = _big(Fraction(1, 10 ** (digits - 4)), digits)
    at_end = False
    first = None
    for _ in range(MAX_NEWTON):
        first, second = _slope(d, seg, t)
        if abs(first) < tol:
            break
        if (t == lo and first > 0) or (t == hi and first < 0):
            at_end = True
            break
        step = first / second if second > 0 else (h if first > 0 else -h)
        t_new = min(max(t - step, lo), hi)
        if abs(t_new - t) < eps * max(abs(t), _big(1, digits)):
            t = t_new
            first, _ = _slope(d, seg, t)
            break
        t = t_new

    if at_end:
        # the minimizer of this stratum is a vertex: exact endpoint
        t_exact = seg.t_lo if t == lo else seg.t_hi
        x, y = seg.point(t_exact)
        zero = _big(0, digits)
        return Candidate((_big(x, digits), _big(y, digits)), _big(d.p.eval_exact(x, y), digits), zero, seg.active, True)
    x, y = seg.point(t)
    return Candidate((x, y), eval_big(d.p, x, y), abs(first), seg.active, abs(first) < tol)


def _dedupe(candidates: Sequence[Candidate]) -> List[Candidate]:
    """One candidate per location, polished ones before grid samples"""
    chosen = {}
    for c in sorted(candidates, key=lambda c: c.value):
        key = (round(float(c.point[0]), 9), round(float(c.point[1]), 9))
        kept = chosen.get(key)
        if kept is None or (c.converged and not kept.converged):
            chosen[key] = c
    return sorted(chosen.values(), key=lambda c: c.value)


def _leftmost_of_ties(minima: Sequence[Candidate], tie: Fraction) -> Candidate:
    """Among minima within `tie` of the lowest value: polished first, then smallest (x, y)"""
    lowest = minima[0].value
    tied = [c for c in minima if c.value - lowest <= tie]
    return min(tied, key=lambda c: (not c.converged, c.point[0], c.point[1]))


def global_min(
    p: Poly2,
    r: Region,
    grid_n: int = DEFAULT_GRID_N,
    digits: int = DEFAULT_DIGITS,
    tol_kkt: float = DEFAULT_TOL_KKT,
) -> MinResult:
    """
    Minimum of p over r

    Args:
        p: polynomial
        r: nonempty region
        grid_n: seed grid points per box side
        digits: working precision of the polish
        tol_kkt: stationarity residual accepted as converged

    Returns:
        MinResult at the lowest polished point; converged is False when the
        lowest point found is a grid sample rather than a polished minimum

    Raises:
        InputError: If the region is empty
    """
    if is_empty(r):
        raise InputError(f"cannot minimize over the empty region {r.describe()}")
    logger.info(f"Minimizing a degree-{p.degree()} polynomial over {r.describe()} (grid {grid_n}, {digits} digits)")
    try:
        d = _Derivatives(p)
        candidates: List[Candidate] = []

        for x0, y0 in _lattice_seeds(p, r, grid_n):
            found = _polish_interior(d, r, x0, y0, digits, tol_kkt)
            if found is not None:
                candidates.append(found)

        for seg in strata(r):
            if seg.t_lo == seg.t_hi:
                continue
            step = (seg.t_hi - seg.t_lo) / (4 * grid_n)
            for t0 in _segment_seeds(p, seg, grid_n):
                candidates.append(_polish_segment(d, seg, t0, digits, tol_kkt, step))

        zero = _big(0, digits)
        for x, y in vertices(r):
            candidates.append(
                Candidate((_big(x, digits), _big(y, digits)), _big(p.eval_exact(x, y), digits), zero, _active_at(r, x, y), True)
            )

        grid_value = float("inf")
        xs, ys = grid_arrays(r, grid_n)
        if xs.size:
            values = p.eval_array(xs, ys)
            k = int(np.argmin(values))
            grid_value = float(values[k])
            gx, gy = Fraction(float(xs[k])), Fraction(float(ys[k]))
            if contains(r, gx, gy):
                candidates.append(
                    Candidate((_big(gx, digits), _big(gy, digits)), _big(p.eval_exact(gx, gy), digits), _big(1, digits), (), False)
                )

        slack = Fraction(1, 10 ** (digits - 2))
        minima = _dedupe([c for c in candidates if contains(r, *c.point, tol=slack)])
        best = _leftmost_of_ties(minima, Fraction(1, 10 ** (digits // 2)))
        result = MinResult(
            point=best.point,
            value=best.value,
            kkt_residual=best.kkt_residual,
            active_set=best.active_set,
            converged=best.converged,
            local_minima=[c for c in minima if c.converged],
            grid_value=grid_value,
        )
        logger.info(
            f"Minimum {float(result.value):.12g} at ({float(result.point[0]):.9g}, {float(result.point[1]):.9g}), "
            f"active {list(result.active_set) or 'interior'}, converged={result.converged}"
        )
        return result
    except InputError:
        raise
    except Exception as e:
        logger.error(f"Error minimizing over {r.describe()}: {str(e)}")
        raise


# certified lower bound


class LowerBound(NamedTuple):
    bound: BigReal
    achieved_gap: float
    upper: Fraction
    cells: int
    converged: bool


class _Cell(NamedTuple):
    lb: Fraction
    seq: int
    cx: Fraction
    cy: Fraction
    hx: Fraction
    hy: Fraction


class _CellBounder:
    """Exact lower bounds of p on axis-parallel cells"""

    def __init__(self, p: Poly2):
        self.p = p
        self.px, self.py = p.gradient()
        self.pxx, self.pxy, self.pyy = p.hessian()
        self.pxxx, self.pxxy = self.pxx.gradient()
        _, self.pxyy = self.pxy.gradient()
        _, self.pyyy = self.pyy.gradient()

    def bound(self, cx: Fraction, cy: Fraction, hx: Fraction, hy: Fraction) -> Fraction:
        """
        p(c) + min over the cell of the second-order Taylor model, minus a
        third-order remainder bounded by coefficient sums
        """
        gx, gy = self.px.eval_exact(cx, cy), self.py.eval_exact(cx, cy)
        a, b, c = self.pxx.eval_exact(cx, cy), self.pxy.eval_exact(cx, cy), self.pyy.eval_exact(cx, cy)
        model_min = _quadratic_box_min(gx, gy, a, b, c, hx, hy)
        mx, my = abs(cx) + hx, abs(cy) + hy
        remainder = (
            self.pxxx.coefficient_bound(mx, my) * hx ** 3
            + 3 * self.pxxy.coefficient_bound(mx, my) * hx * hx * hy
            + 3 * self.pxyy.coefficient_bound(mx, my) * hx * hy * hy
            + self.pyyy.coefficient_bound(mx, my) * hy ** 3
        ) / 6
        return self.p.eval_exact(cx, cy) + model_min - remainder


def _quadratic_box_min(gx, gy, a, b, c, hx, hy) -> Fraction:
    """Exact minimum of gx u + gy v + (a u^2 + 2 b u v + c v^2) / 2 on |u| <= hx, |v| <= hy"""

    def q(u, v):
        return gx * u + gy * v + (a * u * u + 2 * b * u * v + c * v * v) / 2

    values = [q(u, v) for u in (-hx, hx) for v in (-hy, hy)]
    for u in (-hx, hx):
        if c > 0:
            v = -(gy + b * u) / c
            if -hy <= v <= hy:
                values.append(q(u, v))
    for v in (-hy, hy):
        if a > 0:
            u = -(gx + b * v) / a
            if -hx <= u <= hx:
                values.append(q(u, v))
    det = a * c - b * b
    if a > 0 and det > 0:
        u = (-c * gx + b * gy) / det
        v = (b * gx - a * gy) / det
        if -hx <= u <= hx and -hy <= v <= hy:
            values.append(q(u, v))
    return min(values)


def _cell_meets_region(r: Region, cx: Fraction, cy: Fraction, hx: Fraction, hy: Fraction) -> bool:
    c = r.constraint
    if c is None:
        return True
    values = [c.value(cx + sx * hx, cy + sy * hy) for sx in (-1, 1) for sy in (-1, 1)]
    return max(values) >= c.bound if c.dir == Direction.GEQ else min(values) <= c.bound


def lower_bound(p: Poly2, r: Region, gap: float = 0.01, budget: int = 20000, digits: int = DEFAULT_DIGITS) -> LowerBound:
    """
    Certified lower bound of p on r by exact branch and bound

    Args:
        p: polynomial
        r: nonempty region
        gap: stop once the best feasible value is within gap of the bound
        budget: maximum number of cells examined

    Returns:
        LowerBound whose bound never exceeds the true minimum; achieved_gap
        exceeds gap when the budget ran out
    """
    if gap <= 0:
        raise InputError("gap must be positive")
    if is_empty(r):
        raise InputError(f"cannot bound over the empty region {r.describe()}")
    logger.info(f"Bounding over {r.describe()} to gap {gap} within {budget} cells")

    gap_q = Fraction(gap)
    bounder = _CellBounder(p)
    upper = min(p.eval_exact(x, y) for x, y in vertices(r))
    (xlo, xhi), (ylo, yhi) = r.x_range, r.y_range
    root = ((xlo + xhi) / 2, (ylo + yhi) / 2, (xhi - xlo) / 2, (yhi - ylo) / 2)

    heap: List[_Cell] = []
    seq = 0

    def push(cx, cy, hx, hy):
        nonlocal seq, upper
        if not _cell_meets_region(r, cx, cy, hx, hy):
            return
        if contains(r, cx, cy):
            upper = min(upper, p.eval_exact(cx, cy))
        heapq.heappush(heap, _Cell(bounder.bound(cx, cy, hx, hy), seq, cx, cy, hx, hy))
        seq += 1

    push(*root)
    cells = 1
    converged = False
    while heap:
        cell = heap[0]
        if cell.lb >= upper - gap_q:
            converged = True
            break
        if cells >= budget:
            break
        heapq.heappop(heap)
        hx, hy = cell.hx / 2, cell.hy / 2
        for sx in (-1, 1):
            for sy in (-1, 1):
                push(cell.cx + sx * hx, cell.cy + sy * hy, hx, hy)
                cells += 1

    bound = min(heap[0].lb, upper) if heap else upper
    achieved = float(upper - bound)
    if not converged:
        logger.warning(f"Cell budget {budget} exhausted at gap {achieved:.3g} (target {gap})")
    logger.info(f"Certified bound {float(bound):.12g}, best value {float(upper):.12g}, {cells} cells")
    return LowerBound(to_bigreal(bound, digits), achieved, upper, cells, converged)
