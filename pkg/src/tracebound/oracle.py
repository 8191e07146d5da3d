"""
Brute-force cross-checks

Each oracle recomputes a quantity without the code path it checks: hull
membership by enumerating small supports, moments by sampling, minima by a
dense grid. run_battery compares them against the main solvers.
"""

import logging
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, model_validator

from .exact import solve_exact
from .exceptions import InputError
from .lp import Feasible, HullProblem, solve_feasibility
from .moments import B32_ORDER, target_b
from .optimize import global_min
from .poly import Poly2
from .region import Direction, Form, Region

logger = logging.getLogger(__name__)

MAX_BRUTEFORCE_COLUMNS = 8
MAX_BRUTEFORCE_DIM = 3
MIN_MC_SAMPLES = 10 ** 4
MIN_DENSE_N = 2049
MC_Z_LIMIT = 4.0


class OracleReport(BaseModel):
    quantity: str
    oracle_value: float
    main_value: float
    discrepancy: float
    tolerance: float
    passed: bool = False

    @model_validator(mode="after")
    def set_passed(self):
        object.__setattr__(self, "passed", bool(self.discrepancy <= self.tolerance))
        return self


def hull_membership_bruteforce(columns: Sequence[Sequence], target: Sequence) -> bool:
    """
    Is target a convex combination of the columns?

    Tries every support of at most d + 1 columns whose lifted vectors
    determine the weights uniquely, and accepts nonnegative weights.

    Raises:
        InputError: If there are more than 8 columns or d > 3
    """
    d = len(target)
    if len(columns) > MAX_BRUTEFORCE_COLUMNS or d > MAX_BRUTEFORCE_DIM:
        raise InputError(f"brute force handles at most {MAX_BRUTEFORCE_COLUMNS} columns in dimension {MAX_BRUTEFORCE_DIM}")
    lifted_target = [Fraction(v) for v in target] + [Fraction(1)]
    for size in range(1, min(d + 1, len(columns)) + 1):
        for subset in combinations(range(len(columns)), size):
            matrix = [[Fraction(columns[k][row]) for k in subset] for row in range(d)]
            matrix.append([Fraction(1)] * size)
            weights, rank, consistent = solve_exact(matrix, lifted_target)
            if consistent and rank == size and all(w >= 0 for w in weights):
                return True
    return False


def random_hull_instance(rng: np.random.Generator, max_columns: int = 8, d: Optional[int] = None):
    """Small integer columns and a target with small integer coordinates"""
    d = d or int(rng.integers(1, MAX_BRUTEFORCE_DIM + 1))
    n = int(rng.integers(1, max_columns + 1))
    columns = [[Fraction(int(v)) for v in rng.integers(-3, 4, size=d)] for _ in range(n)]
    target = [Fraction(int(v), 2) for v in rng.integers(-4, 5, size=d)]
    return columns, target


def _semicircle_pairs(n: int, seed: int):
    rng = np.random.default_rng(seed)
    x = 4.0 * rng.beta(1.5, 1.5, size=n) - 2.0
    y = 4.0 * rng.beta(1.5, 1.5, size=n) - 2.0
    return x, y


def mc_moments(n: int, seed: int = 0) -> List[float]:
    """
    Sample averages of the 32 case-B monomials

    Independent semicircle pairs are drawn as 4 Beta(3/2, 3/2) - 2.
    """
    if n < MIN_MC_SAMPLES:
        raise InputError(f"at least {MIN_MC_SAMPLES} samples are needed, got {n}")
    x, y = _semicircle_pairs(n, seed)
    return [float(np.mean(x ** k * y ** l)) for k, l in B32_ORDER]


def mc_z_scores(n: int, seed: int = 0) -> List[float]:
    """|sample mean - exact moment| in units of the sample standard error"""
    x, y = _semicircle_pairs(n, seed)
    scores = []
    for (k, l), exact in zip(B32_ORDER, target_b().values):
        values = x ** k * y ** l
        error = abs(float(np.mean(values)) - float(exact))
        scores.append(error / (float(np.std(values)) / np.sqrt(n)))
    return scores


def _eval_grid(p: Poly2, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    total = np.zeros_like(xs, dtype=float)
    for m, c in p.items():
        total += float(c) * xs ** m.dx * ys ** m.dy
    return total


def _in_box(r: Region, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    (xlo, xhi), (ylo, yhi) = (tuple(map(float, r.x_range)), tuple(map(float, r.y_range)))
    return (xs >= xlo) & (xs <= xhi) & (ys >= ylo) & (ys <= yhi)


def _inside(r: Region, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    mask = _in_box(r, xs, ys)
    c = r.constraint
    if c is None:
        return mask
    value = xs + ys if c.form == Form.SUM else xs * ys
    bound = float(c.bound)
    return mask & (value >= bound if c.dir == Direction.GEQ else value <= bound)


def _boundary_samples(r: Region, n: int):
    (xlo, xhi), (ylo, yhi) = (tuple(map(float, r.x_range)), tuple(map(float, r.y_range)))
    t = np.linspace(0.0, 1.0, n)
    xs = [xlo + (xhi - xlo) * t, xlo + (xhi - xlo) * t, np.full(n, xlo), np.full(n, xhi)]
    ys = [np.full(n, ylo), np.full(n, yhi), ylo + (yhi - ylo) * t, ylo + (yhi - ylo) * t]
    c = r.constraint
    if c is not None:
        bound = float(c.bound)
        line = xlo + (xhi - xlo) * t
        if c.form == Form.SUM:
            xs.append(line)
            ys.append(bound - line)
        else:
            line = line[line != 0]
            xs.append(line)
            ys.append(bound / line)
    xs, ys = np.concatenate(xs), np.concatenate(ys)
    keep = _inside(r, xs, ys) | (_in_box(r, xs, ys) & _on_curve(r, xs, ys))
    return xs[keep], ys[keep]


def _on_curve(r: Region, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    c = r.constraint
    if c is None:
        return np.zeros_like(xs, dtype=bool)
    value = xs + ys if c.form == Form.SUM else xs * ys
    return np.abs(value - float(c.bound)) <= 1e-12 * max(1.0, abs(float(c.bound)))


def dense_min(p: Poly2, r: Region, n: int = MIN_DENSE_N) -> float:
    """Plain minimum over an n x n grid of the box plus boundary samples"""
    if n < MIN_DENSE_N:
        raise InputError(f"dense grid needs n >= {MIN_DENSE_N}, got {n}")
    (xlo, xhi), (ylo, yhi) = (tuple(map(float, r.x_range)), tuple(map(float, r.y_range)))
    xs = np.linspace(xlo, xhi, n)
    ys = np.linspace(ylo, yhi, n)
    best = np.inf
    for start in range(0, n, 256):
        gx, gy = np.meshgrid(xs[start:start + 256], ys, indexing="ij")
        mask = _inside(r, gx, gy)
        if mask.any():
            best = min(best, float(_eval_grid(p, gx[mask], gy[mask]).min()))
    bx, by = _boundary_samples(r, 4 * n)
    if bx.size:
        best = min(best, float(_eval_grid(p, bx, by).min()))
    return best


def run_battery(
    seed: int = 0,
    hull_trials: int = 200,
    mc_samples: int = 200_000,
    dense_n: int = MIN_DENSE_N,
    minima: Sequence = (),
) -> List[OracleReport]:
    """
    Compare every oracle with the main path

    Args:
        minima: (label, polynomial, region) triples for the dense-grid check
    """
    logger.info("Running oracle battery")
    reports: List[OracleReport] = []

    rng = np.random.default_rng(seed)
    disagreements = 0
    for _ in range(hull_trials):
        columns, target = random_hull_instance(rng)
        expected = hull_membership_bruteforce(columns, target)
        found = isinstance(solve_feasibility(HullProblem(columns, target), mode="rational"), Feasible)
        disagreements += int(expected != found)
    reports.append(
        OracleReport(
            quantity=f"hull membership, {hull_trials} instances",
            oracle_value=hull_trials,
            main_value=hull_trials - disagreements,
            discrepancy=disagreements,
            tolerance=0,
        )
    )

    z = max(mc_z_scores(mc_samples, seed))
    reports.append(
        OracleReport(
            quantity=f"B moments, max z-score over {mc_samples} samples",
            oracle_value=z,
            main_value=0.0,
            discrepancy=z,
            tolerance=MC_Z_LIMIT,
        )
    )

    for label, p, r in minima:
        grid_value = dense_min(p, r, dense_n)
        main_value = float(global_min(p, r).value)
        reports.append(
            OracleReport(
                quantity=f"minimum of {label} over {r.describe()}",
                oracle_value=grid_value,
                main_value=main_value,
                discrepancy=abs(grid_value - main_value),
                tolerance=1e-3,
            )
        )
    failed = [o.quantity for o in reports if not o.passed]
    if failed:
        logger.warning(f"Oracle discrepancies: {failed}")
    return reports
