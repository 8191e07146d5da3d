import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from tracebound.data import builtin_measure, builtin_polynomial  # noqa: E402
from tracebound.moments import target_a, target_b  # noqa: E402
from tracebound.region import Region  # noqa: E402


@pytest.fixture
def case_a():
    """Generic-case target (0, -1, 3, 0, 2)"""
    return target_a()


@pytest.fixture
def case_b():
    """Haar-case target: the 32 Catalan moments"""
    return target_b()


@pytest.fixture
def box():
    return Region.box()


@pytest.fixture
def packaged():
    """Look up a packaged polynomial by name: packaged("q") -> (poly, region, entry)"""

    def lookup(name):
        entry = builtin_polynomial(name)
        return entry.poly(), entry.default_region(), entry

    return lookup


@pytest.fixture
def witness():
    """Look up a packaged measure by name: witness("a1-opt") -> (atoms, weights, region)"""

    def lookup(name):
        m = builtin_measure(name)
        weights = list(m.weights) if m.weights is not None else None
        return list(m.atoms), weights, m.default_region()

    return lookup
