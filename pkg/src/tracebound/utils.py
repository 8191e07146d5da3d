"""
Utility functions for tracebound
"""

import json
import logging
import time
from contextlib import contextmanager
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterator, Union

from .exact import BigReal, decimal_string

logger = logging.getLogger(__name__)


def is_terminating(q: Fraction) -> bool:
    """True if q has a finite decimal expansion"""
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def exact_decimal_string(q: Fraction, places: int = 40) -> str:
    """
    Render a rational as a decimal string when it terminates, else as "p/q"

    Args:
        q: Rational to render
        places: Upper bound on fractional digits for terminating expansions

    Returns:
        String accepted by exact.parse_rational, round-tripping exactly
    """
    q = Fraction(q)
    if q == 0:
        return "0"
    if not is_terminating(q):
        return f"{q.numerator}/{q.denominator}"
    text = decimal_string(q, places)
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    if text in ("-0", ""):
        text = "0"
    # places may be too small for deep binary fractions
    if Fraction(Decimal(text)) != q:
        return f"{q.numerator}/{q.denominator}"
    return text


def serialize_rational(q: Fraction, places: int = 16) -> Dict[str, str]:
    """Rational as both an exact fraction and a decimal"""
    q = Fraction(q)
    return {"fraction": f"{q.numerator}/{q.denominator}", "decimal": decimal_string(q, places)}


def format_real(value: Union[Fraction, Decimal, BigReal, float], places: int = 16) -> str:
    """Fixed-point rendering used by text reports"""
    if isinstance(value, float):
        return f"{value:.{min(places, 17)}g}"
    return decimal_string(value, places)


def format_fraction(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def json_default(value: Any) -> Any:
    """json.dumps hook for the numeric types used across the package"""
    if isinstance(value, Fraction):
        return serialize_rational(value)
    if isinstance(value, BigReal):
        return str(value.value)
    if isinstance(value, Decimal):
        return str(value)
    if hasattr(value, "model_dump"):
        return value.model_dump()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(document: Any, path: Union[str, Path]) -> Path:
    """Write a JSON document, creating parent directories"""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, default=json_default)
    return out


@contextmanager
def timed(label: str) -> Iterator[Dict[str, float]]:
    """
    Time a block and log its duration

    Yields:
        Dictionary whose "seconds" entry is filled in on exit
    """
    record = {"seconds": 0.0}
    start = time.perf_counter()
    try:
        yield record
    finally:
        record["seconds"] = time.perf_counter() - start
        logger.debug(f"{label} took {record['seconds']:.3f}s")
