"""
Text, JSON and SVG rendering of results
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from jinja2 import ChoiceLoader, DictLoader, Environment, FileSystemLoader, StrictUndefined

from .certify import HyperplaneReport, IdentityReport, MeasureReport
from .exact import to_rational
from .moments import MomentVector
from .optimize import MinResult
from .region import Region, SymmetricAtom, strata
from .utils import exact_decimal_string, format_fraction, format_real, json_default

logger = logging.getLogger(__name__)

PLOT_HALF_WIDTH = 2.2
MARKER_RADIUS = 0.035
CURVE_SAMPLES = 96

DEFAULT_TEMPLATES: Dict[str, str] = {
    "moments.txt": (
        "Moment basis {{ basis }} ({{ dimension }} features)\n"
        "{{ table }}\n"
    ),
    "hyperplane.txt": (
        "Separating polynomial {{ r.name }} over {{ r.region }} [{{ r.basis }}]\n"
        "  expectation      {{ r.expectation | real }}\n"
        "  minimum          {{ r.min_estimate | real }} at ({{ r.min_point[0] | real(12) }}, {{ r.min_point[1] | real(12) }})"
        "{% if not r.min_converged %} (unpolished){% endif %}\n"
        "  certified bound  {{ r.certified_bound | real }} (gap {{ '%.3g' | format(r.achieved_gap) }})\n"
        "  margin           {{ r.margin | sci }}\n"
        "  verdict          {{ r.verdict.value }}\n"
        "  {{ r.conclusion }}\n"
    ),
    "measure.txt": (
        "Atomic measure over {{ r.region }} [{{ r.basis }}], weights {{ r.weights_source }}\n"
        "{{ atoms }}\n"
        "{{ residuals }}\n"
        "  max residual  {{ r.max_residual | sci }} (tolerance {{ r.tolerance | sci }})\n"
        "{% for p in r.problems %}  problem: {{ p }}\n{% endfor %}"
        "{% if r.farkas_delta is not none %}  separating margin {{ r.farkas_delta | sci }}\n{% endif %}"
        "  verdict {{ r.verdict.value }}\n"
    ),
    "identities.txt": (
        "{% for c in r.checks %}{{ 'pass' if c.passed else 'FAIL' }}  eps={{ c.epsilon }}  {{ c.name }}"
        "{% if c.mismatch %}  ({{ c.mismatch }}){% endif %}\n{% endfor %}"
        "{{ 'all identities hold' if r.passed else 'identity check failed' }}\n"
    ),
    "minimize.txt": (
        "Minimum over {{ region }}\n"
        "  value      {{ m.value | real }}\n"
        "  point      ({{ m.point[0] | real }}, {{ m.point[1] | real }})\n"
        "  active     {{ m.active_set | join(', ') if m.active_set else 'interior' }}\n"
        "  residual   {{ m.kkt_residual | sci }}\n"
        "  converged  {{ 'yes' if m.converged else 'no (grid point)' }}\n"
        "  polished local minima {{ m.local_minima | length }}\n"
    ),
    "threshold.txt": (
        "Threshold case {{ t.case | upper }}, {{ t.form.value }} {{ t.dir.value }}\n"
        "  feasible side    {{ t.feasible_bound | real }}\n"
        "  infeasible side  {{ t.infeasible_bound | real }}\n"
        "  width            {{ t.width | sci }}\n"
        "  status           {{ t.status }}\n"
        "{% if t.implied %}  implies          {{ t.implied.quantity }} {{ t.implied.relation }} {{ t.implied.value | real }}\n{% endif %}"
        "{% if t.witness_verdict %}  witness          {{ t.witness_verdict.value }} ({{ t.witness | length }} atoms)\n{% endif %}"
        "{% if t.separator_verdict %}  separator        {{ t.separator_verdict.value }}\n{% endif %}"
        "  steps {{ t.iterations }}, {{ '%.1f' | format(t.runtime) }}s\n"
        "{{ trace }}\n"
        "{% for f in files %}  wrote {{ f }}\n{% endfor %}"
    ),
    "bounds.txt": (
        "{{ table }}\n"
    ),
    "plot.svg": (
        '<svg xmlns="http://www.w3.org/2000/svg" width="{{ size }}" height="{{ size }}" '
        'viewBox="{{ -half }} {{ -half }} {{ 2 * half }} {{ 2 * half }}">\n'
        '<g transform="scale(1,-1)">\n'
        '<rect x="{{ -half }}" y="{{ -half }}" width="{{ 2 * half }}" height="{{ 2 * half }}" '
        'fill="white" stroke="black" stroke-width="0.01"/>\n'
        "{% for g in grid %}"
        '<line x1="{{ g }}" y1="{{ -half }}" x2="{{ g }}" y2="{{ half }}" stroke="#cccccc" stroke-width="0.005"/>\n'
        '<line x1="{{ -half }}" y1="{{ g }}" x2="{{ half }}" y2="{{ g }}" stroke="#cccccc" stroke-width="0.005"/>\n'
        "{% endfor %}"
        '<rect x="-2" y="-2" width="4" height="4" fill="none" stroke="#555555" stroke-width="0.01"/>\n'
        "{% for c in curves %}"
        '<polyline points="{{ c }}" fill="none" stroke="#1f77b4" stroke-width="0.015"/>\n'
        "{% endfor %}"
        "{% for x, y in markers %}"
        '<circle cx="{{ x }}" cy="{{ y }}" r="{{ radius }}" fill="#d62728"/>\n'
        "{% endfor %}"
        "</g>\n</svg>\n"
    ),
}


def _real(value, places: int = 16) -> str:
    return format_real(value, places)


def _sci(value) -> str:
    return f"{float(value):.3e}"


class ReportGenerator:
    """Renders reports from templates in template_dir, falling back to the built-in ones"""

    def __init__(self, template_dir: Optional[str] = "templates"):
        self.template_dir = template_dir
        self.env = None
        self._setup_jinja_environment()

    def _setup_jinja_environment(self):
        loaders = []
        if self.template_dir and os.path.isdir(self.template_dir):
            loaders.append(FileSystemLoader(self.template_dir))
            logger.debug(f"Templates from {self.template_dir}")
        loaders.append(DictLoader(DEFAULT_TEMPLATES))
        self.env = Environment(
            loader=ChoiceLoader(loaders),
            autoescape=False,
            undefined=StrictUndefined,
            keep_trailing_newline=True,
        )
        self.env.filters["real"] = _real
        self.env.filters["sci"] = _sci
        self.env.filters["frac"] = format_fraction

    def render(self, template_name: str, **context: Any) -> str:
        try:
            return self.env.get_template(template_name).render(**context)
        except Exception as e:
            logger.error(f"Error rendering {template_name}: {str(e)}")
            raise

    def moments(self, m: MomentVector, unicode: bool = True) -> str:
        return self.render(
            "moments.txt",
            basis=m.basis.id,
            dimension=m.basis.dimension,
            table=moments_table(m, unicode).to_string(index=False),
        )

    def hyperplane(self, report: HyperplaneReport) -> str:
        return self.render("hyperplane.txt", r=report)

    def measure(self, report: MeasureReport, feature_names: Sequence[str]) -> str:
        return self.render(
            "measure.txt",
            r=report,
            atoms=membership_table(report).to_string(index=False),
            residuals=residual_table(report, feature_names).to_string(index=False),
        )

    def identities(self, report: IdentityReport) -> str:
        return self.render("identities.txt", r=report)

    def minimize(self, result: MinResult, r: Region) -> str:
        return self.render("minimize.txt", m=result, region=r.describe())

    def threshold(self, result, files: Sequence[str] = ()) -> str:
        return self.render(
            "threshold.txt", t=result, trace=trace_table(result).to_string(index=False), files=list(files)
        )

    def bounds(self, rows: List[Dict[str, Any]]) -> str:
        return self.render("bounds.txt", table=pd.DataFrame(rows).to_string(index=False))

    def plot(self, atoms: Sequence, r: Optional[Region] = None, size: int = 440) -> str:
        markers = [(_coord(x), _coord(y)) for x, y in atom_positions(atoms)]
        curves = [" ".join(f"{_coord(x)},{_coord(y)}" for x, y in c) for c in constraint_curves(r)] if r else []
        return self.render(
            "plot.svg",
            size=size,
            half=PLOT_HALF_WIDTH,
            grid=[-2, -1, 0, 1, 2],
            curves=curves,
            markers=markers,
            radius=MARKER_RADIUS,
        )


# tables


def moments_table(m: MomentVector, unicode: bool = True) -> pd.DataFrame:
    names = m.basis.unicode_names if unicode else m.basis.names
    return pd.DataFrame(
        {
            "feature": list(names),
            "value": [format_fraction(v) for v in m.values],
            "decimal": [exact_decimal_string(v, 16) for v in m.values],
        }
    )


def membership_table(report: MeasureReport) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "atom": [c.atom for c in report.membership],
            "weight": [f"{float(w):.12g}" for w in report.weights],
            "slack": [f"{float(c.slack):.3e}" for c in report.membership],
            "inside": ["yes" if c.inside else "NO" for c in report.membership],
        }
    )


def residual_table(report: MeasureReport, feature_names: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(
        {"feature": list(feature_names), "residual": [f"{float(v):.3e}" for v in report.moment_residual]}
    )


def trace_table(result) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "bound": [f"{float(s.bound):.12f}" for s in result.trace],
            "status": [s.status for s in result.trace],
            "rounds": [s.rounds for s in result.trace],
        }
    )


def oracle_table(reports) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "quantity": [o.quantity for o in reports],
            "oracle": [f"{o.oracle_value:.8g}" for o in reports],
            "main path": [f"{o.main_value:.8g}" for o in reports],
            "discrepancy": [f"{o.discrepancy:.2e}" for o in reports],
            "tolerance": [f"{o.tolerance:.1e}" for o in reports],
            "pass": ["yes" if o.passed else "NO" for o in reports],
        }
    )


# JSON


def to_document(report: Any) -> Any:
    if hasattr(report, "model_dump"):
        return report.model_dump()
    return report


def to_json(report: Any) -> str:
    """JSON text; rationals become {"fraction", "decimal"} pairs"""
    return json.dumps(to_document(report), indent=2, default=json_default)


def threshold_document(result) -> Dict[str, Any]:
    return {
        "case": result.case,
        "form": result.form.value,
        "dir": result.dir.value,
        "feasible_bound": result.feasible_bound,
        "infeasible_bound": result.infeasible_bound,
        "width": result.width,
        "status": result.status,
        "implied": str(result.implied) if result.implied else None,
        "witness_atoms": len(result.witness) if result.witness is not None else 0,
        "witness_verdict": result.witness_verdict.value if result.witness_verdict else None,
        "separator_verdict": result.separator_verdict.value if result.separator_verdict else None,
        "separator_expectation": result.separator_expectation,
        "iterations": result.iterations,
        "runtime": result.runtime,
        "trace": [{"bound": s.bound, "status": s.status, "rounds": s.rounds} for s in result.trace],
    }


# SVG geometry


def _coord(v: float) -> str:
    return f"{float(v):.6f}"


def atom_positions(atoms: Sequence) -> List[tuple]:
    """Float plot positions; a symmetric pair is drawn at (s, t) with s <= t"""
    points = []
    for a in atoms:
        if isinstance(a, SymmetricAtom):
            s, t = a.roots()
            points.append((float(s), float(t)))
        else:
            points.append((float(to_rational(a[0])), float(to_rational(a[1]))))
    return points


def constraint_curves(r: Region) -> List[List[tuple]]:
    """Sampled polylines of the constraint boundary inside the box"""
    curves = []
    for seg in strata(r):
        if "constraint" not in seg.active:
            continue
        ts = np.linspace(float(seg.t_lo), float(seg.t_hi), CURVE_SAMPLES)
        curves.append([tuple(float(v) for v in seg.point(float(t))) for t in ts])
    return curves
