"""
Command-line front end

Exit codes: 0 success or valid certificate, 1 invalid certificate, 2 input
error, 3 indeterminate.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from pydantic import ValidationError

from .certify import (
    Verdict,
    implied_bound,
    verify_hyperplane,
    verify_identity_suite,
    verify_measure,
    verify_mirror,
)
from .config import RunConfig, create_sample_config, load_config
from .data import (
    POLYNOMIALS,
    atoms_document,
    builtin_measure,
    builtin_polynomial,
    is_builtin,
    load_measure,
    load_polynomial,
    load_weights,
    weights_document,
)
from .exact import parse_rational
from .exceptions import ConfigurationError, InputError, SolverError, ThresholdError
from .moments import target_for_case
from .optimize import global_min
from .oracle import run_battery
from .region import Region, load_region, reflect
from .report import ReportGenerator, oracle_table, threshold_document, to_json
from .threshold import ThresholdOptions, threshold
from .utils import write_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INPUT = 2
EXIT_INDETERMINATE = 3


def _run_options(nested: bool) -> argparse.ArgumentParser:
    """
    Options accepted before or after the command

    Copies attached to subcommands default to SUPPRESS so that a value given
    before the command survives when the option is not repeated after it.
    """
    options = argparse.ArgumentParser(add_help=False)
    unset = dict(default=argparse.SUPPRESS) if nested else {}
    options.add_argument("--json", action="store_true", help="Print reports as JSON", **unset)
    options.add_argument("--digits", type=int, help="Working precision in decimal digits (>= 30)", **unset)
    options.add_argument("--seed", type=int, help="Seed for every random stream", **unset)
    options.add_argument("--grid-n", type=int, help="Seed grid points per box side", **unset)
    return options


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracebound",
        description="Provable bounds on Frobenius trace statistics from known moments",
        parents=[_run_options(nested=False)],
    )
    parser.add_argument("--config", "-c", help="Path to run configuration file")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Set logging level")
    parser.add_argument("--self-check", action="store_true", help="Run the brute-force oracle battery")
    parser.add_argument("--create-sample", action="store_true", help="Write a configuration file with the defaults")

    sub = parser.add_subparsers(dest="command")
    shared = [_run_options(nested=True)]

    moments = sub.add_parser("moments", parents=shared, help="Print a moment basis and its target values")
    moments.add_argument("--case", required=True, help="a (generic) or b (B[C2])")

    verify = sub.add_parser("verify", parents=shared, help="Verify a certificate")
    kinds = verify.add_subparsers(dest="kind")
    hyper = kinds.add_parser("hyperplane", parents=shared, help="Check a separating polynomial")
    hyper.add_argument("--poly", required=True, help="Polynomial file or builtin:<name>")
    hyper.add_argument("--region", help="Region file or inline 'sum>=-2.47' (defaults to the builtin's region)")
    hyper.add_argument("--case", help="a or b (defaults to the builtin's case)")
    hyper.add_argument("--mirror", action="store_true", help="Also check the mirrored certificate")
    measure = kinds.add_parser("measure", parents=shared, help="Check an atomic measure")
    measure.add_argument("--atoms", required=True, help="Atoms file or builtin:<name>")
    measure.add_argument("--weights", help="Weights file; solved for when absent")
    measure.add_argument("--region", help="Region file or inline constraint")
    measure.add_argument("--case", help="a or b")
    measure.add_argument("--tol", type=float, help="Membership and moment tolerance")

    thresh = sub.add_parser("threshold", parents=shared, help="Bisect for the optimal provable bound")
    thresh.add_argument("--case", required=True)
    thresh.add_argument("--form", required=True, choices=["sum", "product"])
    thresh.add_argument("--dir", required=True, choices=["geq", "leq"])
    thresh.add_argument("--tol", type=float, required=True, help="Bracket width")
    thresh.add_argument("--bracket", nargs=2, metavar=("FEASIBLE", "INFEASIBLE"), help="Initial bracket")
    thresh.add_argument("--emit-certificates", metavar="DIR", help="Write the endpoint certificates here")

    identities = sub.add_parser("identities", parents=shared, help="Expand the proof identities exactly")
    identities.add_argument("--eps", nargs="*", default=["0", "1"], help="Epsilon values to check")

    minimize = sub.add_parser("minimize", parents=shared, help="Global minimum of a polynomial over a region")
    minimize.add_argument("--poly", required=True)
    minimize.add_argument("--region")

    plot = sub.add_parser("plot", parents=shared, help="Scatter plot of an atom set as SVG")
    plot.add_argument("--atoms", required=True)
    plot.add_argument("--region", help="Draw this constraint (defaults to the builtin's region)")
    plot.add_argument("-o", "--output", required=True, help="SVG path")

    sub.add_parser("bounds", parents=shared, help="Verify the packaged certificates and print the implied bounds")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv and run; logging is left to the caller"""
    args = build_parser().parse_args(argv)
    return run(args)


def run(args: argparse.Namespace) -> int:
    generator = ReportGenerator()
    try:
        if args.create_sample:
            create_sample_config(args.config or "config.json")
            return EXIT_OK
        config = load_config(
            args.config,
            precision_digits=args.digits,
            seed=args.seed,
            grid_n=args.grid_n,
            output_mode="json" if args.json else None,
        )
        if args.self_check:
            return _self_check(config)
        handler = {
            "moments": _moments,
            "verify": _verify,
            "threshold": _threshold,
            "identities": _identities,
            "minimize": _minimize,
            "plot": _plot,
            "bounds": _bounds,
        }.get(args.command)
        if handler is None:
            build_parser().print_help(sys.stderr)
            return EXIT_INPUT
        return handler(args, config, generator)
    except (InputError, ConfigurationError, ValidationError, FileNotFoundError) as e:
        logger.error(f"Input error: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        logger.error(f"I/O error: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, ThresholdError) as e:
        logger.error(f"No verdict: {str(e)}")
        print(f"indeterminate: {e}", file=sys.stderr)
        return EXIT_INDETERMINATE


def _emit(text: str):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _worst(verdicts: Iterable[Verdict]) -> int:
    codes = [v.exit_code for v in verdicts]
    if EXIT_INVALID in codes:
        return EXIT_INVALID
    if EXIT_INDETERMINATE in codes:
        return EXIT_INDETERMINATE
    return EXIT_OK


def _region_for(source: Optional[str], builtin_source: str, lookup) -> Region:
    if source:
        return load_region(source)
    if is_builtin(builtin_source):
        return lookup(builtin_source).default_region()
    raise InputError("--region is required for file inputs")


def _case_for(case: Optional[str], builtin_source: str, lookup) -> str:
    if case:
        return case
    if is_builtin(builtin_source):
        return lookup(builtin_source).case
    raise InputError("--case is required for file inputs")


# commands


def _moments(args, config: RunConfig, generator: ReportGenerator) -> int:
    m = target_for_case(args.case)
    if config.output_mode == "json":
        _emit(to_json({"basis": m.basis.id, "features": [{"name": n, "value": v} for n, v in m.as_dict().items()]}))
    else:
        _emit(generator.moments(m))
    return EXIT_OK


def _hyperplane_options(config: RunConfig) -> dict:
    return dict(
        grid_n=config.grid_n,
        digits=config.precision_digits,
        tol_kkt=config.tol_kkt,
        gap=config.gap,
        budget=config.budget,
    )


def _verify(args, config: RunConfig, generator: ReportGenerator) -> int:
    if args.kind == "hyperplane":
        return _verify_hyperplane(args, config, generator)
    if args.kind == "measure":
        return _verify_measure(args, config, generator)
    raise InputError("verify needs 'hyperplane' or 'measure'")


def _verify_hyperplane(args, config: RunConfig, generator: ReportGenerator) -> int:
    p = load_polynomial(args.poly)
    r = _region_for(args.region, args.poly, builtin_polynomial)
    m = target_for_case(_case_for(args.case, args.poly, builtin_polynomial))
    name = args.poly.split(":", 1)[-1]
    reports = [verify_hyperplane(p, r, m, name=name, **_hyperplane_options(config))]
    if args.mirror:
        signs = builtin_polynomial(args.poly).mirror if is_builtin(args.poly) else None
        if signs is None:
            raise InputError(f"{name} has no mirror symmetry under the known moments")
        reports.append(verify_mirror(p, r, m, *signs, name=name, **_hyperplane_options(config)))
    if config.output_mode == "json":
        _emit(to_json([rep.model_dump() for rep in reports] if len(reports) > 1 else reports[0]))
    else:
        for rep in reports:
            _emit(generator.hyperplane(rep))
    return _worst(rep.verdict for rep in reports)


def _verify_measure(args, config: RunConfig, generator: ReportGenerator) -> int:
    atoms, weights = load_measure(args.atoms)
    if args.weights:
        weights = load_weights(args.weights)
    r = _region_for(args.region, args.atoms, builtin_measure)
    m = target_for_case(_case_for(args.case, args.atoms, builtin_measure))
    report = verify_measure(atoms, weights, r, m, tol=args.tol)
    if config.output_mode == "json":
        _emit(to_json(report))
    else:
        _emit(generator.measure(report, m.basis.unicode_names))
    return report.verdict.exit_code


def _threshold(args, config: RunConfig, generator: ReportGenerator) -> int:
    opts = ThresholdOptions.from_config(config)
    bracket = tuple(parse_rational(v) for v in args.bracket) if args.bracket else None
    result = threshold(args.case, args.form, args.dir, args.tol, opts, bracket=bracket)
    files: List[str] = []
    if args.emit_certificates:
        files = emit_certificates(result, Path(args.emit_certificates))
    if config.output_mode == "json":
        _emit(to_json(threshold_document(result)))
    else:
        _emit(generator.threshold(result, files))
    if result.status != "ok":
        return EXIT_INDETERMINATE
    return _worst(v for v in (result.witness_verdict, result.separator_verdict) if v is not None)


def emit_certificates(result, directory: Path) -> List[str]:
    """witness.json, weights.json, separator.json and result.json"""
    directory.mkdir(parents=True, exist_ok=True)
    written = [
        write_json(atoms_document(result.witness.atoms, result.witness.weights), directory / "witness.json"),
        write_json(weights_document(result.witness.weights), directory / "weights.json"),
        write_json(result.separator.to_json(), directory / "separator.json"),
        write_json(threshold_document(result), directory / "result.json"),
    ]
    logger.info(f"Certificates written to {directory}")
    return [str(p) for p in written]


def _identities(args, config: RunConfig, generator: ReportGenerator) -> int:
    report = verify_identity_suite([parse_rational(e) for e in args.eps])
    if config.output_mode == "json":
        _emit(to_json(report.model_dump() | {"passed": report.passed}))
    else:
        _emit(generator.identities(report))
    return EXIT_OK if report.passed else EXIT_INVALID


def _minimize(args, config: RunConfig, generator: ReportGenerator) -> int:
    p = load_polynomial(args.poly)
    r = _region_for(args.region, args.poly, builtin_polynomial)
    result = global_min(p, r, grid_n=config.grid_n, digits=config.precision_digits, tol_kkt=config.tol_kkt)
    if config.output_mode == "json":
        _emit(to_json(result.to_dict()))
    else:
        _emit(generator.minimize(result, r))
    return EXIT_OK if result.converged else EXIT_INDETERMINATE


def _plot(args, config: RunConfig, generator: ReportGenerator) -> int:
    atoms, _ = load_measure(args.atoms)
    r = None
    if args.region or is_builtin(args.atoms):
        r = _region_for(args.region, args.atoms, builtin_measure)
    svg = generator.plot(atoms, r)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg, encoding="utf-8")
    logger.info(f"Wrote {len(atoms)} markers to {out}")
    _emit(str(out))
    return EXIT_OK


def _bounds(args, config: RunConfig, generator: ReportGenerator) -> int:
    rows = []
    verdicts = []
    for packaged in POLYNOMIALS.values():
        p = packaged.poly()
        r = packaged.default_region()
        m = target_for_case(packaged.case)
        checks = [(r, verify_hyperplane(p, r, m, name=packaged.name, **_hyperplane_options(config)))]
        if packaged.mirror is not None:
            mirrored = reflect(r, *packaged.mirror)
            checks.append(
                (mirrored, verify_mirror(p, r, m, *packaged.mirror, name=packaged.name, **_hyperplane_options(config)))
            )
        for region, report in checks:
            c = region.constraint
            rows.append(
                {
                    "case": packaged.case.upper(),
                    "statement": str(implied_bound(c.form, c.dir, c.bound)),
                    "certificate": report.name,
                    "verdict": report.verdict.value,
                }
            )
            verdicts.append(report.verdict)
    if config.output_mode == "json":
        _emit(to_json(rows))
    else:
        _emit(generator.bounds(rows))
    return _worst(verdicts)


def _self_check(config: RunConfig) -> int:
    minima = [
        (name, builtin_polynomial(name).poly(), builtin_polynomial(name).default_region()) for name in ("q", "r")
    ]
    reports = run_battery(seed=config.seed, minima=minima)
    if config.output_mode == "json":
        _emit(to_json([o.model_dump() for o in reports]))
    else:
        _emit(oracle_table(reports).to_string(index=False))
    return EXIT_OK if all(o.passed for o in reports) else EXIT_INVALID

