"""Command-line entry point: ``qgeo verify-intelligent|random-sweep|trace-path``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import __version__
from .core import (
    HermitianGenerator,
    QGeoError,
    QuantumState,
    ToleranceConfig,
    batch_moments,
    random_hermitian,
    random_state,
    random_unitary,
)
from .evolution import ParameterGrid, sample_path
from .geometry import analyze_path, ray_angle
from .intelligent import (
    EQ7_TOL,
    NONORTHOGONAL,
    ORTHOGONAL,
    TRANSPORT_TOL,
    SplitGeneratorSpec,
    horesh_mann_family,
    nonorthogonal_family,
    verify_theorem,
)
from .pbur import evaluate_pbur

SCHEMA_VERSION = 1
TRACE_COLUMNS = ["lambda", "delta_A", "fidelity_to_start", "cumulative_S", "cumulative_S0_chord"]
INEQUALITY_TOL = 1e-6
GEODESIC_GAP_TOL = 1e-9
VARIANCE_TOL = 1e-10
OVERLAP_TOL = 1e-10

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(QGeoError, ValueError):
    pass


def _finite(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _check(name: str, value, tolerance, passed: bool) -> dict:
    return {"name": name, "value": _finite(value), "tolerance": _finite(tolerance), "pass": bool(passed)}


def _tolerances(args) -> ToleranceConfig:
    return ToleranceConfig(
        saturation_rel=args.tol_saturation,
        residual_abs=args.tol_residual,
        rank_cutoff=args.tol_rank,
    )


def _spectrum(text: str) -> np.ndarray:
    try:
        values = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise ConfigError(f"cannot parse spectrum {text!r}") from exc
    if values.size < 2:
        raise ConfigError("spectrum needs at least two values")
    return values


def _config_echo(args) -> dict:
    skip = {"func", "out"}
    return {k: _finite(v) for k, v in sorted(vars(args).items()) if k not in skip}


def _orthogonal_family(args):
    A = HermitianGenerator(np.diag(_spectrum(args.spectrum)))
    fam = horesh_mann_family(A, args.i, args.j, hbar=args.hbar)
    return fam.rephased(np.exp(1j * args.phase))


def _nonorthogonal_family(args):
    spec = SplitGeneratorSpec(dimension=args.dimension, i=args.i, j=args.j, a0=args.a0, a1=args.a1)
    return nonorthogonal_family(spec, hbar=args.hbar).rephased(np.exp(1j * args.phase))


def _family_checks(fam, lam2, args, tol) -> tuple:
    grid = fam.grid(lam2, args.n_samples)
    theorem = verify_theorem(fam, grid, tol)
    path = sample_path(fam.generator, fam.psi0, grid, hbar=fam.hbar, tol=tol)
    pbur = evaluate_pbur(path, tol=tol)
    k = fam.kind
    checks = [
        _check(f"{k}.pbur_ratio", pbur.ratio, pbur.tolerance, pbur.saturated),
        _check(f"{k}.geodesic_residual", theorem.residual_max, theorem.residual_tol, theorem.residual_ok),
        _check(f"{k}.gram_rank", theorem.rank, 2, theorem.rank_ok),
        _check(f"{k}.eq7_deviation", theorem.eq7_deviation, EQ7_TOL, theorem.eq7_match),
        _check(f"{k}.initial_vectors", theorem.initial_deviation, EQ7_TOL, theorem.initial_match),
        _check(f"{k}.transport_condition", theorem.transport_defect, TRANSPORT_TOL, theorem.transport_ok),
    ]
    if k == NONORTHOGONAL:
        spread = batch_moments(fam.generator.matrix, path.states)[1]
        dev = float(np.max(np.abs(spread - fam.a1)))
        checks.append(_check(f"{k}.variance_identity", dev, VARIANCE_TOL, dev < VARIANCE_TOL))
    elif math.isclose(grid.end, fam.threshold, rel_tol=1e-12):
        overlap = abs(np.vdot(path.states[0], path.states[-1]))
        checks.append(_check(f"{k}.endpoint_overlap", overlap, OVERLAP_TOL, overlap < OVERLAP_TOL))
    return checks, pbur, theorem


def cmd_verify_intelligent(args) -> tuple:
    tol = _tolerances(args)
    kinds = [ORTHOGONAL, NONORTHOGONAL] if args.kind == "both" else [args.kind]
    checks, ratios, residuals, families = [], [], [], {}
    for kind in kinds:
        fam = _orthogonal_family(args) if kind == ORTHOGONAL else _nonorthogonal_family(args)
        fam_checks, pbur, theorem = _family_checks(fam, args.lambda2, args, tol)
        checks += fam_checks
        ratios.append(pbur.ratio)
        residuals.append(theorem.residual_max)
        families[kind] = {
            "lambda2": fam.grid(args.lambda2, args.n_samples).end,
            "threshold": fam.threshold,
            "avg_uncertainty": pbur.avg_uncertainty,
            "delta_lambda": pbur.delta_lambda,
            "product": pbur.product,
            "bound": pbur.bound,
            "ratio": pbur.ratio,
            "saturated": pbur.saturated,
            "S": pbur.S,
            "S0": pbur.S0,
            "diagnostics": list(pbur.diagnostics) + list(fam.diagnostics),
        }
    passed = all(c["pass"] for c in checks)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify-intelligent",
        "config": _config_echo(args),
        "checks": checks,
        "families": families,
        "summary": {
            "pass": passed,
            "worst_ratio": max(ratios, key=lambda r: abs(r - 1.0)),
            "max_residual": max(residuals),
        },
    }
    return report, passed


def _random_trial(rng, dim, args, tol) -> dict:
    if args.ensemble == "split":
        i, j = (int(x) for x in rng.choice(dim, size=2, replace=False))
        a0 = float(rng.uniform(-2.0, 2.0))
        a1 = float(rng.uniform(0.2, 2.0))
        spec = SplitGeneratorSpec(dim, i, j, a0, a1, basis=random_unitary(dim, rng))
        fam = nonorthogonal_family(spec, hbar=args.hbar)
        A, psi0 = fam.generator, QuantumState(fam.psi_i)
        lam2 = float(rng.uniform(0.05, 0.95)) * fam.threshold
    else:
        A, psi0 = random_hermitian(dim, rng), random_state(dim, rng)
        lam2 = args.lambda2
    path = sample_path(A, psi0, ParameterGrid(0.0, lam2, args.n_samples), hbar=args.hbar, tol=tol)
    geo = analyze_path(path, tol=tol)
    try:
        ratio = evaluate_pbur(path, tol=tol).ratio
    except QGeoError:
        ratio = None
    return {
        "dimension": dim,
        "lambda2": lam2,
        "S": geo.S,
        "S0": geo.S0,
        "gap": geo.S - geo.S0,
        "ratio": ratio,
        "residual_max": geo.residual_max,
        "quadrature_error": geo.quadrature_error,
    }


def cmd_random_sweep(args) -> tuple:
    if args.trials < 1:
        raise ConfigError(f"trials must be >= 1, got {args.trials}")
    max_dim = args.max_dimension or args.dimension
    if args.dimension < 2 or max_dim < args.dimension:
        raise ConfigError(f"invalid dimension range [{args.dimension}, {max_dim}]")
    tol = _tolerances(args)
    rng = np.random.default_rng(args.seed)
    trials = []
    for _ in range(args.trials):
        dim = int(rng.integers(args.dimension, max_dim + 1))
        trials.append(_random_trial(rng, dim, args, tol))
    gaps = np.array([t["gap"] for t in trials])
    violations = int(np.count_nonzero(gaps < -INEQUALITY_TOL))
    ratios = [t["ratio"] for t in trials if t["ratio"] is not None]
    min_ratio = min(ratios) if ratios else math.nan
    checks = [
        _check("inequality_violations", violations, INEQUALITY_TOL, violations == 0),
        _check("pbur_ratio_floor", min_ratio, tol.saturation_rel, (not ratios) or min_ratio >= 1 - tol.saturation_rel),
    ]
    if args.ensemble == "split":
        worst = float(np.max(np.abs(gaps)))
        checks.append(_check("geodesic_gap", worst, GEODESIC_GAP_TOL, worst < GEODESIC_GAP_TOL))
    passed = all(c["pass"] for c in checks)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "random-sweep",
        "config": _config_echo(args),
        "checks": checks,
        "trials": [{k: _finite(v) for k, v in t.items()} for t in trials],
        "summary": {
            "pass": passed,
            "min_gap": _finite(float(np.min(gaps))),
            "median_gap": _finite(float(np.median(gaps))),
            "violations": violations,
            "worst_ratio": _finite(min_ratio),
            "max_residual": _finite(max(t["residual_max"] for t in trials)),
        },
    }
    return report, passed


def trace_rows(path, A=None) -> list:
    """Plot-ready rows (one per sample) in ``TRACE_COLUMNS`` order."""
    A = path.generator if A is None else A
    spread = batch_moments(A.matrix, path.states)[1]
    start = path.states[0]
    fidelity = np.abs(path.states @ start.conj()) ** 2
    cum_s = cumulative_trapezoid(2.0 * spread / path.hbar, dx=path.grid.step, initial=0.0)
    chord = [ray_angle(start, s) for s in path.states]
    return [
        [float(lam), float(d), float(f), float(c), float(b)]
        for lam, d, f, c, b in zip(path.parameters, spread, fidelity, cum_s, chord)
    ]


def cmd_trace_path(args) -> tuple:
    tol = _tolerances(args)
    if args.kind == "eigenstate":
        values = _spectrum(args.spectrum)
        A = HermitianGenerator(np.diag(values))
        psi0 = QuantumState.basis(values.size, args.i)
        lam2 = args.lambda2 if args.lambda2 is not None else 1.0
        path = sample_path(A, psi0, ParameterGrid(0.0, lam2, args.n_samples), hbar=args.hbar, tol=tol)
    else:
        fam = _orthogonal_family(args) if args.kind == ORTHOGONAL else _nonorthogonal_family(args)
        path = fam.path(args.lambda2, args.n_samples, tol)
    rows = trace_rows(path)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "trace-path",
        "config": _config_echo(args),
        "columns": TRACE_COLUMNS,
        "rows": rows,
    }
    return report, True


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(x) if isinstance(x, float) else str(x)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "rows" in report:
        writer.writerow(report["columns"])
        for row in report["rows"]:
            writer.writerow([_fmt(x) for x in row])
    else:
        writer.writerow(["name", "value", "tolerance", "pass"])
        for c in report["checks"]:
            writer.writerow([c["name"], _fmt(c["value"]), _fmt(c["tolerance"]), _fmt(c["pass"])])
    return buf.getvalue()


def _add_common(p: argparse.ArgumentParser, default_format: str) -> None:
    p.add_argument("--hbar", type=float, default=1.0, help="reduced Planck constant (default 1)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--n-samples", type=int, default=1001, help="grid samples")
    p.add_argument("--tol-saturation", type=float, default=1e-9, help="relative saturation tolerance")
    p.add_argument("--tol-residual", type=float, default=1e-6, help="absolute geodesic residual tolerance")
    p.add_argument("--tol-rank", type=float, default=1e-8, help="relative Gram eigenvalue cutoff")
    p.add_argument("--format", choices=["json", "csv"], default=default_format)
    p.add_argument("--out", default=None, help="output path (default stdout)")


def _add_family(p: argparse.ArgumentParser, kinds, default_kind) -> None:
    p.add_argument("--kind", choices=kinds, default=default_kind)
    p.add_argument("--a0", type=float, default=2.0, help="degenerate level of the split generator")
    p.add_argument("--a1", type=float, default=1.0, help="coupling of the split generator")
    p.add_argument("--dimension", type=int, default=2, help="Hilbert space dimension (split generator)")
    p.add_argument("--i", type=int, default=0, help="first level index")
    p.add_argument("--j", type=int, default=1, help="second level index")
    p.add_argument("--spectrum", default="1,3", help="comma-separated eigenvalues (orthogonal family)")
    p.add_argument("--lambda2", type=float, default=None, help="final parameter value")
    p.add_argument("--phase", type=float, default=0.0, help="global phase angle applied to the family")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgeo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qgeo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-intelligent", help="verify saturation and the geodesic property of intelligent states")
    _add_family(p, [ORTHOGONAL, NONORTHOGONAL, "both"], "both")
    _add_common(p, "json")
    p.set_defaults(func=cmd_verify_intelligent)

    p = sub.add_parser("random-sweep", help="check S >= S0 on random generators and states")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--dimension", type=int, default=4)
    p.add_argument("--max-dimension", type=int, default=None, help="draw dimensions uniformly up to this value")
    p.add_argument("--lambda2", type=float, default=1.0, help="final parameter value (gue ensemble)")
    p.add_argument("--ensemble", choices=["gue", "split"], default="gue")
    _add_common(p, "json")
    p.set_defaults(func=cmd_random_sweep, n_samples=201)

    p = sub.add_parser("trace-path", help="emit delta_A, fidelity and cumulative lengths along a path")
    _add_family(p, [ORTHOGONAL, NONORTHOGONAL, "eigenstate"], NONORTHOGONAL)
    _add_common(p, "csv")
    p.set_defaults(func=cmd_trace_path)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, passed = args.func(args)
        text = render(report, args.format)
    except (QGeoError, ValueError) as exc:
        print(f"qgeo: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.out is None:
            sys.stdout.write(text)
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"qgeo: error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
