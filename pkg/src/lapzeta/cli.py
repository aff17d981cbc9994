"""Command-line front end: ``lapzeta <subcommand> [options]``.

Every subcommand builds a JSON-compatible document and prints it as a table
(default), JSON or CSV on stdout. ``--json PATH`` / ``--csv PATH`` also write
files. ``render`` re-prints a saved JSON document as the identical table.

Exit codes: 0 success, 2 bad flags or inputs, 3 zero eigenvalue without
``--exclude-zero-modes``, 4 numerical failure, 5 a verification assertion failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Callable

from . import __version__
from .coeffs import build_coeff_table
from .continuum import BoxSpec, zeta_decomposition_box, zeta_decomposition_massive_torus
from .errors import LapzetaError, NumericalFailure, ZeroEigenvalue
from .quadrature import QuadratureConfig
from .reglimit import cube_regularized_limit, default_basis, quarter_octave_grid
from .spectra import BoundaryCondition, LatticeSpec, logdet_exact, product_spectrum
from .verify import (chebyshev_product, chebyshev_u, hypercube_expansion_report,
                     massive_torus_report, ratio_2d)

EXIT_OK, EXIT_USAGE, EXIT_ZERO, EXIT_NUMERIC, EXIT_ASSERT = 0, 2, 3, 4, 5


# ---------------------------------------------------------------- parsing helpers


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("sizes must be positive")
    return vals


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or not all(v > 0 and math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("side lengths must be positive")
    return vals


def parse_grid(text: str) -> list[float]:
    """``start:stop:geometric[:ratio]`` (ratio 2 by default) or ``start:stop:linear[:step]``.

    A comma-separated list of values is also accepted.
    """
    if ":" not in text:
        vals = [float(v) for v in text.split(",")]
    else:
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        try:
            start, stop = float(parts[0]), float(parts[1])
            kind = parts[2]
            extra = float(parts[3]) if len(parts) == 4 else None
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
        if not (0 < start <= stop):
            raise argparse.ArgumentTypeError("grid needs 0 < start <= stop")
        vals = []
        if kind == "geometric":
            ratio = 2.0 if extra is None else extra
            if not ratio > 1:
                raise argparse.ArgumentTypeError("geometric ratio must exceed 1")
            k = 0
            while start * ratio**k <= stop * (1 + 1e-12):
                vals.append(start * ratio**k)
                k += 1
        elif kind == "linear":
            step = start if extra is None else extra
            if not step > 0:
                raise argparse.ArgumentTypeError("linear step must be positive")
            k = 0
            while start + k * step <= stop * (1 + 1e-12):
                vals.append(start + k * step)
                k += 1
        else:
            raise argparse.ArgumentTypeError(f"grid kind must be geometric or linear, got {kind!r}")
    if len(vals) < 2:
        raise argparse.ArgumentTypeError("grid needs at least two points")
    return vals


def _int_grid(values: list[float]) -> list[int]:
    out: list[int] = []
    for v in values:
        n = int(round(v))
        if not out or n != out[-1]:
            out.append(n)
    return out


def _quad(args) -> QuadratureConfig:
    return QuadratureConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol)


# ---------------------------------------------------------------- rendering


def _fmt(value) -> str:
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def _flatten(prefix: str, obj, out: list[tuple[str, str]]) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    else:
        out.append((prefix, _fmt(obj)))


RECORD_COLUMNS = ("u", "logdet", "predicted", "residual")


def render_table(doc: dict) -> str:
    rows: list[tuple[str, str]] = []
    _flatten("", {k: v for k, v in doc.items() if k != "records"}, rows)
    width = max((len(k) for k, _ in rows), default=0)
    lines = [f"{k.ljust(width)}  {v}" for k, v in rows]
    records = doc.get("records")
    if records:
        lines.append("")
        lines.append("  ".join(c.rjust(24) for c in RECORD_COLUMNS))
        for r in records:
            lines.append("  ".join(_fmt(float(r[c])).rjust(24) for c in RECORD_COLUMNS))
    return "\n".join(lines) + "\n"


def render_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    records = doc.get("records")
    if records:
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            writer.writerow([format(float(r[c]), ".17g") for c in RECORD_COLUMNS])
    else:
        rows: list[tuple[str, str]] = []
        _flatten("", doc, rows)
        writer.writerow(["key", "value"])
        writer.writerows(rows)
    return buf.getvalue()


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        return render_csv(doc)
    return render_table(doc)


def _report_records(report) -> list[dict]:
    return [{"u": r.u, "sizes": list(r.sizes), "logdet": r.exact_logdet, "predicted": r.predicted,
             "residual": r.residual, "terms": dict(r.terms)} for r in report.records]


# ---------------------------------------------------------------- subcommands


def cmd_logdet(args) -> tuple[dict, list]:
    spec = LatticeSpec(args.dims, BoundaryCondition.parse(args.bc), args.mass_squared, args.rescale)
    value = logdet_exact(spec, exclude_zero_modes=args.exclude_zero_modes, workers=args.workers)
    spectrum = product_spectrum(spec)
    doc = {"command": "logdet", "dims": list(spec.sizes), "bc": spec.bc.value,
           "mass_squared": spec.mass_squared, "rescale": spec.rescale,
           "exclude_zero_modes": args.exclude_zero_modes, "eigenvalue_count": spectrum.total_count,
           "zero_modes": spectrum.zero_modes, "logdet": value}
    return doc, []


def cmd_zeta_det(args) -> tuple[dict, list]:
    geometry = args.geometry or ("torus" if args.mass else "hypercube")
    box = BoxSpec(args.box, args.mass)
    if geometry == "torus":
        dec = zeta_decomposition_massive_torus(box, _quad(args))
    else:
        dec = zeta_decomposition_box(box, _quad(args))
    return {"command": "zeta-det", **dec.as_dict()}, []


def cmd_coeffs(args) -> tuple[dict, list]:
    table = build_coeff_table(args.d, _quad(args), args.workers)
    doc = {"command": "coeffs", **json.loads(table.to_json()), "fingerprint": table.fingerprint}
    return doc, []


def _converged(report, tol: float) -> tuple[bool, str]:
    if max(abs(r) for r in report.residuals) <= tol:
        return True, "residuals within tolerance"
    if report.cauchy_decreasing():
        return True, "residual increments strictly decreasing"
    return False, "residuals neither within tolerance nor Cauchy-decreasing"


def _verify_doc(name: str, report, tol: float) -> tuple[dict, list]:
    ok, reason = _converged(report, tol)
    doc = {"command": name, "geometry": report.geometry, "sides": list(report.sides),
           "mass": report.mass, "coefficient_fingerprint": report.fingerprint,
           "residual_tolerance": tol, "converged": ok, "reason": reason,
           "summary": report.summary, "records": _report_records(report)}
    failures = [] if ok else [{"check": "convergence", "detail": reason,
                               "increments": report.increments}]
    return doc, failures


def cmd_verify_hypercube(args) -> tuple[dict, list]:
    report = hypercube_expansion_report(BoxSpec(args.box), args.u_grid, quad=_quad(args),
                                        workers=args.workers)
    return _verify_doc("verify-hypercube", report, args.residual_tol)


def cmd_verify_massive_torus(args) -> tuple[dict, list]:
    report = massive_torus_report(BoxSpec(args.box, args.mass), args.u_grid, quad=_quad(args),
                                  workers=args.workers)
    return _verify_doc("verify-massive-torus", report, args.residual_tol)


def cmd_reglim(args) -> tuple[dict, list]:
    if args.n_grid is None:
        grid = [8 * 2**k for k in range(8)] if args.d == 1 else quarter_octave_grid(16, 256)
    else:
        grid = _int_grid(args.n_grid)
    basis = default_basis(args.d, 2 if args.extended_basis else 0)
    result = cube_regularized_limit(args.d, grid, basis=basis, workers=args.workers)
    reference = zeta_decomposition_box(BoxSpec((1.0,) * args.d), _quad(args)).log_det
    diff = result.log_det_zeta - reference
    ok = abs(diff) <= args.tol
    doc = {"command": "reglim", **result.as_dict(), "log_det_zeta_quadrature": reference,
           "difference": diff, "tolerance": args.tol, "passed": ok}
    failures = [] if ok else [{"check": "regularized_limit_chain", "difference": diff}]
    return doc, failures


def cmd_ratio2d(args) -> tuple[dict, list]:
    r = ratio_2d(args.n1, args.n2, args.mass_squared)
    rel_corrected = abs(r.lhs / r.rhs_corrected - 1.0)
    rel_printed = abs(r.lhs / r.rhs_paper - 1.0)
    ok = rel_corrected <= args.tol
    doc = {"command": "ratio2d", "n1": args.n1, "n2": args.n2, "mass_squared": args.mass_squared,
           "lhs": r.lhs, "rhs_printed": r.rhs_paper, "rhs_corrected": r.rhs_corrected,
           "relative_error_corrected": rel_corrected, "relative_error_printed": rel_printed,
           "printed_mismatch": rel_printed > args.tol, "lhs_over_printed": r.lhs / r.rhs_paper,
           "passed": ok}
    failures = [] if ok else [{"check": "corrected_identity", "relative_error": rel_corrected}]
    return doc, failures


def cmd_chebyshev(args) -> tuple[dict, list]:
    c = chebyshev_product(args.n, args.x)
    doc = {"command": "chebyshev", "n": args.n, "x": args.x, **c._asdict(),
           "chebyshev_u_form": chebyshev_u(args.n, args.x)}
    return doc, []


def cmd_render(args) -> tuple[dict, list]:
    with open(args.input) as fh:
        return json.load(fh), []


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser, quad: bool = False) -> None:
    p.add_argument("--format", choices=("table", "json", "csv"), default="table",
                   help="stdout format (default: table)")
    p.add_argument("--json", dest="json_path", metavar="PATH", help="also write the JSON document here")
    p.add_argument("--csv", dest="csv_path", metavar="PATH", help="also write CSV here")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: LAPZETA_THREADS or 1); never changes results")
    if quad:
        p.add_argument("--abs-tol", type=float, default=1e-12, help="quadrature absolute tolerance")
        p.add_argument("--rel-tol", type=float, default=1e-12, help="quadrature relative tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lapzeta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("logdet", help="exact log-determinant of a lattice Laplacian")
    p.add_argument("--dims", type=_int_list, required=True, help="axis sizes, e.g. 8,8")
    p.add_argument("--bc", choices=[b.value for b in BoundaryCondition], default="dirichlet")
    p.add_argument("--mass-squared", type=float, default=0.0, help="shift added to every eigenvalue")
    p.add_argument("--rescale", type=float, default=None, help="multiply eigenvalues by U^2")
    p.add_argument("--exclude-zero-modes", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_logdet)

    p = sub.add_parser("zeta-det", help="zeta-regularized log-determinant of a box or torus")
    p.add_argument("--box", type=_float_list, required=True, help="side lengths, e.g. 1,1")
    p.add_argument("--mass", type=float, default=0.0)
    p.add_argument("--geometry", choices=("hypercube", "torus"), default=None,
                   help="default: hypercube when massless, torus when massive")
    _common(p, quad=True)
    p.set_defaults(func=cmd_zeta_det)

    p = sub.add_parser("coeffs", help="table of bulk/boundary coefficients L^d_i(0)")
    p.add_argument("--d", type=int, required=True)
    _common(p, quad=True)
    p.set_defaults(func=cmd_coeffs)

    for name, func, helptext in (
            ("verify-hypercube", cmd_verify_hypercube, "Dirichlet lattice expansion residuals"),
            ("verify-massive-torus", cmd_verify_massive_torus, "massive torus remainder convergence")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--box", type=_float_list, required=True)
        if name == "verify-massive-torus":
            p.add_argument("--mass", type=float, required=True)
        p.add_argument("--u-grid", type=parse_grid, required=True,
                       help="start:stop:geometric[:ratio] or start:stop:linear[:step]")
        p.add_argument("--residual-tol", type=float, default=1e-6,
                       help="residuals at or below this pass outright (default 1e-6)")
        _common(p, quad=True)
        p.set_defaults(func=func)

    p = sub.add_parser("reglim", help="regularized limit of log det(n^2 Delta) on the unit cube")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-grid", type=parse_grid, default=None,
                   help="default 8:1024:geometric for d=1, quarter-octave 16..256 otherwise")
    p.add_argument("--extended-basis", action="store_true", help="add n^-1 and n^-2 columns")
    p.add_argument("--tol", type=float, default=1e-2, help="allowed gap to the quadrature value")
    _common(p, quad=True)
    p.set_defaults(func=cmd_reglim)

    p = sub.add_parser("ratio2d", help="torus over Dirichlet^4 determinant identity in 2-d")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--mass-squared", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    _common(p)
    p.set_defaults(func=cmd_ratio2d)

    p = sub.add_parser("chebyshev", help="cycle product against its closed form")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=float, required=True)
    _common(p)
    p.set_defaults(func=cmd_chebyshev)

    p = sub.add_parser("render", help="print a saved JSON document")
    p.add_argument("input")
    _common(p)
    p.set_defaults(func=cmd_render)
    return parser


def _emit(doc: dict, args) -> None:
    sys.stdout.write(render(doc, args.format))
    if args.json_path:
        with open(args.json_path, "w") as fh:
            fh.write(render(doc, "json"))
    if args.csv_path:
        with open(args.csv_path, "w") as fh:
            fh.write(render_csv(doc))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func: Callable = args.func
    try:
        doc, failures = func(args)
    except ZeroEigenvalue as exc:
        print(f"lapzeta: {exc}", file=sys.stderr)
        return EXIT_ZERO
    except NumericalFailure as exc:
        print(f"lapzeta: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LapzetaError, ValueError, OSError) as exc:
        print(f"lapzeta: {exc}", file=sys.stderr)
        return EXIT_USAGE
    # normalize to plain JSON types so that render() of a re-read file is identical
    doc = json.loads(json.dumps(doc))
    if failures:
        doc["status"] = "fail"
        doc["failures"] = failures
    elif args.command != "render":
        doc["status"] = "ok"
    _emit(doc, args)
    if failures:
        print(json.dumps({"status": "fail", "command": args.command, "failures": failures}),
              file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
