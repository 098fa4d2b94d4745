"""Command-line entry point.

Exit codes: 0 success, 1 certification failure, 2 parse or validation
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from typing import Sequence

import numpy as np

from .bc import validate_bc
from .characteristic import gamma_batch, make_problem
from .errors import InputError, NumericalError, PreconditionError
from .oracle import assemble_discrete_pencil, compare_roots
from .problem import load_problem
from .relations import selftest
from .report import Report, environment, record_dict, write_report
from .spectral import (
    EigenvalueRecord,
    SearchRegion,
    certify_root,
    isolation_radius,
    locate,
    verify_equality,
)
from .system import validate

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError("range needs lo < hi")
    return lo, hi


def _grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}") from None
    if n < 1 or len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n with n >= 1, got {text!r}")
    return lo, hi, n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report to this path")
    common.add_argument("--csv", help="write a CSV table (grid values or roots) to this path")
    common.add_argument("--rtol", type=float, help="integration tolerance override")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized commands")

    parser = argparse.ArgumentParser(
        prog="hamspec", description="Eigenvalue certification for linear Hamiltonian systems."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check coefficients and boundary condition")
    p.add_argument("file")

    p = sub.add_parser("gamma", parents=[common], help="tabulate the characteristic function")
    p.add_argument("file")
    p.add_argument("--grid", type=_grid, required=True, metavar="LO:HI:N")
    p.add_argument("--imag", type=float, default=0.0, help="imaginary offset of the grid")

    p = sub.add_parser("eigs", parents=[common], help="locate eigenvalues with analytic multiplicity")
    p.add_argument("file")
    p.add_argument("--range", type=_range, metavar="LO:HI")

    p = sub.add_parser("mult", parents=[common], help="multiplicities and certificates at one root")
    p.add_argument("file")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--radius", type=float, default=0.25, help="search radius around --lambda")

    p = sub.add_parser("verify", parents=[common], help="certify analytic = geometric multiplicity")
    p.add_argument("file")
    p.add_argument("--range", type=_range, metavar="LO:HI")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("oracle", parents=[common], help="compare with the discrete pencil oracle")
    p.add_argument("file")
    p.add_argument("--range", type=_range, metavar="LO:HI")
    p.add_argument("--match-tol", type=float, default=1e-10)

    p = sub.add_parser("relations", parents=[common], help="linear-relation utilities")
    p.add_argument("action", choices=["selftest"])
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--kmax", type=int, default=3)
    return parser


# --------------------------------------------------------------------------


def _load(args):
    doc = load_problem(args.file)
    tol = doc.tolerances()
    if args.rtol is not None:
        tol = tol.updated(rtol=args.rtol)
    return doc, doc.build_system(), doc.build_bc(), tol


def _region(args, doc) -> SearchRegion:
    rng = getattr(args, "range", None)
    base = doc.region()
    if rng is not None:
        if base is None:
            return SearchRegion(*rng)
        return SearchRegion(rng[0], rng[1], base.half_height, base.max_depth, base.samples_per_edge, base.max_refinement)
    if base is None:
        raise PreconditionError("no --range given and the problem has no solver region")
    return base


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _cmd_validate(args, report: Report, out) -> int:
    doc, spec, bc, tol = _load(args)
    report.problem = doc.name
    report.environment = environment(tol)
    sys_report = validate(spec, tol)
    bc_report = validate_bc(bc, tol)
    for label, rep in (("system", sys_report), ("bc", bc_report)):
        print(f"{label}: {'ok' if rep.ok else f'{len(rep.violations)} violation(s)'}", file=out)
        for v in rep.violations[:20]:
            print(f"  {v}", file=out)
        report.records.append(
            {
                "target": label,
                "ok": rep.ok,
                "violations": [
                    {"location": v.location, "matrix": v.matrix, "kind": v.kind, "magnitude": v.magnitude}
                    for v in rep.violations
                ],
            }
        )
    ok = sys_report.ok and bc_report.ok
    report.verdict = "OK" if ok else "INVALID"
    return EXIT_OK if ok else EXIT_INPUT


def _cmd_gamma(args, report: Report, out) -> int:
    doc, spec, bc, tol = _load(args)
    report.problem = doc.name
    report.environment = environment(tol)
    problem = make_problem(spec, bc, tol)
    lo, hi, n = args.grid
    lams = np.linspace(lo, hi, n) + 1j * args.imag
    batch = gamma_batch(problem, lams)
    header = ["re_lambda", "im_lambda", "re_gamma", "im_gamma", "scale"]
    rows = [
        [repr(float(l.real)), repr(float(l.imag)), repr(float(g.real)), repr(float(g.imag)), repr(float(s))]
        for l, g, s in zip(batch.lams, batch.values, batch.scales)
    ]
    if args.csv:
        _write_csv(args.csv, header, rows)
    else:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    report.records = [dict(zip(header, (float(x) for x in r))) for r in rows]
    return EXIT_OK


def _cmd_eigs(args, report: Report, out) -> int:
    doc, spec, bc, tol = _load(args)
    report.problem = doc.name
    report.environment = environment(tol)
    problem = make_problem(spec, bc, tol)
    region = _region(args, doc)
    result = locate(problem, region)
    for lam, k in result.roots:
        print(f"lambda = {lam:.12g}  tau1 = {k}", file=out)
        report.records.append({"lambda0": lam, "tau1": k})
    report.summary = {"region": [result.region.lam_min, result.region.lam_max], "count": result.total}
    if args.csv:
        _write_csv(args.csv, ["lambda0", "tau1"], [[repr(l), k] for l, k in result.roots])
    return EXIT_OK


def _print_record(rec, out):
    if isinstance(rec, EigenvalueRecord):
        print(
            f"lambda = {rec.lambda0:.12g}  tau1 = {rec.analytic_mult}  tau2 = {rec.geometric_mult}  "
            f"|reduced gamma| = {rec.reduced_gamma_abs:.6g}  {rec.verdict}",
            file=out,
        )
        for w in rec.warnings:
            print(f"  warning: {w}", file=out)
    else:
        print(f"lambda = {rec.lambda0:.12g}  {rec.verdict}: {rec.error}", file=out)


def _cmd_mult(args, report: Report, out) -> int:
    doc, spec, bc, tol = _load(args)
    report.problem = doc.name
    report.environment = environment(tol)
    problem = make_problem(spec, bc, tol)
    r = args.radius
    found = locate(problem, SearchRegion(args.lam - r, args.lam + r, half_height=r))
    if not found.roots:
        raise PreconditionError(f"no eigenvalue within {r} of {args.lam}")
    lams = [lam for lam, _ in found.roots]
    lam0 = min(lams, key=lambda x: abs(x - args.lam))
    rec = certify_root(problem, lam0, isolation_radius(lam0, lams, found.region))
    _print_record(rec, out)
    report.records = [record_dict(rec)]
    report.verdict = rec.verdict
    return EXIT_OK if rec.verdict == "PASS" else EXIT_FAIL


def _cmd_verify(args, report: Report, out) -> int:
    doc, spec, bc, tol = _load(args)
    report.problem = doc.name
    report.environment = environment(tol)
    problem = make_problem(spec, bc, tol)
    region = _region(args, doc)
    cert = verify_equality(problem, region, workers=args.workers)
    for rec in cert.records:
        _print_record(rec, out)
    for note in cert.notes:
        print(f"note: {note}", file=out)
    print(f"verdict: {cert.verdict}", file=out)
    report.records = [record_dict(r) for r in cert.records]
    report.summary = {
        "region": [cert.region.lam_min, cert.region.lam_max, cert.region.half_height],
        "count": cert.total_count,
        "notes": list(cert.notes),
    }
    report.verdict = cert.verdict
    if args.csv:
        rows = [
            [repr(r.lambda0), r.analytic_mult, r.geometric_mult, repr(r.reduced_gamma_abs), r.verdict]
            for r in cert.records
            if isinstance(r, EigenvalueRecord)
        ]
        _write_csv(args.csv, ["lambda0", "tau1", "tau2", "reduced_gamma_abs", "verdict"], rows)
    return EXIT_OK if cert.verdict == "PASS" else EXIT_FAIL


def _cmd_oracle(args, report: Report, out) -> int:
    doc, spec, bc, tol = _load(args)
    report.problem = doc.name
    report.environment = environment(tol)
    if doc.kind != "discrete":
        raise PreconditionError("the pencil oracle applies to discrete problems only")
    given = getattr(args, "range", None) or (
        (doc.region().lam_min, doc.region().lam_max) if doc.region() is not None else None
    )
    result = assemble_discrete_pencil(spec, bc, given, tol)
    oracle_roots = result.real_roots
    if given is None:
        if oracle_roots:
            xs = [lam for lam, _ in oracle_roots]
            span = max(1.0, max(xs) - min(xs))
            given = (min(xs) - 0.1 * span - 0.5, max(xs) + 0.1 * span + 0.5)
        else:
            given = (-4.0, 4.0)
    lo, hi = given
    oracle_roots = [(lam, k) for lam, k in oracle_roots if lo < lam < hi]
    problem = make_problem(spec, bc, tol)
    found = locate(problem, SearchRegion(lo, hi))
    cmp = compare_roots(oracle_roots, found.roots, args.match_tol)
    print(cmp.message(), file=out)
    for lam, k in oracle_roots:
        print(f"oracle lambda = {lam:.15g}  multiplicity = {k}", file=out)
    report.records = [{"lambda0": lam, "multiplicity": k} for lam, k in oracle_roots]
    report.summary = {
        "interval": [lo, hi],
        "degree": result.degree,
        "solver_roots": [{"lambda0": lam, "tau1": k} for lam, k in found.roots],
        "matched": cmp.matched,
        "expected": cmp.expected,
        "max_error": cmp.max_error,
        "message": cmp.message(),
    }
    report.verdict = "PASS" if cmp.ok else "FAIL"
    return EXIT_OK if cmp.ok else EXIT_FAIL


def _cmd_relations(args, report: Report, out) -> int:
    result = selftest(seed=args.seed, count=args.count, max_dim=args.dim, k_max=args.kmax)
    report.environment = environment(seed=args.seed)
    report.summary = {
        "count": result.count,
        "passed": result.passed,
        "max_dim": result.max_dim,
        "nilpotent_control_violation": result.control_violation,
    }
    report.records = list(result.failures)
    print(f"{result.passed}/{result.count} random self-adjoint relations passed", file=out)
    print(f"nilpotent control first violation at i = {result.control_violation}", file=out)
    report.verdict = "PASS" if result.ok else "FAIL"
    return EXIT_OK if result.ok else EXIT_FAIL


_COMMANDS = {
    "validate": _cmd_validate,
    "gamma": _cmd_gamma,
    "eigs": _cmd_eigs,
    "mult": _cmd_mult,
    "verify": _cmd_verify,
    "oracle": _cmd_oracle,
    "relations": _cmd_relations,
}


def run_command(argv: Sequence[str] | None = None, out=None) -> int:
    """Run one command; returns the exit code. Output goes to ``out`` (stdout by default)."""
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    report = Report(command=args.command)
    start = time.perf_counter()
    try:
        code = _COMMANDS[args.command](args, report, out)
    except InputError as exc:
        code = _error(report, exc, "INPUT_ERROR", out)
    except NumericalError as exc:
        code = _error(report, exc, "NUMERICAL_ERROR", out)
    except OSError as exc:
        code = _error(report, exc, "INPUT_ERROR", out)
    report.timing = {"seconds": time.perf_counter() - start}
    if args.out:
        write_report(report, args.out)
    return code


def _error(report: Report, exc: Exception, verdict: str, out) -> int:
    entry = {"type": type(exc).__name__, "message": str(exc)}
    path = getattr(exc, "path", None)
    if path is not None and not isinstance(exc, OSError):
        entry["path"] = path
    report.errors.append(entry)
    report.verdict = verdict
    print(f"error: {type(exc).__name__}: {exc}", file=out)
    if isinstance(exc, (InputError, OSError)):
        return EXIT_INPUT
    return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
