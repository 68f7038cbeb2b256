"""Command line interface: ``toral-entropy analyze | solve | verify | export``.

Exit codes
----------
0  success (solve: containment certified; verify: every check passed)
1  other library error
2  unreadable input / unknown export kind
3  matrix is not in GL(l, Z)
4  solve: search exhausted
5  solve: targets out of range
6  verify: a replayed value or oracle verdict does not match

Certificate JSON fields (stable): ``format, matrix, beta, epsilon, k, r, log_g,
per_k_window, contained, assumptions, psi_k, alpha0, tau, path, t, delta,
chart, options, set_description``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .cell_geometry import (ALPHA0_MARGIN, TAU_SAFETY, check_assumptions, iterated_bounds_log,
                            omega_k, psi_limit)
from .eps_jordan import eps_jordan, sandwich_check
from .errors import NotAutomorphism, SearchExhausted, TargetsOutOfRange, ToralError
from .exact_matrix import IntegerMatrix
from .oracle import component_bounds, verify_cellcover
from .solver import Construction, SolverOptions, replay, solve_params
from .spectral import spectral_data

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_NOT_GL = 0, 1, 2, 3
EXIT_EXHAUSTED, EXIT_RANGE, EXIT_MISMATCH = 4, 5, 6
REPORT_FORMAT = "toral-entropy-report/1"
REPLAY_RTOL = 1e-12


class InputError(Exception):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_matrix(obj) -> IntegerMatrix:
    if "rows" not in obj and "matrix" in obj:
        obj = obj["matrix"]
    try:
        return IntegerMatrix.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid matrix: {exc}") from exc


def _emit(text, path, out):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        out.write(text)


def _default_epsilon(sd):
    return min(c - 1 for c in sd.chi) / 10


def _options(args) -> SolverOptions:
    return SolverOptions(epsilon=args.epsilon, k_max=args.k_max, margin=args.margin,
                         tau_safety=args.tau_safety)


def cmd_analyze(args, out) -> int:
    t0 = time.perf_counter()
    A = _load_matrix(_load_json(args.matrix_file))
    sd = spectral_data(A)
    t1 = time.perf_counter()
    report = {"format": REPORT_FORMAT, "input": {"file": args.matrix_file}, "matrix": A.to_json(),
              "spectral": sd.to_dict()}
    if sd.u:
        eps = args.epsilon if args.epsilon is not None else _default_epsilon(sd)
        con = Construction.build(A, sd, eps, _options(args))
        ejf = eps_jordan(A, sd, eps)
        report["chart"] = dict(con.chart.to_dict(), epsilon=eps, alpha0=con.alpha0, tau=con.tau,
                               jordan_residual=ejf.residual, jordan_condition=ejf.condition)
    report["timings"] = {"spectral_s": t1 - t0, "total_s": time.perf_counter() - t0}

    lines = [
        f"det            {sd.det}",
        f"char poly      {sd.poly}",
        f"irreducible    {sd.irreducible}",
        f"ergodic        {sd.ergodic}  (cyclotomic factors: {list(sd.cyclotomic) or 'none'})",
        f"hyperbolic     {sd.hyperbolic}",
        f"h_top          {sd.h_top:.10f} nats",
        "  j   chi_j            zeta_j",
    ]
    lines += [f"  {j + 1:<3} {c:<16.10f} {z}" for j, (c, z) in enumerate(zip(sd.chi, sd.zeta))]
    lines.append(f"  rest (|lambda| <= 1): {sd.zeta_rest}")
    out.write("\n".join(lines) + "\n")
    if args.json_out:
        _emit(dumps(report), args.json_out, out)
    return EXIT_OK


def cmd_solve(args, out) -> int:
    A = _load_matrix(_load_json(args.matrix_file))
    cert = solve_params(A, args.beta1, args.beta2, _options(args))
    _emit(dumps(cert.to_json()), args.json_out, out)
    return EXIT_OK if cert.containment else EXIT_EXHAUSTED


def _rel_close(a, b, rtol=REPLAY_RTOL):
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def verify_certificate(cert: dict, generations: int = 5, threads: int = 1, seed: int = 0) -> dict:
    """Replay a certificate and run the oracle checks at its parameters."""
    A = _load_matrix(cert)
    opts = cert.get("options", {})
    k, eps, r = int(cert["k"]), float(cert["epsilon"]), [float(v) for v in cert["r"]]
    beta1, beta2 = (float(v) for v in cert["beta"])
    coords = cert.get("chart", {}).get("coords")
    sd, con, b = replay(A, eps, k, r, margin=opts.get("margin", ALPHA0_MARGIN),
                        tau_safety=opts.get("tau_safety", TAU_SAFETY), coords=coords)
    diffs = {}
    stored = [float(v) for v in cert["log_g"]]
    for name, new, old in (("log_g_minus", b.log_g_minus, stored[0]), ("log_g_plus", b.log_g_plus, stored[1])):
        if not _rel_close(new, old):
            diffs[name] = {"certificate": old, "replayed": new}
    contained = (k * beta1 <= b.log_g_minus) and (b.log_g_plus <= k * beta2)
    if contained != bool(cert["contained"]) or not contained:
        diffs["contained"] = {"certificate": cert["contained"], "replayed": contained}
    assumptions = check_assumptions(con.chart, con.chi, k, eps, r, con.alpha0)
    if not assumptions["all"]:
        diffs["assumptions"] = assumptions
    box = omega_k(con.chi, con.chart, k, eps, con.alpha0, con.tau)
    inside = box.feasible and all(a * (1 - 1e-12) <= v <= c * (1 + 1e-12) for a, v, c in zip(box.lo, r, box.hi))
    if not inside:
        diffs["omega_k"] = {"lo": list(box.lo), "hi": list(box.hi), "r": r}

    R_minus = [v * (c - eps) ** k for v, c in zip(r, con.chi)]
    R_plus = [v * (c + eps) ** k for v, c in zip(r, con.chi)]
    cover_lo = verify_cellcover(con.chart, R_minus, r, threads=threads)
    cover_hi = verify_cellcover(con.chart, R_plus, r, threads=threads)
    comps = component_bounds(con.chart, con.chi, eps, k, r, generations, threads=threads)
    ejf = eps_jordan(A, sd, eps)
    sandwich = sandwich_check(ejf, r, samples=2000, k=min(k, 10), seed=seed)
    for name, verdict in (("cellcover_lower", cover_lo), ("cellcover_upper", cover_hi)):
        if not verdict["pass"]:
            diffs[name] = verdict
    if not comps.passed:
        diffs["components"] = comps.to_dict()
    if not sandwich["pass"]:
        diffs["sandwich"] = sandwich
    return {
        "pass": not diffs,
        "diff": diffs,
        "replayed_log_g": [b.log_g_minus, b.log_g_plus],
        "cellcover": {"lower_disk": cover_lo, "upper_disk": cover_hi},
        "components": comps.to_dict(),
        "component_margins": {
            "log_n_minus_minus_log_g_minus": math.log(comps.n_minus) - comps.log_g_minus,
            "log_g_plus_minus_log_n_plus": comps.log_g_plus - math.log(comps.n_plus),
        },
        "sandwich": sandwich,
    }


def cmd_verify(args, out) -> int:
    cert = _load_json(args.certificate_file)
    try:
        verdict = verify_certificate(cert, args.generations, args.threads, args.seed)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed certificate: {exc}") from exc
    _emit(dumps(verdict), args.json_out, out)
    return EXIT_OK if verdict["pass"] else EXIT_MISMATCH


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def export_rows(report: dict, what: str, epsilon=None, k_max=None, points=101,
                generations=5, threads=1):
    A = _load_matrix(report)
    if what == "spectrum":
        sd = spectral_data(A)
        rows = [(i, z.real, z.imag, abs(z), res) for i, (z, res) in enumerate(sd.roots)]
        return ("index", "re", "im", "modulus", "residual"), rows
    if what == "psi-curve":
        sd = spectral_data(A)
        eps = epsilon if epsilon is not None else float(report.get("epsilon", 0.01))
        con = Construction.build(A, sd, eps, SolverOptions())
        limit = psi_limit(sd.chi, sd.zeta, eps)
        rows = []
        for k in range(1, (k_max or 10_000) + 1):
            box = con.box(k)
            if not box.feasible:
                continue
            b = iterated_bounds_log(con.chart, con.chi, k, box.log_lo, eps)
            rows.append((k, (b.log_g_plus - b.log_g_minus) / k, limit))
        return ("k", "psi_over_k", "limit"), rows
    if "k" not in report:
        raise InputError(f"export {what!r} needs a certificate")
    k, eps, r = int(report["k"]), float(report["epsilon"]), [float(v) for v in report["r"]]
    opts = report.get("options", {})
    sd, con, _ = replay(A, eps, k, r, margin=opts.get("margin", ALPHA0_MARGIN),
                        tau_safety=opts.get("tau_safety", TAU_SAFETY),
                        coords=report.get("chart", {}).get("coords"))
    if what == "bounds-sweep":
        box = con.box(k)
        rows = []
        for t in np.linspace(0.0, 1.0, points):
            b = con.bounds(k, box.diagonal(float(t)))
            rows.append((float(t), b.log_g_minus / k, b.log_g_plus / k))
        return ("t", "log_g_minus_over_k", "log_g_plus_over_k"), rows
    if what == "components":
        comps = component_bounds(con.chart, con.chi, eps, k, r, generations, threads=threads)
        return ("generation", "N_minus", "N_plus", "g_minus", "g_plus"), list(comps.generations())
    raise InputError(f"unknown export kind {what!r}")


EXPORT_KINDS = ("spectrum", "bounds-sweep", "psi-curve", "components")


def cmd_export(args, out) -> int:
    if args.what not in EXPORT_KINDS:
        raise InputError(f"unknown export kind {args.what!r}; choose from {', '.join(EXPORT_KINDS)}")
    report = _load_json(args.report_file)
    header, rows = export_rows(report, args.what, args.epsilon, args.k_max, args.points,
                               args.generations, args.threads)
    _emit(_csv(rows, header), args.out or args.csv_out, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", type=float, default=None, help="epsilon (default: min(chi_j - 1) / 10)")
    common.add_argument("--k-max", type=int, default=10_000, help="largest iterate k searched")
    common.add_argument("--margin", type=float, default=ALPHA0_MARGIN, help="alpha0 margin")
    common.add_argument("--tau-safety", type=float, default=TAU_SAFETY, help="tau safety factor")
    common.add_argument("--threads", type=int, default=1, help="oracle enumeration threads")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    common.add_argument("--json-out", default=None, help="write JSON here instead of stdout")
    common.add_argument("--csv-out", default=None, help="write CSV here instead of stdout")

    p = argparse.ArgumentParser(prog="toral-entropy", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="spectral classification of a matrix")
    a.add_argument("matrix_file")

    s = sub.add_parser("solve", parents=[common], help="certify an entropy window")
    s.add_argument("matrix_file")
    s.add_argument("beta1", type=float)
    s.add_argument("beta2", type=float)

    v = sub.add_parser("verify", parents=[common], help="replay a certificate against the oracle")
    v.add_argument("certificate_file")
    v.add_argument("--generations", type=int, default=5, help="generations m for component counts")

    e = sub.add_parser("export", parents=[common], help="CSV data for plotting")
    e.add_argument("report_file")
    e.add_argument("what", help="|".join(EXPORT_KINDS))
    e.add_argument("out", nargs="?", default=None)
    e.add_argument("--points", type=int, default=101, help="samples along the solver path")
    e.add_argument("--generations", type=int, default=5)
    return p


COMMANDS = {"analyze": cmd_analyze, "solve": cmd_solve, "verify": cmd_verify, "export": cmd_export}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotAutomorphism as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_GL
    except TargetsOutOfRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except SearchExhausted as exc:
        print(f"error: {exc}\n{dumps(exc.diagnosis)}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except ToralError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except BrokenPipeError:
        # downstream closed early (e.g. ``| head``); silence the interpreter's flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
