"""Command-line front end.

Subcommands: moments | correlations | verify | scan.  Output is CSV (with a
header row) or JSON; numbers are rendered as decimal strings at the requested
precision so results survive any JSON reader unchanged.  Exit codes: 0 on
success, 2 on a regime refusal or bad parameters, 3 on a numerical failure.
In JSON mode nothing is printed until the whole computation finished, so a
failure produces a single machine-readable error object instead of a partial
table.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

from mpmath import fabs, mp, mpf

from .errors import IsingCorrError, NumericalFailure, RegimeRefusal
from .lattice import Couplings, classify_couplings, derive
from .moments import extend_by_recurrence, moment_window, recurrence_residual
from .precision import default_precision, to_mpf, workdps
from .square import (ColumnParams, column_system, dpv_system,
                     sigma_residual_at_t, triangular_limit_check)
from .toeplitz import determinant_series
from .verify import CHECK_GROUPS, run_verify
from .weights import SquareColumnWeight, SquareDiagonalWeight, TriangularWeight
from . import garnier as _garnier

EXIT_OK = 0
EXIT_REGIME = 2
EXIT_NUMERICAL = 3


def _fmt(x, prec: int) -> str:
    with workdps(prec):
        return mp.nstr(mpf(x), prec)


def _emit(rows: List[Dict[str, str]], header: Sequence[str], fmt: str,
          stream) -> None:
    if fmt == "csv":
        writer = csv.DictWriter(stream, fieldnames=list(header))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    else:
        json.dump({"rows": rows}, stream, indent=2, sort_keys=True)
        stream.write("\n")


def _emit_error(exc: Exception, fmt: str, stream) -> None:
    if fmt == "json":
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  stream, indent=2, sort_keys=True)
        stream.write("\n")
    else:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)


def _build_weight(args, prec: int):
    if args.lattice == "triangular":
        if not args.couplings:
            raise RegimeRefusal("triangular lattice needs --couplings K1,K2,K3")
        ks = args.couplings.split(",")
        if len(ks) != 3:
            raise RegimeRefusal("--couplings expects three comma-separated values")
        c = Couplings(*ks)
        return TriangularWeight.from_couplings(c, prec), c
    if args.lattice == "square-diagonal":
        if args.alpha is not None:
            return SquareDiagonalWeight.from_alpha(args.alpha, prec), None
        if args.couplings:
            k1, k2 = args.couplings.split(",")[:2]
            return SquareDiagonalWeight.from_couplings(k1, k2, prec), None
        raise RegimeRefusal("square-diagonal needs --alpha or --couplings K1,K2")
    if args.lattice == "square-column":
        if args.alphas:
            a1, a2 = args.alphas.split(",")
            return SquareColumnWeight.from_alphas(a1, a2, prec), None
        if args.couplings:
            k1, k2 = args.couplings.split(",")[:2]
            return SquareColumnWeight.from_couplings(k1, k2, prec), None
        raise RegimeRefusal("square-column needs --alphas a1,a2 or --couplings K1,K2")
    raise RegimeRefusal(f"unknown lattice {args.lattice!r}")


def cmd_moments(args) -> int:
    prec = args.precision
    weight, _ = _build_weight(args, prec)
    lo, hi = -(args.nmax + 1), args.nmax + 1
    with workdps(prec):
        table = moment_window(weight, lo, hi, prec)
        rows = []
        order = weight.order
        for n in range(lo, hi + 1):
            row = {"n": str(n), "w": _fmt(table[n], prec),
                   "source": table.source(n).value, "precision": str(prec)}
            if args.cross_check:
                if lo + order - 1 <= n - 1 and n + 1 <= hi and n - order + 1 >= lo:
                    row["recurrence_residual"] = _fmt(
                        recurrence_residual(table, n), 8)
                else:
                    row["recurrence_residual"] = ""
            rows.append(row)
    header = ["n", "w", "source", "precision"]
    if args.cross_check:
        header.append("recurrence_residual")
    _emit(rows, header, args.format, sys.stdout)
    return EXIT_OK


def _series_for(args, prec: int):
    weight, c = _build_weight(args, prec)
    nmax = args.nmax
    with workdps(prec):
        d = None
        if args.method in ("garnier", "both") and weight.kind == "triangular":
            # classifier gate fires before any quadrature is attempted
            d = derive(c, prec=prec, tol_regime=to_mpf(args.tol_regime))
            if not d.regime.allows_nonlinear:
                raise RegimeRefusal(
                    f"nonlinear route refused: regime={d.regime.value}",
                    regime=d.regime)
        need = max(nmax + 1, 3)
        table = moment_window(weight, -need, need, prec)
        out = {}
        if args.method in ("determinant", "both"):
            out["determinant"] = determinant_series(table, nmax, prec)
        if args.method in ("garnier", "both"):
            if weight.kind == "triangular":
                out["garnier"] = _garnier.iterate(table, d, nmax).series
            elif weight.kind == "square-diagonal":
                out["garnier"] = dpv_system(table, weight.alpha, nmax)
            else:
                p = ColumnParams.from_alphas(weight.alpha1, weight.alpha2, prec)
                out["garnier"] = column_system(table, p, nmax)
        return out


def cmd_correlations(args) -> int:
    prec = args.precision
    series = _series_for(args, prec)
    rows = []
    with workdps(prec):
        for n in range(args.nmax + 1):
            row = {"n": str(n)}
            if "determinant" in series:
                row["I_determinant"] = _fmt(series["determinant"][n], prec)
            if "garnier" in series:
                row["I_garnier"] = _fmt(series["garnier"][n], prec)
            if len(series) == 2:
                a, b = series["determinant"][n], series["garnier"][n]
                row["rel_discrepancy"] = _fmt(fabs(a - b) / max(1, fabs(a)), 8)
            rows.append(row)
    header = list(rows[0].keys())
    _emit(rows, header, args.format, sys.stdout)
    return EXIT_OK


def cmd_verify(args) -> int:
    only = args.only.split(",") if args.only else None
    result = run_verify(prec=args.precision, only=only,
                        inject_corruption=args.inject_corruption)
    rows = [r.as_dict() for r in result.records]
    if args.format == "json":
        payload = {"precision": str(args.precision),
                   "passed": result.passed,
                   "checks": rows,
                   "timings_s": {k: round(v, 3) for k, v in result.timings.items()}}
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        _emit(rows, ["group", "point", "name", "value", "tol", "passed"],
              "csv", sys.stdout)
    return EXIT_OK if result.passed else EXIT_NUMERICAL


def _scan_point(payload):
    """One scan point; runs in a worker process, returns plain strings."""
    (axis, value, base, prec) = payload
    args = argparse.Namespace(**base)
    if axis in ("k1", "k2", "k3"):
        ks = args.couplings.split(",")
        ks["k1 k2 k3".split().index(axis)] = value
        args.couplings = ",".join(ks)
    elif axis == "alpha":
        args.alpha = value
    elif axis == "t":
        rep = sigma_residual_at_t(value, args.nmax, prec=prec)
        return [{"axis": axis, "value": value, "n": str(N),
                 "sigma_residual": mp.nstr(rep.residuals[N], 8)}
                for N in range(args.nmax + 1)]
    if args.observable == "limit":
        ks = args.couplings.split(",")
        rep = triangular_limit_check(Couplings(*ks), args.nmax, prec)
        return [{"axis": axis, "value": value, "n": str(N),
                 "limit_residual": mp.nstr(rep.residuals[N], 8)}
                for N in range(args.nmax + 1)]
    series = _series_for(args, prec)
    rows = []
    with workdps(prec):
        for n in range(args.nmax + 1):
            row = {"axis": axis, "value": value, "n": str(n)}
            for name, s in series.items():
                row[f"I_{name}"] = mp.nstr(s[n], prec)
            rows.append(row)
    return rows


def cmd_scan(args) -> int:
    prec = args.precision
    with workdps(prec):
        start, stop = to_mpf(args.start), to_mpf(args.stop)
        steps = args.steps
        if steps < 1:
            raise RegimeRefusal("--steps must be >= 1")
        values = []
        for i in range(steps):
            frac = mpf(i) / max(1, steps - 1) if steps > 1 else mpf(0)
            values.append(mp.nstr(start + (stop - start) * frac, prec))
    base = {"lattice": args.lattice, "couplings": args.couplings,
            "alpha": args.alpha, "alphas": args.alphas, "nmax": args.nmax,
            "method": args.method, "observable": args.observable,
            "tol_regime": args.tol_regime}
    payloads = [(args.axis, v, base, prec) for v in values]
    rows: List[Dict[str, str]] = []
    skipped: List[str] = []
    results: List[Optional[List[Dict[str, str]]]] = [None] * len(payloads)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for i, out in enumerate(pool.map(_scan_point_safe, payloads)):
                results[i] = out
    else:
        results = [_scan_point_safe(p) for p in payloads]
    for v, out in zip(values, results):
        if out is None:
            skipped.append(v)
        else:
            rows.extend(out)
    for v in skipped:
        rows.append({"axis": args.axis, "value": v, "n": "",
                     "status": "skipped-critical"})
    if rows:
        header = sorted({k for row in rows for k in row},
                        key=lambda k: (k not in ("axis", "value", "n"), k))
        _emit(rows, header, args.format, sys.stdout)
    return EXIT_OK


def _scan_point_safe(payload):
    try:
        return _scan_point(payload)
    except IsingCorrError:
        return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isingcorr",
        description="Diagonal Ising correlations: Toeplitz determinants, "
                    "moment recurrences and nonlinear recurrence routes")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--lattice", default="triangular",
                       choices=["triangular", "square-diagonal", "square-column"])
        p.add_argument("--couplings", help="comma-separated K values")
        p.add_argument("--alpha", help="square-diagonal weight parameter (1/k)")
        p.add_argument("--alphas", help="square-column parameters a1,a2")
        p.add_argument("--nmax", type=int, default=5)
        p.add_argument("--precision", type=int, default=default_precision())
        p.add_argument("--format", default="csv", choices=["csv", "json"])
        p.add_argument("--tol-regime", dest="tol_regime", default="1e-12")

    p_m = sub.add_parser("moments", help="emit w_n over [-nmax-1, nmax+1]")
    common(p_m)
    p_m.add_argument("--cross-check", action="store_true",
                     help="add the linear-recurrence residual column")
    p_m.set_defaults(func=cmd_moments)

    p_c = sub.add_parser("correlations", help="emit I_0..I_nmax")
    common(p_c)
    p_c.add_argument("--method", default="both",
                     choices=["determinant", "garnier", "both"])
    p_c.set_defaults(func=cmd_correlations)

    p_v = sub.add_parser("verify", help="run the cross-validation suite")
    p_v.add_argument("--precision", type=int, default=default_precision())
    p_v.add_argument("--format", default="json", choices=["csv", "json"])
    p_v.add_argument("--only", help="comma-separated check groups: "
                                    + ",".join(CHECK_GROUPS))
    p_v.add_argument("--inject-corruption", action="store_true",
                     help=argparse.SUPPRESS)   # test mode: fault injection
    p_v.set_defaults(func=cmd_verify)

    p_s = sub.add_parser("scan", help="sweep a parameter axis")
    common(p_s)
    p_s.add_argument("--axis", required=True,
                     choices=["k1", "k2", "k3", "alpha", "t"])
    p_s.add_argument("--start", required=True)
    p_s.add_argument("--stop", required=True)
    p_s.add_argument("--steps", type=int, default=5)
    p_s.add_argument("--method", default="determinant",
                     choices=["determinant", "garnier", "both"])
    p_s.add_argument("--observable", default="series",
                     choices=["series", "limit"])
    p_s.add_argument("--jobs", type=int, default=1)
    p_s.set_defaults(func=cmd_scan)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RegimeRefusal as exc:
        _emit_error(exc, getattr(args, "format", "csv"), sys.stdout)
        return EXIT_REGIME
    except (NumericalFailure, IsingCorrError) as exc:
        _emit_error(exc, getattr(args, "format", "csv"), sys.stdout)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
