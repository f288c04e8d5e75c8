"""Experiment runner: problem ingestion, subcommand dispatch, structured output.

Exit codes: 0 success, 2 input/usage error, 3 budget or convergence failure.
Floats are printed with 17 significant digits so identical invocations are
byte-identical; randomized grids are driven entirely by --seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import arcs as arcs_mod
from . import archimedean, counting, expsums, localdens, weyldiag
from .forms import (
    CubicForm,
    FormPair,
    QuadraticForm,
    cubic_singular_points_mod_p,
    eval_cubic,
    eval_quadratic,
    gradient_cubic,
    gradient_quadratic,
    h_parameter,
    hypothesis_report,
    rank_quadratic,
    signature_quadratic,
    smooth_point_test,
)
from .quadrature import QuadratureError
from .util import CapExceededError, DEFAULT_CAP
from .weightfn import Weight

__all__ = ["main", "run", "load_problem", "emit"]


class ProblemError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def load_problem(path: str) -> tuple[FormPair, Weight]:
    """Load and validate a problem file, reporting every schema violation."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ProblemError(["problem file must contain a JSON object"])
    known = {"n", "cubic", "quadric", "cubic_nonsingular", "h", "weight"}
    for key in data:
        if key not in known:
            errors.append(f"unknown key {key!r}")
    n = data.get("n")
    if not isinstance(n, int) or n < 1:
        errors.append("'n' must be a positive integer")
        n = max(int(n or 1), 1)
    cubic_entries = data.get("cubic", [])
    quad_entries = data.get("quadric", [])
    cubic_monomials = {}
    for entry in cubic_entries:
        if not (isinstance(entry, list) and len(entry) == 4):
            errors.append(f"cubic entry {entry!r} must be [i, j, k, coeff]")
            continue
        i, j, k, coeff = entry
        if not all(isinstance(v, int) for v in entry):
            errors.append(f"cubic entry {entry!r} must be integers")
            continue
        if not (1 <= i <= j <= k <= n):
            errors.append(f"cubic indices {entry[:3]!r} must satisfy 1 <= i <= j <= k <= n")
            continue
        cubic_monomials[(i, j, k)] = cubic_monomials.get((i, j, k), 0) + coeff
    quad_monomials = {}
    for entry in quad_entries:
        if not (isinstance(entry, list) and len(entry) == 3):
            errors.append(f"quadric entry {entry!r} must be [i, j, coeff]")
            continue
        i, j, coeff = entry
        if not all(isinstance(v, int) for v in entry):
            errors.append(f"quadric entry {entry!r} must be integers")
            continue
        if not (1 <= i <= j <= n):
            errors.append(f"quadric indices {entry[:2]!r} must satisfy 1 <= i <= j <= n")
            continue
        quad_monomials[(i, j)] = quad_monomials.get((i, j), 0) + coeff
    nonsing = data.get("cubic_nonsingular")
    if nonsing is not None and not isinstance(nonsing, bool):
        errors.append("'cubic_nonsingular' must be a boolean")
        nonsing = None
    h = data.get("h")
    if h is not None and (not isinstance(h, int) or h < 1):
        errors.append("'h' must be a positive integer")
        h = None
    wspec = data.get("weight", {})
    if not isinstance(wspec, dict):
        errors.append("'weight' must be an object {x0, xi}")
        wspec = {}
    x0 = wspec.get("x0", [0.0] * n)
    xi = wspec.get("xi", 0.4)
    if not (isinstance(x0, list) and len(x0) == n and all(isinstance(v, (int, float)) for v in x0)):
        errors.append("'weight.x0' must be a list of n reals")
        x0 = [0.0] * n
    if not (isinstance(xi, (int, float)) and 0 < xi <= 1):
        errors.append("'weight.xi' must be a real in (0, 1]")
        xi = 0.4
    if errors:
        raise ProblemError(errors)
    pair = FormPair(
        CubicForm(n, cubic_monomials),
        QuadraticForm(n, quad_monomials),
        cubic_nonsingular=nonsing,
        h_override=h,
    )
    return pair, Weight(tuple(float(v) for v in x0), float(xi))


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _jsonify(obj):
    """Convert a report to a JSON-ready structure with stable field order."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag, "abs": abs(obj)}
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _dump_json(obj, indent: int = 0) -> str:
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_dump_json(v, indent + 2)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = ", ".join(_dump_json(v, indent) for v in obj)
        return "[" + items + "]"
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return json.dumps(str(obj))
        return _fmt_float(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def emit(report, fmt: str, out, header: list[str] | None = None) -> None:
    """Write a report (dict for json, list-of-dicts for csv) to a stream."""
    if fmt == "json":
        out.write(_dump_json(_jsonify(report)) + "\n")
        return
    if fmt == "csv":
        rows = report
        writer = csv.writer(out, lineterminator="\n")
        if not rows:
            if header:
                writer.writerow(header)
            return
        header = header or list(rows[0].keys())
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    _fmt_float(v) if isinstance(v, float) else ("" if v is None else v)
                    for v in (row[h] for h in header)
                ]
            )
        return
    raise ValueError(f"unknown output format {fmt!r}")


def _parse_int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v != ""]


def _parse_float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v != ""]


def _parse_box(text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition(":")
        out.append((int(lo), int(hi)))
    return out


def _add_common(p: argparse.ArgumentParser, problem: bool = True) -> None:
    if problem:
        p.add_argument("--problem", required=True, help="problem JSON file")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", default=None, help="write output to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circlelab")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="dimensions, rank, signature, hypothesis predicates")
    _add_common(p)

    p = sub.add_parser("count", help="weighted count and box enumeration")
    _add_common(p)
    p.add_argument("--P", type=float, required=True)
    p.add_argument("--box", type=str, default=None, help="a:b,c:d,... inclusive ranges")
    p.add_argument("--emit", dest="emit_csv", default=None, help="write solutions CSV here")

    p = sub.add_parser("sum", help="exponential sums and oscillatory integrals")
    _add_common(p)
    p.add_argument("--mode", required=True, choices=["direct", "complete", "crt", "poisson", "integral"])
    p.add_argument("--P", type=float, default=None)
    p.add_argument("--alpha3", type=float, default=None)
    p.add_argument("--alpha2", type=float, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--a3", type=int, default=None)
    p.add_argument("--a2", type=int, default=None)
    p.add_argument("--m", type=str, default=None, help="comma-separated integer vector")
    p.add_argument("--M", type=int, default=None, help="poisson truncation radius")
    p.add_argument("--theta3", type=float, default=0.0)
    p.add_argument("--theta2", type=float, default=0.0)
    p.add_argument("--gamma3", type=float, default=0.0)
    p.add_argument("--gamma2", type=float, default=0.0)
    p.add_argument("--z", type=str, default=None, help="comma-separated frequency vector")

    p = sub.add_parser("arcs", help="major/minor classification of points or a grid")
    _add_common(p, problem=False)
    p.add_argument("--P", type=float, required=True)
    p.add_argument("--delta", type=float, default=arcs_mod.DEFAULT_DELTA)
    p.add_argument("--alpha3", type=float, default=None)
    p.add_argument("--alpha2", type=float, default=None)
    p.add_argument("--grid", type=int, default=None)

    p = sub.add_parser("series", help="truncated singular series")
    _add_common(p)
    p.add_argument("--R", type=int, required=True)

    p = sub.add_parser("local", help="local densities and stabilization at p")
    _add_common(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)

    p = sub.add_parser("qfactor", help="q0 q1 q2 factorization of a modulus")
    _add_common(p)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--a3", type=int, required=True)

    p = sub.add_parser("integral", help="truncated singular integral")
    _add_common(p)
    p.add_argument("--R", type=float, required=True)

    p = sub.add_parser("predict", help="main-term prediction")
    _add_common(p)
    p.add_argument("--Rq", type=int, required=True)
    p.add_argument("--Rgamma", type=float, required=True)
    p.add_argument("--P", type=float, required=True)

    p = sub.add_parser("compare", help="counts vs prediction over a P grid (CSV)")
    _add_common(p)
    p.add_argument("--P", type=str, required=True, help="comma-separated P values")
    p.add_argument("--Rq", type=int, required=True)
    p.add_argument("--Rgamma", type=float, required=True)

    p = sub.add_parser("weyl-scan", help="Weyl dichotomy diagnostics on a grid (CSV)")
    _add_common(p)
    p.add_argument("--P", type=float, required=True)
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--delta", type=float, default=arcs_mod.DEFAULT_DELTA)
    p.add_argument("--eps", type=float, default=0.05)

    p = sub.add_parser("nr", help="bilinear system count n(R)")
    _add_common(p)
    p.add_argument("--R", type=int, required=True)

    return ap


def _cmd_info(args) -> tuple[object, str]:
    pair, weight = load_problem(args.problem)
    sig = signature_quadratic(pair.quadric)
    rho = rank_quadratic(pair.quadric)
    try:
        h = h_parameter(pair)
    except ValueError:
        h = None
    # diagnostics at the weight center: is it (numerically) a smooth zero?
    x0 = list(weight.center)
    gc = gradient_cubic(pair.cubic, x0)
    gq = gradient_quadratic(pair.quadric, x0)
    minor_max = max(
        (abs(gc[i] * gq[j] - gc[j] * gq[i]) for i in range(pair.n) for j in range(i + 1, pair.n)),
        default=0.0,
    )
    report = {
        "n": pair.n,
        "cubic_monomials": len(pair.cubic.monomials),
        "quadric_monomials": len(pair.quadric.monomials),
        "quadric_diagonal": pair.quadric.is_diagonal,
        "rank": rho,
        "signature": [sig.r, sig.s],
        "h": h,
        "weight": {"x0": x0, "xi": weight.xi},
        "center": {
            "cubic_value": float(eval_cubic(pair.cubic, x0)),
            "quadric_value": float(eval_quadratic(pair.quadric, x0)),
            "jacobian_minor_max": float(minor_max),
            "smooth_zero": smooth_point_test(pair, x0, args.tol),
        },
        "hypotheses": hypothesis_report(pair, h, rho, sig),
    }
    if pair.cubic_nonsingular:
        # sanity scan of the user assertion; p = 3 is omitted here because
        # every cubic has vanishing gradient in characteristic 3
        scan = cubic_singular_points_mod_p(pair.cubic, primes=(2, 5), cap=args.cap)
        report["nonsingularity_scan"] = {
            str(p): list(pt) if pt else None for p, pt in scan.items()
        }
    return report, "json"


def _cmd_count(args) -> tuple[object, str]:
    pair, weight = load_problem(args.problem)
    report = {
        "P": args.P,
        "weighted_count": counting.count_weighted(pair, args.P, weight, threads=args.threads),
    }
    box = _parse_box(args.box) if args.box else counting.weight_box(weight, args.P)
    solutions = list(counting.enumerate_solutions(pair, box))
    report["box"] = [f"{lo}:{hi}" for lo, hi in box]
    report["box_count"] = len(solutions)
    if args.emit_csv:
        columns = [f"x{i+1}" for i in range(pair.n)]
        rows = [dict(zip(columns, sol)) for sol in solutions]
        with open(args.emit_csv, "w", encoding="utf-8") as fh:
            emit(rows, "csv", fh, header=columns)
    return report, "json"


def _sum_meta(args, extra: dict) -> dict:
    meta = {"mode": args.mode}
    meta.update(extra)
    return meta


def _cmd_sum(args) -> tuple[object, str]:
    pair, weight = load_problem(args.problem)
    mode = args.mode
    if mode == "direct":
        if args.P is None or args.alpha3 is None or args.alpha2 is None:
            raise ValueError("direct mode needs --P --alpha3 --alpha2")
        val = expsums.weyl_sum_direct(
            pair, args.P, weight, args.alpha3, args.alpha2, threads=args.threads
        )
        meta = _sum_meta(args, {"P": args.P, "alpha3": args.alpha3, "alpha2": args.alpha2})
    elif mode in ("complete", "crt"):
        if args.q is None or args.a3 is None or args.a2 is None:
            raise ValueError(f"{mode} mode needs --q --a3 --a2")
        m = _parse_int_list(args.m) if args.m else [0] * pair.n
        if len(m) == 1:
            m = m * pair.n
        if mode == "complete":
            val = expsums.complete_sum(pair, args.q, args.a3, args.a2, m, cap=args.cap, threads=args.threads)
            meta = _sum_meta(args, {"q": args.q, "a3": args.a3, "a2": args.a2, "m": m})
        else:
            factors = expsums.crt_decomposition(pair, args.q, args.a3, args.a2, m, cap=args.cap, threads=args.threads)
            val = 1.0 + 0.0j
            for f in factors:
                val *= f.value
            meta = _sum_meta(
                args,
                {
                    "q": args.q,
                    "m": m,
                    "factors": [
                        {"modulus": f.modulus, "a3": f.a3, "a2": f.a2, "value": f.value}
                        for f in factors
                    ],
                },
            )
    elif mode == "poisson":
        if args.P is None or args.q is None or args.a3 is None or args.a2 is None:
            raise ValueError("poisson mode needs --P --q --a3 --a2")
        theta3, theta2 = args.theta3, args.theta2
        if args.alpha3 is not None:
            theta3 = args.alpha3 - args.a3 / args.q
        if args.alpha2 is not None:
            theta2 = args.alpha2 - args.a2 / args.q
        approx = expsums.RationalApprox(args.q, args.a3, args.a2, theta3, theta2)
        if args.M is None:
            args.M = expsums.default_truncation(approx, args.P)
        val = expsums.poisson_reconstruct(pair, args.P, weight, approx, args.M, cap=args.cap)
        meta = _sum_meta(
            args,
            {
                "P": args.P,
                "q": args.q,
                "a3": args.a3,
                "a2": args.a2,
                "theta3": theta3,
                "theta2": theta2,
                "M": args.M,
                "theta_height": expsums.theta_height(approx, args.P).value,
            },
        )
    elif mode == "integral":
        z = _parse_float_list(args.z) if args.z else [0.0] * pair.n
        res = expsums.osc_integral(pair, weight, args.gamma3, args.gamma2, z, tol=args.tol)
        val = res.value
        meta = _sum_meta(
            args,
            {"gamma3": args.gamma3, "gamma2": args.gamma2, "z": z,
             "quad_error": res.error, "quad_level": res.level},
        )
    else:  # pragma: no cover
        raise ValueError(f"unknown mode {mode}")
    report = {"re": val.real, "im": val.imag, "abs": abs(val), "meta": meta}
    return report, "json"


def _cmd_arcs(args) -> tuple[object, str]:
    if args.grid is None:
        if args.alpha3 is None or args.alpha2 is None:
            raise ValueError("arcs needs either --alpha3/--alpha2 or --grid")
        is_major, witness = arcs_mod.major_arc_test(args.alpha3, args.alpha2, args.P, args.delta)
        Q3, Q2 = arcs_mod.q3q2(args.P)
        approx = arcs_mod.simultaneous_approx(args.alpha3, args.alpha2, Q3, Q2)
        report = {
            "P": args.P,
            "delta": args.delta,
            "alpha3": args.alpha3,
            "alpha2": args.alpha2,
            "is_major": is_major,
            "witness": list(witness) if witness else None,
            "pigeonhole": {
                "q": approx.q,
                "a3": approx.a3,
                "a2": approx.a2,
                "theta3": approx.theta3,
                "theta2": approx.theta2,
            },
            "measure": arcs_mod.major_arc_measure(args.P, args.delta),
        }
        return report, "json"
    rng = np.random.default_rng(args.seed)
    k = args.grid
    jitter = rng.random((k, k, 2))
    Q3, Q2 = arcs_mod.q3q2(args.P)
    rows = []
    for i in range(k):
        for j in range(k):
            a3 = (i + jitter[i, j, 0]) / k
            a2 = (j + jitter[i, j, 1]) / k
            is_major, witness = arcs_mod.major_arc_test(a3, a2, args.P, args.delta)
            approx = arcs_mod.simultaneous_approx(a3, a2, Q3, Q2)
            rows.append(
                {
                    "alpha3": a3,
                    "alpha2": a2,
                    "is_major": is_major,
                    "q": witness[0] if witness else None,
                    "a3": witness[1] if witness else None,
                    "a2": witness[2] if witness else None,
                    "pigeon_q": approx.q,
                    "pigeon_a3": approx.a3,
                    "pigeon_a2": approx.a2,
                }
            )
    return rows, "csv"


def _cmd_series(args) -> tuple[object, str]:
    pair, _ = load_problem(args.problem)
    res = localdens.singular_series_truncated(pair, args.R, cap=args.cap, threads=args.threads)
    report = {
        "R": res.R,
        "value": res.value,
        "imag_residual": res.imag_residual,
        "terms": [{"q": q, "term": t} for q, t in res.terms],
        "a_of_q": [
            {"q": q, "A": localdens.a_of_q(pair, q, cap=args.cap, threads=args.threads)}
            for q in range(1, args.R + 1)
        ],
    }
    return report, "json"


def _cmd_local(args) -> tuple[object, str]:
    pair, _ = load_problem(args.problem)
    rep = localdens.hensel_stable(pair, args.p, args.kmax, cap=args.cap, threads=args.threads)
    sol = localdens.qp_solubility_search(
        pair, args.p, min(args.kmax, 3), cap=args.cap, threads=args.threads
    )
    report = {
        "p": rep.p,
        "kmax": rep.kmax,
        "reached": rep.reached,
        "stable": rep.stable,
        "level": rep.level,
        "densities": list(rep.densities),
        "primitive_densities": list(rep.primitive_densities),
        "partial": rep.partial,
        "solubility": {
            "verdict": sol.verdict,
            "point": list(sol.point) if sol.point else None,
            "level": sol.level,
            "solutions_mod_p": sol.solutions_mod_p,
        },
    }
    return report, "json"


def _cmd_qfactor(args) -> tuple[object, str]:
    pair, _ = load_problem(args.problem)
    q0, q1, q2 = localdens.q_factorization(args.q, args.a3, pair.quadric)
    return {"q": args.q, "a3": args.a3, "q0": q0, "q1": q1, "q2": q2}, "json"


def _cmd_integral(args) -> tuple[object, str]:
    pair, weight = load_problem(args.problem)
    res = archimedean.singular_integral_truncated(pair, weight, args.R, tol=args.tol)
    return {"R": args.R, "value": float(res.value), "error": res.error, "level": res.level}, "json"


def _cmd_predict(args) -> tuple[object, str]:
    pair, weight = load_problem(args.problem)
    mt = archimedean.main_term(
        pair, weight, args.Rq, args.Rgamma, args.P,
        tol=args.tol, cap=args.cap, threads=args.threads,
    )
    return {
        "P": args.P,
        "Rq": args.Rq,
        "Rgamma": args.Rgamma,
        "sing_series": mt.sing_series,
        "sing_integral": mt.sing_integral,
        "prediction": mt.prediction,
    }, "json"


def _cmd_compare(args) -> tuple[object, str]:
    pair, weight = load_problem(args.problem)
    p_values = _parse_float_list(args.P)
    series = localdens.singular_series_truncated(pair, args.Rq, cap=args.cap, threads=args.threads)
    integral = archimedean.singular_integral_truncated(pair, weight, args.Rgamma, tol=args.tol)
    rows = []
    for P in p_values:
        count = counting.count_weighted(pair, P, weight, threads=args.threads)
        prediction = series.value * integral.value * P ** (pair.n - 5)
        rows.append(
            {
                "P": P,
                "N": count,
                "prediction": prediction,
                "ratio": count / prediction if prediction else math.inf,
            }
        )
    return rows, "csv"


def _cmd_weyl_scan(args) -> tuple[object, str]:
    pair, weight = load_problem(args.problem)
    rows = weyldiag.minor_arc_scan(
        pair, args.P, weight, args.grid,
        delta=args.delta, eps=args.eps, seed=args.seed, threads=args.threads,
    )
    return rows, "csv"


def _cmd_nr(args) -> tuple[object, str]:
    pair, _ = load_problem(args.problem)
    value = weyldiag.count_bilinear(pair.cubic, args.R, cap=args.cap)
    return {"R": args.R, "n_R": value}, "json"


_HANDLERS = {
    "info": _cmd_info,
    "count": _cmd_count,
    "sum": _cmd_sum,
    "arcs": _cmd_arcs,
    "series": _cmd_series,
    "local": _cmd_local,
    "qfactor": _cmd_qfactor,
    "integral": _cmd_integral,
    "predict": _cmd_predict,
    "compare": _cmd_compare,
    "weyl-scan": _cmd_weyl_scan,
    "nr": _cmd_nr,
}


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if getattr(args, "cap", None) is not None and "CIRCLELAB_CAP" in os.environ:
        args.cap = int(os.environ["CIRCLELAB_CAP"])
    try:
        report, fmt = _HANDLERS[args.command](args)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", file=sys.stderr)
        return 2
    except ProblemError as exc:
        for v in exc.violations:
            print(f"error: {v}", file=sys.stderr)
        return 2
    except (CapExceededError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            emit(report, fmt, fh)
    else:
        emit(report, fmt, sys.stdout)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
