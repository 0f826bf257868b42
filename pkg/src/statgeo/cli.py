"""Command-line front end.

    statgeo eval MODEL --point 0,0,0 [--quantities R,meanH]
    statgeo sweep MODEL --origin 0,0 --direction 1,0 --interval -1,1 --grid 101 [--quantities det_g,K]
    statgeo tropical MODEL --point 1,1 [--double-scaling] [--lambda-sweep 10,20,40 --quantity F]
    statgeo verify {prop1,prop2,prop3,gauss,tropical,singular,all} [--seed 7] [--samples N]

MODEL is a JSON model file or ``builtin:<id>`` for the singular-scan
constructions (ids 1, 2, 3a, 3b, 3c).  Exit codes: 0 ok, 1 input error,
2 non-smooth point, 3 model class mismatch, 4 verification failure.

Sweep CSV columns are ``t, x1..xn`` followed by the requested quantities in
the order given; tropical sweep CSV columns are
``lambda, raw, normalized, predicted, gap``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateGradient,
    ExpressionError,
    ModelError,
    NonSmoothPoint,
    NotHomogeneous,
    StatGeoError,
    UnknownExample,
    WrongClass,
    WrongVariant,
)
from .geometry import full_report
from .ideal import predict_K_zero
from .model import LinearModel, Model
from .modelfile import load_model
from .singular import builtin_example
from . import tropical as trop
from .verify import SUITES, run_all, run_suite

EXIT_OK, EXIT_INPUT, EXIT_NONSMOOTH, EXIT_CLASS, EXIT_VERIFY = 0, 1, 2, 3, 4

QUANTITY_ALIASES = {
    "R": "scalar_R",
    "scalar": "scalar_R",
    "meanH": "mean_H",
    "H": "mean_H",
    "K": "gauss_kronecker_K",
    "S": "entropy_S",
    "entropy": "entropy_S",
    "detg": "det_g",
    "Gamma": "christoffel",
    "Omega": "omega",
}
_REPORT_FIELDS = (
    "x", "F", "w", "fbar", "g", "det_g", "g_inv", "normal", "omega", "christoffel",
    "riemann", "ricci", "scalar_R", "mean_H", "gauss_kronecker_K", "entropy_S",
    "ricci_closed_form", "scalar_closed_form",
)
_COMPONENT = re.compile(r"^(g|g_inv|omega|ricci|fbar|w|x)(\d+)$")


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        self.code = code
        super().__init__(message)


# --------------------------------------------------------------------------
# formatting


def _round(v, digits):
    if isinstance(v, dict):
        return {str(k): _round(x, digits) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_round(x, digits) for x in v]
    if isinstance(v, np.ndarray):
        return _round(v.tolist(), digits)
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return None
        return float(f"{v:.{digits}g}")
    return v


def dumps(obj, digits: int = 9) -> str:
    """Canonical JSON: sorted keys, numbers rounded to ``digits`` significant digits."""
    return json.dumps(_round(obj, digits), sort_keys=True)


def _fmt(v, digits):
    v = float(v)
    return "nan" if not math.isfinite(v) else f"{v:.{digits}g}"


def _csv(header, rows, digits) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v, digits) for v in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# argument helpers


def _vector(text: str, what: str, n: Optional[int] = None) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise CliError(f"{what}: expected comma-separated reals, got {text!r}") from None
    if not np.all(np.isfinite(v)):
        raise CliError(f"{what}: values must be finite")
    if n is not None and v.size != n:
        raise CliError(f"{what}: expected {n} values, got {v.size}")
    return v


def _load(ref: str):
    """(model, scan spec or None) from a file path or ``builtin:<id>``."""
    if ref.startswith("builtin:"):
        try:
            spec = builtin_example(ref.split(":", 1)[1])
        except UnknownExample as exc:
            raise CliError(str(exc.args[0])) from None
        return spec.model, spec
    return load_model(ref), None


def _threads() -> int:
    raw = os.environ.get("STATGEO_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise CliError(f"STATGEO_THREADS must be an integer, got {raw!r}") from None


def _pmap(fn, items):
    threads = _threads()
    if threads == 1:
        return list(map(fn, items))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _report_value(report, name: str):
    key = QUANTITY_ALIASES.get(name, name)
    if key in _REPORT_FIELDS:
        return getattr(report, key)
    m = _COMPONENT.match(name)
    if m:
        arr = np.asarray(getattr(report, m.group(1)))
        idx = tuple(int(c) - 1 for c in m.group(2))
        if len(idx) != arr.ndim or any(i < 0 or i >= s for i, s in zip(idx, arr.shape)):
            raise CliError(f"quantity {name!r}: index out of range for shape {arr.shape}")
        return float(arr[idx])
    raise CliError(f"unknown quantity {name!r}")


def _quantities(text: Optional[str]):
    if not text:
        return None
    names = [q.strip() for q in text.split(",") if q.strip()]
    if not names:
        raise CliError("--quantities: empty list")
    return names


# --------------------------------------------------------------------------
# commands


def cmd_eval(args) -> str:
    model, _ = _load(args.model)
    x = _vector(args.point, "--point", model.n)
    report = full_report(model, x)
    names = _quantities(args.quantities)
    if names is None:
        out = {f: getattr(report, f) for f in _REPORT_FIELDS}
    else:
        out = {name: _report_value(report, name) for name in names}
    if isinstance(model, LinearModel) and (names is None or any(QUANTITY_ALIASES.get(q, q) == "gauss_kronecker_K" for q in names)):
        out["note"] = predict_K_zero(model).note()
    return dumps(out, args.precision) + "\n"


def cmd_sweep(args) -> str:
    model, spec = _load(args.model)
    n = model.n
    if args.origin is None and spec is not None:
        origin, direction = np.asarray(spec.path.origin), np.asarray(spec.path.direction)
    else:
        if args.origin is None or args.direction is None:
            raise CliError("--origin and --direction are required for model files")
        origin = _vector(args.origin, "--origin", n)
        direction = _vector(args.direction, "--direction", n)
    if args.interval is None:
        if spec is None:
            raise CliError("--interval is required for model files")
        a, b = spec.interval
    else:
        a, b = _vector(args.interval, "--interval", 2)
    if not a < b:
        raise CliError("--interval: need a < b")
    if args.grid < 2:
        raise CliError("--grid must be >= 2")
    names = _quantities(args.quantities) or ["F", "det_g", "R", "meanH", "K", "S"]
    ts = np.linspace(a, b, args.grid)

    def row(t):
        x = origin + t * direction
        try:
            rep = full_report(model, x)
        except NonSmoothPoint:
            return [t, *x, *([float("nan")] * len(names))]
        vals = []
        for q in names:
            v = _report_value(rep, q)
            if np.ndim(v) != 0:
                raise CliError(f"sweep quantity {q!r} is not a scalar; use a component such as g12")
            vals.append(float(v))
        return [t, *x, *vals]

    rows = _pmap(row, ts)
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + names
    return _csv(header, rows, args.precision)


def cmd_tropical(args) -> str:
    model, _ = _load(args.model)
    x = _vector(args.point, "--point", model.n)
    if args.lambda_sweep:
        lams = _vector(args.lambda_sweep, "--lambda-sweep")
        d = None if args.degree is None else float(args.degree)
        if not args.double_scaling and d is None:
            d = _uniform_degree(model)
        table = trop.lambda_sweep(model, x, d, lams, args.quantity)
        return _csv(list(table.HEADER), table.rows(), args.precision)
    out = {}
    if args.double_scaling:
        t = trop.double_scaling_tensors(model, x, d=args.degree)
        core = tropical_core(model, t.mixed)
        out["point"] = trop.tropical_eval(core, x, args.tol).to_dict()
        out["tensors"] = t.to_dict()
    else:
        _uniform_degree(model)
        point = trop.tropical_eval(model, x, args.tol)
        out["point"] = point.to_dict()
        tensors = trop.tropical_tensors_uniform(model, point)
        out["tensors"] = {k: v for k, v in tensors.items() if k not in ("christoffel", "riemann")}
    return dumps(out, args.precision) + "\n"


def tropical_core(model: Model, mixed: bool) -> Model:
    return trop.tropical_part(model) if mixed else model


def _uniform_degree(model) -> float:
    try:
        d = trop.detect_degree(model)
    except NotHomogeneous as exc:
        if isinstance(model, LinearModel):
            return 1.0
        raise NotHomogeneous(
            f"{exc}. Mixed models (affine part plus degree d > 1 interactions) "
            "need --double-scaling, which takes the limit on the interaction part"
        ) from None
    if d != 1.0:
        raise WrongClass(f"f_a are homogeneous of degree {d:g}; use --double-scaling")
    return d


def cmd_verify(args):
    if args.suite == "all":
        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            report = run_all(args.seed, args.samples, mapper=pool.map)
    else:
        report = run_suite(args.suite, args.seed, args.samples)
        report["seed"] = args.seed
    if not report["pass"]:
        report["failures"] = _failures(report)
    return dumps(report, args.precision) + "\n", (EXIT_OK if report["pass"] else EXIT_VERIFY)


def _failures(report):
    if "suites" in report:
        return [f for r in report["suites"].values() for f in _failures(r)]
    return [f"{report['suite']}.{c['check']}" for c in report["checks"] if not c["pass"]]


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=9, help="significant digits in output (default 9)")

    parser = argparse.ArgumentParser(prog="statgeo", description="Geometry of log-sum-exp hypersurfaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="tensors at a point, as JSON")
    p.add_argument("model")
    p.add_argument("--point", required=True)
    p.add_argument("--quantities", help="comma-separated, e.g. R,meanH,K,g12 (default: everything)")

    p = sub.add_parser("sweep", parents=[common], help="scalar quantities along a line, as CSV")
    p.add_argument("model")
    p.add_argument("--origin")
    p.add_argument("--direction")
    p.add_argument("--interval", help="a,b")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--quantities")

    p = sub.add_parser("tropical", parents=[common], help="tropical limit at x*")
    p.add_argument("model")
    p.add_argument("--point", required=True)
    p.add_argument("--double-scaling", action="store_true")
    p.add_argument("--degree", type=float, help="override the detected homogeneity degree")
    p.add_argument("--lambda-sweep", help="comma-separated increasing lambdas; emits CSV")
    p.add_argument("--quantity", default="F", help="sweep quantity: F, w, S, g, det_g, Gamma, omega, R, K (+ components)")
    p.add_argument("--tol", type=float, help="absolute tie tolerance for the active set")

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--samples", type=int)
    return parser


_VECTOR_OPTIONS = ("--point", "--origin", "--direction", "--interval", "--lambda-sweep")


def _glue_negative_vectors(argv):
    # argparse would read "--interval -1,1" as two options
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VECTOR_OPTIONS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and not nxt.startswith("--"):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_negative_vectors(argv))
    except SystemExit as exc:
        # usage errors share the input-error code; --help exits 0
        return EXIT_OK if not exc.code else EXIT_INPUT
    if args.precision < 1 or args.precision > 17:
        print("statgeo: --precision must be between 1 and 17", file=sys.stderr)
        return EXIT_INPUT
    code = EXIT_OK
    try:
        if args.command == "verify":
            text, code = cmd_verify(args)
        else:
            text = {"eval": cmd_eval, "sweep": cmd_sweep, "tropical": cmd_tropical}[args.command](args)
    except CliError as exc:
        print(f"statgeo: {exc}", file=sys.stderr)
        return exc.code
    except NonSmoothPoint as exc:
        print(f"statgeo: non-smooth point: {exc}", file=sys.stderr)
        return EXIT_NONSMOOTH
    except DegenerateGradient as exc:
        print(f"statgeo: tropical tensors undefined: {exc}", file=sys.stderr)
        return EXIT_NONSMOOTH
    except (WrongClass, WrongVariant, NotHomogeneous) as exc:
        print(f"statgeo: model class mismatch: {exc}", file=sys.stderr)
        return EXIT_CLASS
    except (ModelError, ExpressionError, StatGeoError, ValueError) as exc:
        print(f"statgeo: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
