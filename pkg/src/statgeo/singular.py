"""Detection and classification of phase-like singularities along a path.

A point t* on a path x(t) is a singularity of order k when derivatives of F
up to order k-1 are continuous there and some k-th derivative is not.  The
scanner never evaluates at t* itself.  It approaches from both sides along
``t* -+ h0 2^-j`` and classifies each monitored quantity as continuous,
jump or blowup:

* first-order group: the components of grad F and det g,
* second-order group: the entries of Hess F and the Gauss-Kronecker K.

The singularity is *hidden* when K has equal one-sided limits even though a
lower-order quantity is discontinuous, and *visible* otherwise.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import (
    DomainError,
    InconclusiveClassification,
    NonSmoothPoint,
    SignChange,
    TooFewSamples,
    UnknownExample,
)
from .model import ExpressionModel, Model, primitives
from .oracles import fit_power_law

__all__ = [
    "AffinePath",
    "ScanSpec",
    "Verdict",
    "SingularEvent",
    "probe",
    "one_sided",
    "classify",
    "scan",
    "builtin_example",
    "fit_local_exponent",
    "EXAMPLES",
]


@dataclass(frozen=True)
class AffinePath:
    """x(t) = origin + t * direction."""

    origin: tuple
    direction: tuple

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "direction", tuple(float(v) for v in self.direction))
        if len(self.origin) != len(self.direction):
            raise ValueError("origin and direction must have the same length")

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.origin) + t * np.asarray(self.direction)

    @classmethod
    def coordinate(cls, n: int, axis: int, base: Sequence[float]) -> "AffinePath":
        """Move along coordinate ``axis`` (0-based) with the others at ``base``."""
        origin = np.array(base, dtype=float)
        origin[axis] = 0.0
        direction = np.zeros(n)
        direction[axis] = 1.0
        return cls(tuple(origin), tuple(direction))


@dataclass(frozen=True)
class ScanSpec:
    model: Model
    path: Callable[[float], np.ndarray]
    interval: tuple
    grid: int = 64
    exclude: tuple = ()
    h0: float = 1e-9
    depth: int = 8
    jump_tol: float = 1e-3
    blowup_threshold: float = 1e6
    stable_tol: float = 1e-3
    hidden_tol: float = 1e-6

    def __post_init__(self):
        t0, t1 = (float(v) for v in self.interval)
        if not t1 > t0:
            raise ValueError("scan interval must satisfy t0 < t1")
        if self.grid < 16:
            raise ValueError("grid must have at least 16 points")
        if self.depth < 4:
            raise ValueError("refinement depth must be at least 4")
        object.__setattr__(self, "interval", (t0, t1))
        object.__setattr__(self, "exclude", tuple(float(v) for v in self.exclude))

    def with_depth(self, depth: int) -> "ScanSpec":
        return ScanSpec(**{**self.__dict__, "depth": depth})


FIRST_ORDER = "first"
SECOND_ORDER = "second"


def probe(model: Model, x) -> dict:
    """Monitored quantities at a smooth point, keyed by name.

    Indices in names are 1-based (``Fx1``, ``H12``) to read like coordinates.
    """
    p = primitives(model, x)
    n = model.n
    out = {}
    for i in range(n):
        out[f"Fx{i + 1}"] = float(p.fbar[i])
    det_g = 1.0 + float(p.fbar @ p.fbar)
    out["det_g"] = det_g
    hess = p.hessian_F
    for i in range(n):
        for j in range(i, n):
            out[f"H{i + 1}{j + 1}"] = float(hess[i, j])
    with np.errstate(over="ignore", invalid="ignore"):
        out["K"] = float(np.linalg.det(hess) / det_g ** ((n + 2) / 2.0))
    return out


def _group(name: str) -> str:
    return FIRST_ORDER if name.startswith("Fx") or name == "det_g" else SECOND_ORDER


@dataclass(frozen=True)
class Verdict:
    """Per-quantity outcome: ``continuous``, ``jump``, ``blowup`` or ``inconclusive``."""

    kind: str
    left: float
    right: float
    left_kind: str
    right_kind: str
    left_exponent: Optional[float] = None
    right_exponent: Optional[float] = None

    @property
    def sign(self):
        signs = [np.sign(v) for v, k in ((self.left, self.left_kind), (self.right, self.right_kind)) if k == "blowup"]
        return [int(s) for s in signs]

    def to_dict(self):
        return {
            "kind": self.kind,
            "left": self.left,
            "right": self.right,
            "left_kind": self.left_kind,
            "right_kind": self.right_kind,
            "left_exponent": self.left_exponent,
            "right_exponent": self.right_exponent,
        }


def _side(hs, values, spec: ScanSpec):
    """Classify one refining sequence: stabilized limit, blowup or neither."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return "inconclusive", float(v[-1]), None
    tail = np.abs(v[-4:])
    exponent = None
    if np.all(v[-4:] != 0) and (np.all(v[-4:] > 0) or np.all(v[-4:] < 0)):
        exponent = fit_power_law(hs[-4:], v[-4:])
    if np.all(np.diff(tail) > 0) and tail[-1] > spec.blowup_threshold and exponent is not None and exponent < 0:
        return "blowup", float(v[-1]), exponent
    if abs(v[-1] - v[-2]) <= spec.stable_tol * max(1.0, abs(v[-1])):
        return "stable", float(v[-1]), exponent
    return "inconclusive", float(v[-1]), exponent


def one_sided(spec: ScanSpec, t_star: float, h0: Optional[float] = None, depth: Optional[int] = None):
    """Refining sequences of every monitored quantity on both sides of t*.

    Returns ``(hs, left, right)`` where left/right map names to arrays.
    """
    h0 = spec.h0 if h0 is None else h0
    depth = spec.depth if depth is None else depth
    hs = h0 * 2.0 ** -np.arange(depth)
    left, right = {}, {}
    for store, sgn in ((left, -1.0), (right, 1.0)):
        for h in hs:
            vals = probe(spec.model, spec.path(t_star + sgn * h))
            for k, v in vals.items():
                store.setdefault(k, []).append(v)
    return hs, {k: np.array(v) for k, v in left.items()}, {k: np.array(v) for k, v in right.items()}


def _verdict(hs, lv, rv, spec: ScanSpec) -> Verdict:
    lk, L, le = _side(hs, lv, spec)
    rk, R, re_ = _side(hs, rv, spec)
    if "blowup" in (lk, rk):
        kind = "blowup"
    elif lk == "stable" and rk == "stable":
        gap = abs(L - R) / max(1.0, abs(L), abs(R))
        kind = "jump" if gap > spec.jump_tol else "continuous"
    else:
        kind = "inconclusive"
    return Verdict(kind, L, R, lk, rk, le, re_)


@dataclass(frozen=True)
class SingularEvent:
    t_star: float
    order: Optional[int]
    quantities: dict
    visibility: Optional[str]
    trace: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        return {
            "t_star": self.t_star,
            "order": self.order,
            "visibility": self.visibility,
            "quantities": {k: v.to_dict() for k, v in self.quantities.items()},
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def trace_csv(self) -> str:
        """Rows (side, h, t, quantities...) of the refinement sequences."""
        names = list(self.trace["left"])
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["side", "h", "t"] + names)
        for side, sgn in (("left", -1.0), ("right", 1.0)):
            for j, h in enumerate(self.trace["h"]):
                w.writerow([side, repr(h), repr(self.t_star + sgn * h)] + [repr(self.trace[side][k][j]) for k in names])
        return buf.getvalue()


def classify(spec: ScanSpec, t_star: float, h0: Optional[float] = None) -> SingularEvent:
    """Classify the point t* from one-sided refinement sequences.

    Raises :class:`InconclusiveClassification` when the order or the
    visibility cannot be decided; quantities that do not affect either are
    reported as ``inconclusive`` instead.
    """
    hs, left, right = one_sided(spec, t_star, h0)
    verdicts = {k: _verdict(hs, left[k], right[k], spec) for k in left}
    data = {"t_star": t_star, "h": hs.tolist(), "verdicts": {k: v.to_dict() for k, v in verdicts.items()}}
    singular = ("jump", "blowup")
    first = [v.kind for k, v in verdicts.items() if _group(k) == FIRST_ORDER]
    second = [v.kind for k, v in verdicts.items() if _group(k) == SECOND_ORDER]
    if any(k in singular for k in first):
        order = 1
    elif "inconclusive" in first:
        raise InconclusiveClassification(f"first-order quantities did not settle at t={t_star}", data)
    elif any(k in singular for k in second):
        order = 2
    elif "inconclusive" in second:
        raise InconclusiveClassification(f"second-order quantities did not settle at t={t_star}", data)
    else:
        order = None
    visibility = None
    if order is not None:
        K = verdicts["K"]
        if K.kind == "inconclusive":
            raise InconclusiveClassification(f"K did not settle at t={t_star}", data)
        agree = (
            K.kind == "continuous"
            and abs(K.left - K.right) <= spec.hidden_tol * max(1.0, abs(K.left), abs(K.right))
        )
        visibility = "hidden" if agree else "visible"
    trace = {"h": hs.tolist(), "left": {k: v.tolist() for k, v in left.items()}, "right": {k: v.tolist() for k, v in right.items()}}
    return SingularEvent(float(t_star), order, verdicts, visibility, trace)


def _safe_probe(spec, t):
    try:
        return probe(spec.model, spec.path(t))
    except (NonSmoothPoint, DomainError):
        return None


def _candidates(spec: ScanSpec):
    """Grid intervals whose increments stand out from their neighbours."""
    t0, t1 = spec.interval
    ts = np.linspace(t0, t1, spec.grid)
    ts = np.array([t for t in ts if all(t != e for e in spec.exclude)])
    rows = [_safe_probe(spec, t) for t in ts]
    bad = [j for j, r in enumerate(rows) if r is None]
    found = []
    for j in bad:
        lo = ts[max(j - 1, 0)]
        hi = ts[min(j + 1, ts.size - 1)]
        found.append((lo, hi))
    names = next((list(r) for r in rows if r is not None), [])
    for name in names:
        col = np.array([np.nan if r is None else r[name] for r in rows])
        d = np.abs(np.diff(col))
        finite = d[np.isfinite(d)]
        if finite.size == 0:
            continue
        floor = 1e-6 * max(1.0, float(np.nanmax(np.abs(col))))
        for j in range(d.size):
            nb = [d[k] for k in (j - 1, j + 1) if 0 <= k < d.size and np.isfinite(d[k])]
            if np.isfinite(d[j]) and d[j] > floor and nb and d[j] > 10.0 * max(nb):
                found.append((ts[j], ts[j + 1]))
    return found


def _localize(spec: ScanSpec, lo: float, hi: float, iters: int = 50) -> float:
    """Bisect towards the half carrying the larger increment of any quantity."""

    def spread(a, b):
        pa, pb = _safe_probe(spec, a), _safe_probe(spec, b)
        if pa is None or pb is None:
            return np.inf
        return max(abs(pa[k] - pb[k]) / max(1.0, abs(pa[k]), abs(pb[k])) for k in pa)

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if spread(lo, mid) >= spread(mid, hi):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def scan(spec: ScanSpec) -> list:
    """Detect and classify singular points on the scan interval.

    Known kink locations in ``spec.exclude`` are classified directly; other
    candidates come from outliers in the grid increments, are localized by
    bisection and kept only if classification confirms a discontinuity.
    """
    t0, t1 = spec.interval
    events = []
    seen = []
    for t in sorted(spec.exclude):
        if t0 < t < t1:
            ev = classify(spec, t)
            seen.append(t)
            if ev.order is not None:
                events.append(ev)
    step = (t1 - t0) / (spec.grid - 1)
    for lo, hi in _candidates(spec):
        if any(lo - step <= s <= hi + step for s in seen):
            continue
        t = _localize(spec, lo, hi)
        seen.append(t)
        h0 = max(spec.h0, 1e-9 * max(1.0, abs(t)))
        try:
            ev = classify(spec, t, h0=h0)
        except InconclusiveClassification:
            continue
        if ev.order is not None:
            events.append(ev)
    return sorted(events, key=lambda e: e.t_star)


def fit_local_exponent(samples) -> float:
    """Slope of ln|value| against ln h for ``(h, value)`` pairs."""
    samples = list(samples)
    if len(samples) < 4:
        raise TooFewSamples(f"need at least 4 samples, got {len(samples)}")
    h = np.array([s[0] for s in samples], dtype=float)
    v = np.array([s[1] for s in samples], dtype=float)
    if np.any(h <= 0):
        raise ValueError("step sizes must be positive")
    if not (np.all(v > 0) or np.all(v < 0)):
        raise SignChange("values must be nonzero and of one sign")
    return fit_power_law(h, v)


# --------------------------------------------------------------------------
# built-in constructions


def _num(v: float) -> str:
    return f"({float(v)!r})"


def _shifted(x0: float) -> str:
    return "x1" if x0 == 0 else f"(x1 - {_num(x0)})"


def _example1(x0=0.0, y0=0.5, **_):
    u = _shifted(x0)
    exprs = (
        f"cbrt({u}^4) + {u}*heaviside({u}) + x2^2/2",
        "0.5*x1 - 0.3*x2",
        "-0.4*x1 + 0.2*x2",
    )
    model = ExpressionModel(exprs, 2)
    return model, [x0, y0], x0


def _s_arcsin(x0):
    # 1 - x^2/x0^2 is written as (1 - x/x0)(1 + x/x0), which is exact near x0
    r = _num(x0)
    c = _num(x0 * (4.0 - np.pi) / 4.0)
    q = f"(1 - x1/{r})*(1 + x1/{r})"
    return (
        f"(x1 - x1/2*sqrt({q}) - {r}*asin(x1/{r})/2)*heaviside({q})"
        f" + {c}*heaviside(x1 - {r}) - {c}*heaviside(-{r} - x1)"
    )


def _example2(x0=1.0, y0=(0.3, -0.2), A0=((1.0, 2.0), (2.0, 4.0)), Q=((0.5, -1.0), (1.5, 0.7)), **_):
    # f_a = s(x) + sum_i (A0 + Q (x - x0)^2)_ai y_i with det A0 = 0
    A0 = np.asarray(A0, dtype=float)
    Q = np.asarray(Q, dtype=float)
    m, k = A0.shape
    n = k + 1
    s = _s_arcsin(x0)
    u = _shifted(x0)
    exprs = []
    for a in range(m):
        terms = [f"({_num(A0[a, i])} + {_num(Q[a, i])}*{u}^2)*x{i + 2}" for i in range(k)]
        exprs.append(s + " + " + " + ".join(terms))
    model = ExpressionModel(tuple(exprs), n)
    return model, [x0, *y0], x0


_VISIBLE_ROWS = ((1.0, 0.0), (0.0, 1.0), (-1.0, -1.0))
_HIDDEN_ROWS = ((1.0, 0.0), (0.0, 1.0))


def _example3(s_template, x0=0.0, y0=(0.3, -0.2), hess_zero=False, rows=None, **_):
    rows = np.asarray(rows if rows is not None else (_HIDDEN_ROWS if hess_zero else _VISIBLE_ROWS), dtype=float)
    u = _shifted(x0)
    s = s_template.format(u=u)
    exprs = tuple(
        s + "".join(f" + {_num(c)}*x{i + 2}" for i, c in enumerate(row)) for row in rows
    )
    model = ExpressionModel(exprs, rows.shape[1] + 1)
    return model, [x0, *y0], x0


EXAMPLES = {
    "1": _example1,
    "2": _example2,
    "3a": lambda **p: _example3("{u}*abs({u})", **p),
    "3b": lambda **p: _example3("cbrt({u})", **p),
    "3c": lambda **p: _example3("cbrt({u}^4)", **p),
}

_DEFAULT_H0 = {"1": 1e-12, "2": 2.0**-20, "3a": 1e-9, "3b": 1e-12, "3c": 1e-12}
# s'' grows only like h^(-1/2) in example 2 and loses digits below h ~ 1e-11,
# so divergence is recognised at a lower magnitude there
_DEFAULT_BLOWUP = {"2": 1e3}


def builtin_example(id: Union[str, int], **params) -> ScanSpec:
    """Ready-made scan specifications for the five worked constructions.

    * ``1``: ``f_1 = cbrt((x-x0)^4) + (x-x0) H(x-x0) + y^2/2`` plus two
      linear states (n = 2).
    * ``2``: arcsin-built background s(x) with a y-linear family whose
      coefficient matrix ``A0 + Q (x-x0)^2`` is singular at x0 (n = 3).
    * ``3a``: ``s = (x-x0)|x-x0|``; ``hess_zero=True`` picks a y-family with
      identically singular covariance.
    * ``3b``: ``s = cbrt(x-x0)``; ``3c``: ``s = cbrt((x-x0)^4)``.

    ``params`` may override ``x0``, ``y0``, ``h0``, ``depth``, ``grid``,
    ``half_width`` and the example-specific data.
    """
    key = str(id)
    if key not in EXAMPLES:
        raise UnknownExample(f"unknown example {id!r}; choose from {sorted(EXAMPLES)}")
    h0 = params.pop("h0", _DEFAULT_H0[key])
    depth = params.pop("depth", 8)
    grid = params.pop("grid", 64)
    half = params.pop("half_width", 0.5)
    blowup = params.pop("blowup_threshold", _DEFAULT_BLOWUP.get(key, 1e6))
    model, base, x0 = EXAMPLES[key](**params)
    path = AffinePath.coordinate(model.n, 0, base)
    return ScanSpec(
        model, path, (x0 - half, x0 + half), grid=grid, exclude=(x0,), h0=h0, depth=depth,
        blowup_threshold=blowup,
    )
