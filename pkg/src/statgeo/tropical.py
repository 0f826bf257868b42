"""Tropical limits of statistical hypersurfaces.

Rescaling ``x = lam * x_star`` and sending ``lam -> inf`` turns the free
energy into a maximum: ``F(lam x*) / lam^d -> max_a f_a(x*)`` when every
f_a is homogeneous of degree d.  The Gibbs weights collapse onto the active
set (uniformly, 1/r on each of the r maximizers) and the geometric tensors,
suitably normalized, converge to cell-wise limits.

Two regimes are handled:

* ``d = 1`` (super-ideal, affine, degree-1 expressions): uniform scaling.
  Normalized tensors are those of the graph of F evaluated at the tropical
  weights, so regular cells are flat and edges carry the curvature.
* ``d > 1``: double scaling ``x_{n+1} = lam^d x*_{n+1}``.  The limiting
  metric is degenerate, ``g = fbar fbar^T``.  On regular cells the Hessian of
  the winning f_a drives the curvature; on singular cells (r > 1) the
  covariance ``Phi`` of the active gradients does.

Tensor index conventions follow :mod:`statgeo.geometry`: ``Gamma[l, i, j]``
and ``riemann[i, k, l, j]``.  Finite-lambda quantities are converted to the
starred coordinates (metric ``lam^2 dx*^2 + lam^{2d} dx*_{n+1}^2``) before
normalization, see :class:`ScalingLaw`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateGradient, NotHomogeneous, WrongClass
from .geometry import report_from_primitives, full_report, riemann_from_omega
from .model import LinearModel, Model, Primitives, SuperIdealModel, _as_point, free_energy
from .oracles import fit_power_law

__all__ = [
    "TropicalPoint",
    "ScalingLaw",
    "TropicalPart",
    "DoubleScalingTensors",
    "SweepTable",
    "tropical_eval",
    "tropical_weights",
    "tropical_tensors_uniform",
    "r_edge_curvatures",
    "detect_degree",
    "tropical_part",
    "double_scaling_tensors",
    "regular_cell_tensors",
    "singular_cell_tensors",
    "lambda_sweep",
    "extrapolate",
    "LAMBDA_CAP",
]

LAMBDA_CAP = 700.0
ACTIVE_RTOL = 1e-9


@dataclass(frozen=True)
class TropicalPoint:
    """Max of the f_a at x* and the (0-based, sorted) indices attaining it."""

    x_star: np.ndarray
    value: float
    active: tuple
    m: int

    @property
    def r(self) -> int:
        return len(self.active)

    @property
    def regular(self) -> bool:
        return self.r == 1

    def spread(self, values) -> float:
        """Smallest positive gap between the max and a non-active value."""
        rest = [self.value - v for i, v in enumerate(values) if i not in self.active]
        pos = [g for g in rest if g > 0]
        return float(min(pos)) if pos else float("inf")

    def to_dict(self) -> dict:
        return {
            "x_star": [float(v) for v in self.x_star],
            "value": self.value,
            "active": [i + 1 for i in self.active],
            "r": self.r,
        }


def tropical_eval(model: Model, x_star, tol: Optional[float] = None) -> TropicalPoint:
    """Evaluate the tropical sum ``max_a f_a(x*)``.

    ``tol`` is an absolute tie tolerance; the default is
    ``1e-9 * max(1, |max f|)``.
    """
    x = _as_point(x_star, model.n)
    vals = np.asarray(model.values(x), dtype=float)
    top = float(vals.max())
    if tol is None:
        tol = ACTIVE_RTOL * max(1.0, abs(top))
    active = tuple(int(i) for i in np.flatnonzero(vals >= top - tol))
    return TropicalPoint(x, top, active, vals.size)


def tropical_weights(point: TropicalPoint, m: Optional[int] = None) -> np.ndarray:
    m = point.m if m is None else m
    w = np.zeros(m)
    w[list(point.active)] = 1.0 / point.r
    return w


# --------------------------------------------------------------------------
# degree detection and the homogeneous part


def detect_degree(model: Model, rng: Optional[np.random.Generator] = None, samples: int = 8) -> float:
    """Common homogeneity degree of the f_a, fitted from ``f(lam x) / f(x)``.

    Raises :class:`NotHomogeneous` when the fitted degrees disagree by more
    than 1e-6 (across components, samples and ``lam in {2, 3}``).
    """
    if isinstance(model, (SuperIdealModel,)):
        return 1.0
    rng = np.random.default_rng(0) if rng is None else rng
    f0 = np.asarray(model.values(np.zeros(model.n)), dtype=float)
    if not np.all(np.isfinite(f0)):
        raise NotHomogeneous("f(0) is not finite")
    fits = []
    for _ in range(samples):
        x = rng.uniform(0.5, 1.5, model.n) * rng.choice([-1.0, 1.0], model.n)
        base = np.asarray(model.values(x), dtype=float)
        for lam in (2.0, 3.0):
            scaled = np.asarray(model.values(lam * x), dtype=float)
            for b, s in zip(base, scaled):
                if abs(b) < 1e-12 and abs(s) < 1e-12:
                    continue
                if b == 0.0 or s / b <= 0.0:
                    raise NotHomogeneous("f(lam x) / f(x) is not a positive power of lam")
                fits.append(np.log(s / b) / np.log(lam))
    if not fits:
        raise NotHomogeneous("every f_a vanishes identically")
    fits = np.array(fits)
    d = float(np.median(fits))
    if np.max(np.abs(fits - d)) > 1e-6:
        raise NotHomogeneous(
            f"fitted degrees range over [{fits.min():.6g}, {fits.max():.6g}]; "
            "for f = linear + homogeneous use tropical_part(model)"
        )
    d = round(d * 1e6) / 1e6
    if abs(d - round(d)) <= 1e-6:
        d = float(round(d))
    return d


@dataclass(frozen=True)
class TropicalPart(Model):
    """``phi_a(x) = f_a(x) - f_a(0) - grad f_a(0) . x`` of a base model.

    For ``f = a . x + phi`` with phi homogeneous of degree d > 1 the double
    scaling limit only sees phi.
    """

    base: Model
    offset: np.ndarray = field(repr=False)
    slope: np.ndarray = field(repr=False)
    kind = "tropical-part"

    @property
    def n(self):
        return self.base.n

    @property
    def m(self):
        return self.base.m

    def values(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.base.values(x)) - self.offset - self.slope @ x

    def jets(self, x):
        vals, grads, hess, nonsmooth = self.base.jets(x)
        x = np.asarray(x, dtype=float)
        return vals - self.offset - self.slope @ x, grads - self.slope, hess, nonsmooth

    def describe(self):
        return {"type": "tropical-part", "base": self.base.describe()}


def tropical_part(model: Model) -> TropicalPart:
    vals, grads, _, _ = model.jets(np.zeros(model.n))
    off = np.array(vals, dtype=float)
    sl = np.array(grads, dtype=float)
    off.setflags(write=False)
    sl.setflags(write=False)
    return TropicalPart(model, off, sl)


# --------------------------------------------------------------------------
# scaling laws


# starred-coordinate weight of each quantity: q* = lam^k q
_STAR = {"F": 0, "w": 0, "S": 0, "g": 2, "Gamma": 1, "omega": 2, "riemann": 4, "K": 0}


@dataclass(frozen=True)
class ScalingLaw:
    """lam-powers dividing each starred quantity in its tropical limit.

    ``det_g`` is special-cased to ``2n + 2d - 2`` (2n when d = 1).  A
    negative K power means K is multiplied by ``lam^{-power}``.
    """

    d: float
    n: int
    sector: str  # "uniform" | "regular" | "singular"
    exponents: dict

    @classmethod
    def for_sector(cls, d: float, n: int, r: int) -> "ScalingLaw":
        if d == 1.0:
            sector = "uniform"
            ex = {"F": 1, "g": 2, "det_g": 2 * n, "Gamma": 1, "omega": 2, "riemann": 4, "K": 0}
        elif r == 1:
            sector = "regular"
            ex = {"F": d, "g": 2 * d, "det_g": 2 * n + 2 * d - 2, "Gamma": 0, "omega": 1,
                  "riemann": 2, "K": -(n + 2 * d - 2)}
        else:
            sector = "singular"
            ex = {"F": d, "g": 2 * d, "det_g": 2 * n + 2 * d - 2, "Gamma": d, "omega": d + 1,
                  "riemann": 2 * d + 2, "K": -(n + 2 * d - 2 - d * n)}
        ex.update({"w": 0, "S": 0})
        return cls(float(d), n, sector, ex)

    def normalize(self, quantity: str, raw, lam: float):
        """Starred, normalized value of a quantity computed in x coordinates."""
        star = 2 * self.n if quantity == "det_g" else _STAR[quantity]
        return np.asarray(raw, dtype=float) * lam ** (star - self.exponents[quantity])


# --------------------------------------------------------------------------
# d = 1


def r_edge_curvatures(r: int) -> dict:
    """Super-ideal mean and scalar curvature at weights 1/r on r atoms."""
    return {
        "mean_H": (r - 1) / np.sqrt(r * (r + 1.0)),
        "scalar_R": (r - 1) * (r - 2) / (r * (r + 1.0)),
    }


def _is_uniform_class(model: Model) -> bool:
    if isinstance(model, (SuperIdealModel, LinearModel)):
        return True
    try:
        return detect_degree(model) == 1.0
    except NotHomogeneous:
        return False


def tropical_tensors_uniform(model: Model, point: TropicalPoint) -> dict:
    """Cell or edge tensors of the uniform (d = 1) tropical limit.

    The returned tensors are the normalized limits ``g*/lam^2``,
    ``Omega*/lam^2``, ``R*/lam^4`` and K; they equal the graph geometry at
    the tropical weights with the curvature of the f_a dropped.  On regular
    cells ``cell_omega`` additionally gives ``Hess f_a0 / sqrt(det g)``, the
    extrinsic curvature of the cell itself in starred coordinates (zero for
    affine models).
    """
    if not _is_uniform_class(model):
        raise WrongClass("uniform tropical limit needs degree-1 f_a; use double_scaling_tensors")
    x = point.x_star
    vals, grads, hess, _ = model.jets(x)
    w = tropical_weights(point, model.m)
    fbar = w @ grads
    second = np.einsum("a,ai,ak->ik", w, grads, grads)
    prims = Primitives(x, point.value, w, np.asarray(vals), np.asarray(grads), np.zeros_like(hess), fbar, second)
    rep = report_from_primitives(prims)
    out = {
        "sector": "regular" if point.regular else "edge",
        "active": [i + 1 for i in point.active],
        "r": point.r,
        "w_trop": w,
        "g_trop": rep.g,
        "det_g": rep.det_g,
        "omega_trop": rep.omega,
        "christoffel": rep.christoffel,
        "riemann": rep.riemann,
        "scalar_R": rep.scalar_R,
        "mean_H": rep.mean_H,
        "K": rep.gauss_kronecker_K,
        "S": rep.entropy_S,
    }
    if point.regular:
        a0 = point.active[0]
        out["cell_omega"] = np.asarray(hess[a0]) / np.sqrt(rep.det_g)
    elif isinstance(model, SuperIdealModel):
        out["edge_closed_forms"] = r_edge_curvatures(point.r)
    return out


# --------------------------------------------------------------------------
# d > 1


@dataclass(frozen=True)
class DoubleScalingTensors:
    sector: str
    d: float
    r: int
    active: tuple
    fbar: np.ndarray
    phi: np.ndarray
    g: np.ndarray
    det_g: float
    christoffel: np.ndarray
    omega: np.ndarray
    riemann: np.ndarray
    K: float
    law: ScalingLaw
    mixed: bool = False

    def to_dict(self) -> dict:
        out = {
            "sector": self.sector,
            "d": self.d,
            "r": self.r,
            "active": [i + 1 for i in self.active],
            "fbar": self.fbar.tolist(),
            "phi": self.phi.tolist(),
            "g_trop": self.g.tolist(),
            "det_g": self.det_g,
            "christoffel": self.christoffel.tolist(),
            "omega_trop": self.omega.tolist(),
            "riemann": self.riemann.tolist(),
            "K": self.K,
            "exponents": dict(self.law.exponents),
        }
        if self.mixed:
            out["note"] = "mixed model: linear part removed, limit taken on the homogeneous part"
        return out


def _delta(d: float) -> float:
    return 1.0 if round(d * 1e6) == 1_000_000 else 0.0


def regular_cell_tensors(grad, hess, d: float, tol: float = 1e-12) -> dict:
    """Regular-sector limits on the cell of one winning f, written out.

    ``Gamma = f_ij f_l / sum_h f_h^2``, ``Omega = f_ij / sqrt(sum_h f_h^2)``,
    ``R_iklj = (f_kj f_il - f_kl f_ij) / sum_h f_h^2`` and
    ``K = det f_ij / (sum_h f_h^2)^(n/2 + 1)``; the sums gain ``+1`` at d = 1.
    """
    f1 = np.asarray(grad, dtype=float)
    f2 = np.asarray(hess, dtype=float)
    n = f1.size
    s = float(np.sum(f1**2))
    if s < tol and d > 1:
        raise DegenerateGradient(f"winning gradient has squared norm {s:.3g}")
    s += _delta(d)
    gamma = np.einsum("ij,l->lij", f2, f1) / s
    omega = f2 / np.sqrt(s)
    riem = (np.einsum("kj,il->iklj", f2, f2) - np.einsum("kl,ij->iklj", f2, f2)) / s
    K = float(np.linalg.det(f2)) / s ** (n / 2.0 + 1.0)
    g = np.outer(f1, f1) + _delta(d) * np.eye(n)
    return {"g": g, "det_g": s, "christoffel": gamma, "omega": omega, "riemann": riem, "K": K}


def singular_cell_tensors(active_grads, d: float, phi=None, tol: float = 1e-12) -> dict:
    """Limits from the active gradients with uniform tropical weights.

    ``phi`` defaults to their covariance ``(1/r) sum_p f_p f_p^T - fbar fbar^T``;
    passing the Hessian of the single winner instead recovers the regular
    forms when r = 1.
    """
    G = np.atleast_2d(np.asarray(active_grads, dtype=float))
    r, n = G.shape
    fbar = G.mean(axis=0)
    if phi is None:
        phi = G.T @ G / r - np.outer(fbar, fbar)
    phi = np.asarray(phi, dtype=float)
    D = _delta(d) + float(fbar @ fbar)
    if D < tol:
        raise DegenerateGradient(f"tropical mean gradient has squared norm {D:.3g}")
    g = np.outer(fbar, fbar) + _delta(d) * np.eye(n)
    gamma = np.einsum("ij,l->lij", phi, fbar) / D
    omega = phi / np.sqrt(D)
    riem = riemann_from_omega(omega)
    K = float(np.linalg.det(phi)) / D ** (n / 2.0 + 1.0)
    return {"fbar": fbar, "phi": phi, "g": g, "det_g": D, "christoffel": gamma,
            "omega": omega, "riemann": riem, "K": K}


def _homogeneous_view(model: Model, d: Optional[float] = None):
    """(model used for the limit, degree, mixed flag).

    An explicit ``d`` overrides the fitted degree; ``d = 1`` skips detection.
    """
    if d is not None and float(d) == 1.0:
        return model, 1.0, False
    try:
        fitted, core, mixed = detect_degree(model), model, False
    except NotHomogeneous:
        core, mixed = tropical_part(model), True
        try:
            fitted = detect_degree(core)
        except NotHomogeneous as exc:
            raise NotHomogeneous(f"neither f nor f - (affine part) is homogeneous: {exc}") from None
    return core, fitted if d is None else float(d), mixed


def double_scaling_tensors(model: Model, x_star, point: Optional[TropicalPoint] = None,
                           d: Optional[float] = None, tol: float = 1e-12) -> DoubleScalingTensors:
    """Double-scaling limits at x*, dispatched on the sector.

    Mixed models (affine plus homogeneous of degree d > 1) are reduced to
    their homogeneous part first.
    """
    core, d, mixed = _homogeneous_view(model, d)
    x = _as_point(x_star, model.n)
    if point is None:
        point = tropical_eval(core, x)
    _, grads, hess, _ = core.jets(x)
    grads = np.asarray(grads)
    law = ScalingLaw.for_sector(d, model.n, point.r)
    if point.regular:
        a0 = point.active[0]
        t = regular_cell_tensors(grads[a0], hess[a0], d, tol)
        fbar, phi, sector = grads[a0].copy(), np.array(hess[a0]), "regular"
    else:
        t = singular_cell_tensors(grads[list(point.active)], d, tol=tol)
        fbar, phi, sector = t["fbar"], t["phi"], "singular"
    return DoubleScalingTensors(
        sector=sector, d=d, r=point.r, active=point.active, fbar=fbar, phi=phi,
        g=t["g"], det_g=t["det_g"], christoffel=t["christoffel"], omega=t["omega"],
        riemann=t["riemann"], K=t["K"], law=law, mixed=mixed,
    )


# --------------------------------------------------------------------------
# lambda sweeps


_ALIASES = {
    "F": "F", "w": "w", "S": "S", "entropy": "S",
    "g": "g", "metric": "g", "det_g": "det_g", "detg": "det_g",
    "Gamma": "Gamma", "christoffel": "Gamma",
    "omega": "omega", "Omega": "omega",
    "R": "riemann", "riemann": "riemann", "K": "K",
}
_RANK = {"F": 0, "S": 0, "K": 0, "det_g": 0, "w": 1, "g": 2, "omega": 2, "Gamma": 3, "riemann": 4}


def _parse_quantity(q: str):
    """'g12' -> ('g', (0, 1)); 'K' -> ('K', None).  Components are 1-based."""
    for name in sorted(_ALIASES, key=len, reverse=True):
        if q.startswith(name):
            rest = q[len(name):]
            base = _ALIASES[name]
            if not rest:
                return base, None
            if rest.isdigit() and len(rest) == _RANK[base]:
                return base, tuple(int(c) - 1 for c in rest)
    raise ValueError(f"unknown sweep quantity {q!r}")


@dataclass(frozen=True)
class SweepTable:
    quantity: str
    d: float
    sector: str
    lambdas: np.ndarray
    raw: list
    normalized: list
    predicted: np.ndarray
    gaps: np.ndarray
    order: Optional[float]
    extrapolated: np.ndarray = None
    extrapolated_gap: float = float("nan")

    HEADER = ("lambda", "raw", "normalized", "predicted", "gap")

    def rows(self):
        def scalar(v):
            v = np.asarray(v, dtype=float)
            return float(v) if v.ndim == 0 else float(v.flat[np.argmax(np.abs(v))])

        pred = scalar(self.predicted)
        return [
            (float(lam), scalar(r), scalar(nv), pred, float(g))
            for lam, r, nv, g in zip(self.lambdas, self.raw, self.normalized, self.gaps)
        ]

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "d": self.d,
            "sector": self.sector,
            "rows": [dict(zip(self.HEADER, row)) for row in self.rows()],
            "order": self.order,
            "extrapolated": np.asarray(self.extrapolated).tolist(),
            "extrapolated_gap": self.extrapolated_gap,
        }


def _raw(model, x, base):
    if base == "F":
        return free_energy(model, x)
    rep = full_report(model, x)
    return {
        "w": rep.w, "S": rep.entropy_S, "g": rep.g, "det_g": rep.det_g,
        "Gamma": rep.christoffel, "omega": rep.omega, "riemann": rep.riemann,
        "K": rep.gauss_kronecker_K,
    }[base]


def _prediction(model, x_star, base, d, point) -> np.ndarray:
    if base == "F":
        return np.asarray(point.value)
    if base == "w":
        return tropical_weights(point, model.m)
    if base == "S":
        return np.asarray(float(np.log(point.r)))
    if d == 1.0:
        t = tropical_tensors_uniform(model, point)
        key = {"g": "g_trop", "det_g": "det_g", "Gamma": "christoffel", "omega": "omega_trop",
               "riemann": "riemann", "K": "K"}[base]
        return np.asarray(t[key])
    t = double_scaling_tensors(model, x_star, point, d)
    return np.asarray({"g": t.g, "det_g": t.det_g, "Gamma": t.christoffel, "omega": t.omega,
                       "riemann": t.riemann, "K": t.K}[base])


def extrapolate(lambdas, values) -> np.ndarray:
    """Neville extrapolation to ``1/lam = 0`` through every sweep point.

    Finite-lambda corrections are power series in ``1/lam`` (plus
    exponentially small weight tails), so this removes them order by order.
    """
    t = 1.0 / np.asarray(lambdas, dtype=float)
    p = [np.asarray(v, dtype=float) for v in values]
    k = len(p)
    for level in range(1, k):
        p = [(t[i + level] * p[i] - t[i] * p[i + 1]) / (t[i + level] - t[i]) for i in range(k - level)]
    return p[0]


def lambda_sweep(model: Model, x_star, d: Optional[float], lambdas: Sequence[float],
                 quantity: str = "F") -> SweepTable:
    """Evaluate a normalized quantity along ``x = lam x*`` and compare with its limit.

    ``quantity`` is one of F, w, S, g, det_g, Gamma, omega, R (Riemann), K,
    optionally followed by 1-based component digits (``g12``, ``R1221``).
    The prediction for F and the cell structure use the homogeneous part of
    mixed models; the finite-lambda values always use the full model.
    """
    lams = np.asarray(lambdas, dtype=float)
    if lams.size < 3 or np.any(np.diff(lams) <= 0) or lams[0] <= 0:
        raise ValueError("lambdas must be positive, increasing and at least three")
    x = _as_point(x_star, model.n)
    if lams[-1] * max(1.0, np.abs(x).max()) > LAMBDA_CAP:
        raise ValueError(f"lambda * |x*| exceeds the cap {LAMBDA_CAP}")
    base, comp = _parse_quantity(quantity)
    core, d, _ = _homogeneous_view(model, d)
    point = tropical_eval(core, x)
    law = ScalingLaw.for_sector(d, model.n, point.r)
    pred = _prediction(model, x, base, d, point)
    raw, norm, gaps = [], [], []
    for lam in lams:
        rv = np.asarray(_raw(model, lam * x, base), dtype=float)
        nv = law.normalize(base, rv, lam)
        if comp is not None:
            rv, nv = rv[comp], nv[comp]
        raw.append(rv)
        norm.append(nv)
        p = pred[comp] if comp is not None else pred
        gaps.append(float(np.max(np.abs(nv - p))))
    if comp is not None:
        pred = pred[comp]
    gaps = np.array(gaps)
    order = None
    if np.all(gaps > 0):
        order = -fit_power_law(lams, gaps)
    ext = extrapolate(lams, norm)
    ext_gap = float(np.max(np.abs(ext - pred)))
    return SweepTable(quantity, d, law.sector, lams, raw, norm, np.asarray(pred), gaps, order, ext, ext_gap)
