"""Small-coupling expansions in a parameter epsilon.

Coefficients of ``q(eps) = c0 + c1 eps + c2 eps^2 + ...`` for a geometric
quantity q are extracted by central differences at steps h and 2h combined
by Richardson extrapolation; no third-order jets are needed.

Two conventions for the first-order coefficient are supported.  By default
every ingredient, Gibbs weights included, follows epsilon.  With
``frozen_weights=True`` the weights are held at their epsilon = 0 values and
only the explicit epsilon dependence of the exponent derivatives is expanded,
which is the convention of hand expansions that treat w_a as given symbols.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import UnstableExtraction
from .geometry import GeometryReport, gauss_kronecker, report_from_primitives
from .model import ExpressionModel, Model, SubsystemModel, gibbs_weights, primitives

__all__ = [
    "EpsilonFamily",
    "SeriesEstimate",
    "epsilon_series",
    "quantity_selector",
    "example2_model",
    "example2_analytic",
    "example2_first_order",
    "example2_second_order_K",
    "translation_symmetric_example",
    "verify_prop3",
    "block_determinants",
    "blockdet_first_order",
    "adjugate",
]


def _hess_det(r: GeometryReport) -> float:
    return float(np.linalg.det(r.omega * np.sqrt(r.det_g)))


_NAMED = {
    "K": lambda r: r.gauss_kronecker_K,
    "det_g": lambda r: r.det_g,
    "R": lambda r: r.scalar_R,
    "scalar_R": lambda r: r.scalar_R,
    "meanH": lambda r: r.mean_H,
    "mean_H": lambda r: r.mean_H,
    "S": lambda r: r.entropy_S,
    "F": lambda r: r.F,
    "hess_det": _hess_det,
}


def quantity_selector(name: Union[str, Callable]) -> Callable[[GeometryReport], float]:
    """Map a quantity name to a function of a geometry report.

    Accepts the names above plus ``gIJ`` (1-based metric entry, e.g. ``g12``)
    and ``omegaIJ``.
    """
    if callable(name):
        return name
    if name in _NAMED:
        return _NAMED[name]
    for prefix, attr in (("g", "g"), ("omega", "omega")):
        tail = name[len(prefix):]
        if name.startswith(prefix) and len(tail) == 2 and tail.isdigit():
            i, j = int(tail[0]) - 1, int(tail[1]) - 1
            return lambda r, i=i, j=j, attr=attr: float(getattr(r, attr)[i, j])
    raise KeyError(f"unknown quantity {name!r}")


@dataclass(frozen=True)
class EpsilonFamily:
    """A one-parameter family of models and the quantity to expand.

    ``build(eps)`` returns the model at coupling eps.  The differencing grid is
    ``(-2h, -h, 0, h, 2h)``.
    """

    build: Callable[[float], Model]
    quantity: Union[str, Callable] = "K"
    h: float = 1e-3
    frozen_weights: bool = False

    @classmethod
    def from_expressions(cls, sources: Sequence[str], n: int, name: str = "e", **kw) -> "EpsilonFamily":
        base = ExpressionModel(tuple(sources), n, {name: 0.0})
        return cls(lambda eps: base.with_constants(**{name: eps}), **kw)

    @classmethod
    def from_subsystem(cls, model: SubsystemModel, **kw) -> "EpsilonFamily":
        return cls(model.with_epsilon, **kw)

    @property
    def eps_grid(self):
        h = self.h
        return (-2 * h, -h, 0.0, h, 2 * h)

    def with_quantity(self, quantity) -> "EpsilonFamily":
        return EpsilonFamily(self.build, quantity, self.h, self.frozen_weights)

    def with_h(self, h: float) -> "EpsilonFamily":
        return EpsilonFamily(self.build, self.quantity, h, self.frozen_weights)

    def evaluate(self, x, eps_values=None) -> np.ndarray:
        sel = quantity_selector(self.quantity)
        w0 = gibbs_weights(self.build(0.0), x) if self.frozen_weights else None
        out = []
        for eps in self.eps_grid if eps_values is None else eps_values:
            p = primitives(self.build(eps), x, weights=w0)
            out.append(sel(report_from_primitives(p)))
        return np.array(out, dtype=float)


@dataclass(frozen=True)
class SeriesEstimate:
    c0: float
    c1: float
    c2: float
    stderr: float
    raw: dict = field(default_factory=dict)

    def to_dict(self):
        return {"c0": self.c0, "c1": self.c1, "c2": self.c2, "stderr": self.stderr}


def epsilon_series(family: EpsilonFamily, x, orders: int = 2) -> SeriesEstimate:
    """Taylor coefficients c0, c1, c2 of the family's quantity at x."""
    if orders not in (1, 2):
        raise ValueError("orders must be 1 or 2")
    h = family.h
    qm2, qm1, q0, qp1, qp2 = family.evaluate(x)
    d1_h = (qp1 - qm1) / (2 * h)
    d1_2h = (qp2 - qm2) / (4 * h)
    d2_h = (qp1 - 2 * q0 + qm1) / (h * h)
    d2_2h = (qp2 - 2 * q0 + qm2) / (4 * h * h)
    c1 = (4 * d1_h - d1_2h) / 3
    c2 = 0.5 * (4 * d2_h - d2_2h) / 3
    stderr = abs(d1_h - d1_2h)
    if orders == 2:
        stderr = max(stderr, 0.5 * abs(d2_h - d2_2h))
    else:
        c2 = float("nan")
    scale = max(abs(c1), 0.0 if np.isnan(c2) else abs(c2), 1.0)
    if not np.isfinite(stderr) or stderr > 1e-4 * scale:
        raise UnstableExtraction(
            f"series extraction unstable: stderr {stderr:.3g} exceeds {1e-4 * scale:.3g}"
        )
    raw = {"c1_h": d1_h, "c1_2h": d1_2h, "c2_h": 0.5 * d2_h, "c2_2h": 0.5 * d2_2h}
    return SeriesEstimate(float(q0), float(c1), float(c2), float(stderr), raw)


# --------------------------------------------------------------------------
# the three-dimensional worked example with two states
#   f_1 = x1 + x2 + e x1 x2,  f_2 = x1 + x3 + e x1 x3

EXAMPLE2_SOURCES = ("x1 + x2 + e*x1*x2", "x1 + x3 + e*x1*x3")


def example2_model(eps: float) -> ExpressionModel:
    return ExpressionModel(EXAMPLE2_SOURCES, 3, {"e": float(eps)})


def _example2_weights(x, eps):
    x1, x2, x3 = np.asarray(x, dtype=float)
    u = np.array([x2 + eps * x1 * x2, x3 + eps * x1 * x3])
    u -= u.max()
    z = np.exp(u)
    return z / z.sum()


def example2_analytic(x, eps: float) -> dict:
    """Closed-form metric, det g, K and entropy of the worked example."""
    x1, x2, x3 = np.asarray(x, dtype=float)
    w1, w2 = _example2_weights(x, eps)
    a = 1.0 + eps * (w1 * x2 + w2 * x3)
    b = 1.0 + eps * x1
    g = np.empty((3, 3))
    g[0, 0] = 1.0 + a * a
    g[0, 1] = g[1, 0] = (w1 + eps * (w1 * w1 * x2 + w1 * w2 * x3)) * b
    g[0, 2] = g[2, 0] = (w2 + eps * (w1 * w2 * x2 + w2 * w2 * x3)) * b
    g[1, 1] = 1.0 + w1 * w1 * b * b
    g[1, 2] = g[2, 1] = w1 * w2 * b * b
    g[2, 2] = 1.0 + w2 * w2 * b * b
    det_g = 1.0 + a * a + (w1 * w1 + w2 * w2) * b * b
    K = -w1 * w2 * eps**2 * b * b / det_g**2.5
    u2, u3 = x2 + eps * x1 * x2, x3 + eps * x1 * x3
    top = max(u2, u3)
    e2, e3 = np.exp(u2 - top), np.exp(u3 - top)
    S = top + np.log(e2 + e3) - b * (e2 * x2 + e3 * x3) / (e2 + e3)
    return {"w": np.array([w1, w2]), "g": g, "det_g": float(det_g), "K": float(K), "S": float(S)}


def example2_first_order(x) -> dict:
    """First-order coefficients with weights held at their eps = 0 values."""
    x1, x2, x3 = np.asarray(x, dtype=float)
    w1, w2 = _example2_weights(x, 0.0)
    dg = np.empty((3, 3))
    dg[0, 0] = 2 * (w1 * x2 + w2 * x3)
    dg[0, 1] = dg[1, 0] = w1 * w1 * x2 + w1 * w2 * x3 + w1 * x1
    dg[0, 2] = dg[2, 0] = w1 * w2 * x2 + w2 * w2 * x3 + w2 * x1
    dg[1, 1] = 2 * w1 * w1 * x1
    dg[1, 2] = dg[2, 1] = 2 * w1 * w2 * x1
    dg[2, 2] = 2 * w2 * w2 * x1
    det = 2 * (w1 * x2 + w2 * x3) + 2 * (w1 * w1 + w2 * w2) * x1
    # extra term when the weights are allowed to move with eps
    dw1 = w1 * w2 * x1 * (x2 - x3)
    return {"g": dg, "det_g": float(det), "K": 0.0, "det_g_weight_term": float(2 * (w1 - w2) * dw1)}


def example2_second_order_K(x) -> float:
    """eps^2 coefficient of K; it does not depend on x1."""
    _, x2, x3 = np.asarray(x, dtype=float)
    top = max(x2, x3)
    a, b = np.exp(x2 - top), np.exp(x3 - top)
    return float(-a * b * (a + b) ** 3 / (3 * a * a + 4 * a * b + 3 * b * b) ** 2.5)


def translation_symmetric_example(x, eps: float, tol: float = 1e-10) -> float:
    """K of the shift-invariant variant ``e (x1 - x2)^2``, ``e (x1 - x3)^2``.

    The surface is invariant under ``x -> x + a (1, 1, 1)`` with
    ``x4 -> x4 + 2a``, so K vanishes; an AssertionError reports otherwise.
    """
    model = ExpressionModel(
        ("x1 + x2 + e*(x1 - x2)^2", "x1 + x3 + e*(x1 - x3)^2"), 3, {"e": float(eps)}
    )
    K = gauss_kronecker(model, x)
    if not abs(K) < tol:
        raise AssertionError(f"expected K = 0, got K = {K!r}")
    return K


# --------------------------------------------------------------------------
# interacting subsystems


def verify_prop3(model: SubsystemModel, x, h: float = 1e-3) -> dict:
    """First-order coefficient of K for the coupling of ``model``.

    ``pass`` is ``|c1| < 1e-6 max(1, |c2|)``.  The model's own epsilon is
    ignored; the expansion is around zero coupling.
    """
    est = epsilon_series(EpsilonFamily.from_subsystem(model, quantity="K", h=h), x)
    ok = abs(est.c1) < 1e-6 * max(1.0, abs(est.c2))
    return {
        "model_digest": model.with_epsilon(0.0).digest(),
        "x": [float(v) for v in np.asarray(x, dtype=float)],
        "c0_K": est.c0,
        "c1_K": est.c1,
        "c2_K": est.c2,
        "stderr": est.stderr,
        "pass": bool(ok),
    }


def adjugate(a: np.ndarray) -> np.ndarray:
    """Classical adjoint by cofactors; well defined for singular matrices."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return np.ones((1, 1))
    adj = np.empty_like(a)
    for i, j in itertools.product(range(n), repeat=2):
        minor = np.delete(np.delete(a, i, axis=0), j, axis=1)
        adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def _hess_at(model, x):
    return primitives(model, x).hessian_F


def block_determinants(model: SubsystemModel, x, h: float = 1e-3):
    """Per-block ``det(0, p)`` and ``det(1, p)`` around zero coupling.

    ``det(0, p)`` is the determinant of the p-th diagonal Hessian block at
    eps = 0 and ``det(1, p) = tr(adj(B_p) dB_p/deps)`` its first-order
    change, with ``dB_p/deps`` from Richardson-combined central differences.
    """
    H0 = _hess_at(model.with_epsilon(0.0), x)
    Hs = {e: _hess_at(model.with_epsilon(e), x) for e in (-2 * h, -h, h, 2 * h)}
    dH = (4 * (Hs[h] - Hs[-h]) / (2 * h) - (Hs[2 * h] - Hs[-2 * h]) / (4 * h)) / 3
    det0, det1 = [], []
    for block in model.blocks():
        idx = np.ix_(block, block)
        B = H0[idx]
        det0.append(float(np.linalg.det(B)))
        det1.append(float(np.trace(adjugate(B) @ dH[idx])))
    return det0, det1


def blockdet_first_order(model: SubsystemModel, x, h: float = 1e-3) -> float:
    """First-order coefficient of det Hess F assembled block by block.

    ``sum_p det(1, p) prod_{r != p} det(0, r)``.
    """
    det0, det1 = block_determinants(model, x, h)
    total = 0.0
    for p in range(len(det0)):
        total += det1[p] * float(np.prod([d for r, d in enumerate(det0) if r != p]))
    return total
