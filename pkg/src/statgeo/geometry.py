"""Extrinsic and intrinsic geometry of the graph x_{n+1} = F(x).

With fbar = grad F the graph has

* metric ``g = I + fbar fbar^T`` with ``det g = 1 + |fbar|^2``,
* unit normal ``N = (-fbar, 1) / sqrt(det g)``,
* second fundamental form ``Omega = Hess F / sqrt(det g)``,
* Christoffel symbols ``Gamma^k_ij = fbar_k Omega_ij / sqrt(det g)``,
* Riemann tensor from the Gauss equation
  ``R_iklm = Omega_il Omega_km - Omega_kl Omega_im``.

Ricci is ``R_km = g^{il} R_iklm`` and ``R = g^{km} R_km``.  With this
contraction the super-ideal closed forms (``R = 2(1+S4)/(1+S2)^2 - 1``) are
reproduced; the opposite contraction only flips the sign.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields

import numpy as np

from .model import Model, Primitives, primitives

__all__ = [
    "MAX_DIM",
    "GeometryReport",
    "metric",
    "normal_vector",
    "second_form",
    "christoffel",
    "riemann",
    "ricci_and_scalar",
    "mean_curvature",
    "gauss_kronecker",
    "entropy_geometric",
    "full_report",
    "report_from_primitives",
    "riemann_from_omega",
    "scalar_display",
    "ricci_display",
    "SCALAR_FIELDS",
]

MAX_DIM = 32


def _check_dim(model: Model):
    if model.n > MAX_DIM:
        raise ValueError(f"dimension {model.n} exceeds the dense-tensor cap of {MAX_DIM}")


def _prims(model, x) -> Primitives:
    _check_dim(model)
    return primitives(model, x)


def _metric_from_fbar(fbar):
    n = fbar.size
    det = 1.0 + float(fbar @ fbar)
    g = np.eye(n) + np.outer(fbar, fbar)
    g_inv = np.eye(n) - np.outer(fbar, fbar) / det
    return g, det, g_inv


def riemann_from_omega(omega: np.ndarray) -> np.ndarray:
    """Gauss-equation tensor R_iklm = O_il O_km - O_kl O_im."""
    a = np.einsum("il,km->iklm", omega, omega)
    b = np.einsum("kl,im->iklm", omega, omega)
    return a - b


def _ricci(riem, g_inv):
    ric = np.einsum("il,iklm->km", g_inv, riem)
    ric = 0.5 * (ric + ric.T)
    return ric, float(np.einsum("km,km->", g_inv, ric))


def scalar_display(fbar, omega, det_g) -> float:
    """Closed expression for R in terms of Omega and fbar.

    ``(tr O)^2 - tr O^2 + 2 fbar^T (O^2 - tr O * O) fbar / det g``.
    """
    t = np.trace(omega)
    o2 = omega @ omega
    return float(t * t - np.trace(o2) + 2.0 * fbar @ (o2 - t * omega) @ fbar / det_g)


def ricci_display(fbar, omega, det_g) -> np.ndarray:
    """Closed expression for the Ricci tensor in terms of Omega and fbar.

    ``tr O O_ij - (fbar^T O fbar / det g) O_ij - (O^2)_ij
    + d_i(det g) d_j(det g) / (4 det g^2)`` with
    ``d_i det g = 2 sqrt(det g) (O fbar)_i``.
    """
    t = np.trace(omega)
    q = float(fbar @ omega @ fbar) / det_g
    ddet = 2.0 * np.sqrt(det_g) * (omega @ fbar)
    return t * omega - q * omega - omega @ omega + np.outer(ddet, ddet) / (4.0 * det_g**2)


SCALAR_FIELDS = ("F", "det_g", "scalar_R", "mean_H", "gauss_kronecker_K", "entropy_S")


@dataclass(frozen=True)
class GeometryReport:
    x: np.ndarray
    F: float
    w: np.ndarray
    fbar: np.ndarray
    g: np.ndarray
    det_g: float
    g_inv: np.ndarray
    normal: np.ndarray
    omega: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar_R: float
    mean_H: float
    gauss_kronecker_K: float
    entropy_S: float
    ricci_closed_form: np.ndarray = None
    scalar_closed_form: float = float("nan")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.tolist() if isinstance(v, np.ndarray) else v
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def csv_row(self) -> dict:
        """Flat scalar columns: x_i, w_a, fbar_i, g_ij, and the scalar fields."""
        row = {f"x{i + 1}": v for i, v in enumerate(self.x)}
        row.update({f"w{a + 1}": v for a, v in enumerate(self.w)})
        row.update({f"fbar{i + 1}": v for i, v in enumerate(self.fbar)})
        n = self.x.size
        for i in range(n):
            for j in range(i, n):
                row[f"g{i + 1}{j + 1}"] = self.g[i, j]
        for name in SCALAR_FIELDS:
            row[name] = getattr(self, name)
        return row

    def to_csv(self) -> str:
        row = self.csv_row()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(row))
        writer.writeheader()
        writer.writerow(row)
        return buf.getvalue()


def report_from_primitives(p: Primitives) -> GeometryReport:
    """Assemble every tensor from precomputed primitives."""
    fbar = np.array(p.fbar)
    g, det_g, g_inv = _metric_from_fbar(fbar)
    root = np.sqrt(det_g)
    hess = p.hessian_F
    omega = hess / root
    normal = np.append(-fbar, 1.0) / root
    gamma = np.einsum("k,ij->kij", fbar, omega) / root
    riem = riemann_from_omega(omega)
    ric, R = _ricci(riem, g_inv)
    H = float(np.einsum("ij,ij->", g_inv, omega))
    K = float(np.linalg.det(hess)) / det_g ** ((fbar.size + 2) / 2.0)
    w = p.w
    nz = w[w > 0]
    S = float(-(nz * np.log(nz)).sum())
    return GeometryReport(
        x=np.array(p.x),
        F=p.F,
        w=np.array(w),
        fbar=fbar,
        g=g,
        det_g=det_g,
        g_inv=g_inv,
        normal=normal,
        omega=omega,
        christoffel=gamma,
        riemann=riem,
        ricci=ric,
        scalar_R=R,
        mean_H=H,
        gauss_kronecker_K=K,
        entropy_S=S,
        ricci_closed_form=ricci_display(fbar, omega, det_g),
        scalar_closed_form=scalar_display(fbar, omega, det_g),
    )


def full_report(model: Model, x) -> GeometryReport:
    return report_from_primitives(_prims(model, x))


def metric(model: Model, x):
    """Return ``(g, det_g, g_inv)``; the inverse uses the rank-one identity."""
    return _metric_from_fbar(np.array(_prims(model, x).fbar))


def normal_vector(model: Model, x) -> np.ndarray:
    fbar = np.array(_prims(model, x).fbar)
    return np.append(-fbar, 1.0) / np.sqrt(1.0 + fbar @ fbar)


def second_form(model: Model, x) -> np.ndarray:
    p = _prims(model, x)
    return p.hessian_F / np.sqrt(1.0 + p.fbar @ p.fbar)


def christoffel(model: Model, x) -> np.ndarray:
    """Gamma[k, i, j] = Gamma^k_ij."""
    p = _prims(model, x)
    det = 1.0 + p.fbar @ p.fbar
    return np.einsum("k,ij->kij", p.fbar, p.hessian_F) / det


def riemann(model: Model, x) -> np.ndarray:
    return riemann_from_omega(second_form(model, x))


def ricci_and_scalar(model: Model, x):
    """Return ``(ricci, R, ricci_closed_form, scalar_closed_form)``.

    The last two come from the closed display expressions and are kept as
    diagnostics next to the contraction-based values.
    """
    r = full_report(model, x)
    return r.ricci, r.scalar_R, r.ricci_closed_form, r.scalar_closed_form


def mean_curvature(model: Model, x) -> float:
    p = _prims(model, x)
    _, det, g_inv = _metric_from_fbar(np.array(p.fbar))
    return float(np.einsum("ij,ij->", g_inv, p.hessian_F) / np.sqrt(det))


def gauss_kronecker(model: Model, x) -> float:
    """K = det Hess F / det(g)^((n+2)/2)."""
    p = _prims(model, x)
    det = 1.0 + p.fbar @ p.fbar
    return float(np.linalg.det(p.hessian_F)) / det ** ((model.n + 2) / 2.0)


def entropy_geometric(model: Model, x):
    """Return ``(S, scalar_product_term, residual)``.

    ``scalar_product_term = sqrt(det g) X.N = F - x.fbar`` and
    ``residual = sum_a w_a (x.grad f_a - f_a)``; ``S = term + residual``.
    """
    p = _prims(model, x)
    nz = p.w[p.w > 0]
    S = float(-(nz * np.log(nz)).sum())
    term = p.F - float(p.x @ p.fbar)
    residual = float(p.w @ (p.grads @ p.x - p.values))
    return S, term, residual
