"""Independent numerical oracles.

These deliberately share no code with the analytic pipeline: derivatives
come from central finite differences of black-box callables, curvature from
the coordinate formulas of Riemannian geometry applied to a differenced
metric.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .expr import Jet2

__all__ = [
    "fd_gradient",
    "fd_jet2",
    "christoffel_from_metric",
    "riemann_from_metric",
    "sample_simplex",
    "fit_power_law",
]


def _grad_once(f, x, h):
    n = x.size
    out = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return out


def _hess_once(f, x, h, f0):
    n = x.size
    out = np.empty((n, n))
    eye = np.eye(n) * h
    for i in range(n):
        out[i, i] = (f(x + eye[i]) - 2.0 * f0 + f(x - eye[i])) / (h * h)
        for j in range(i + 1, n):
            v = (
                f(x + eye[i] + eye[j])
                - f(x + eye[i] - eye[j])
                - f(x - eye[i] + eye[j])
                + f(x - eye[i] - eye[j])
            ) / (4.0 * h * h)
            out[i, j] = out[j, i] = v
    return out


def fd_gradient(f: Callable, x, h: float = 1e-4) -> np.ndarray:
    """Central-difference gradient, Richardson-combined over {h, h/2}.

    ``f`` may return an array; the derivative axis is then prepended.
    """
    x = np.asarray(x, dtype=float)
    fx = np.asarray(f(x), dtype=float)
    n = x.size
    out = np.empty((n,) + fx.shape)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0

        def d(step):
            return (np.asarray(f(x + step * e)) - np.asarray(f(x - step * e))) / (2.0 * step)

        out[i] = (4.0 * d(h / 2.0) - d(h)) / 3.0
    return out


def fd_jet2(f: Callable[[np.ndarray], float], x, h: float = 1e-4) -> Jet2:
    """Value, gradient and Hessian of a scalar black box by central differences.

    Both derivative orders are Richardson-extrapolated from steps h and h/2.
    The stencil must avoid kinks; nothing is smoothed on the caller's behalf.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    f0 = float(f(x))
    g = (4.0 * _grad_once(f, x, h / 2.0) - _grad_once(f, x, h)) / 3.0
    H = (4.0 * _hess_once(f, x, h / 2.0, f0) - _hess_once(f, x, h, f0)) / 3.0
    return Jet2(f0, g, 0.5 * (H + H.T))


def christoffel_from_metric(gfun: Callable, x, h: float = 1e-4) -> np.ndarray:
    """Levi-Civita symbols Gamma[k, i, j] from a differenced metric.

    ``Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)``.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(gfun(x), dtype=float)
    dg = fd_gradient(gfun, x, h)  # dg[l, i, j] = d_l g_ij
    first = 0.5 * (
        np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    )  # first[l, i, j] = Gamma_{l ij}
    return np.einsum("kl,lij->kij", np.linalg.inv(g), first)


def riemann_from_metric(gfun: Callable, x, h: float = 1e-4) -> np.ndarray:
    """Fully covariant Riemann tensor R_abcd from a metric callable.

    ``R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db
    - Gamma^a_de Gamma^e_cb`` and ``R_abcd = g_ae R^e_bcd``, so that for a
    hypersurface ``R_abcd = O_ac O_bd - O_ad O_bc``.
    """
    x = np.asarray(x, dtype=float)
    gam = christoffel_from_metric(gfun, x, h)
    dgam = fd_gradient(lambda y: christoffel_from_metric(gfun, y, h), x, h)  # [c, a, i, j]
    up = (
        np.einsum("cadb->abcd", dgam)
        - np.einsum("dacb->abcd", dgam)
        + np.einsum("ace,edb->abcd", gam, gam)
        - np.einsum("ade,ecb->abcd", gam, gam)
    )
    return np.einsum("ae,ebcd->abcd", np.asarray(gfun(x), dtype=float), up)


def sample_simplex(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Uniform points on the (n-1)-simplex via normalized exponential spacings."""
    e = rng.exponential(size=(size, n))
    return e / e.sum(axis=1, keepdims=True)


def fit_power_law(h, values) -> float:
    """Least-squares slope of ln|value| against ln h."""
    lh = np.log(np.asarray(h, dtype=float))
    lv = np.log(np.abs(np.asarray(values, dtype=float)))
    slope, _ = np.polyfit(lh, lv, 1)
    return float(slope)
