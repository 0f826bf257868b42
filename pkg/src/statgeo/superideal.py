"""Closed forms for the super-ideal family f_i = x_i.

Every tensor is an algebraic function of the Gibbs weights w, and the
curvature scalars depend on w only through the power sums
``S_p = sum_i w_i^p``:

    R = 2 (1 + S4) / (1 + S2)^2 - 1,    H = (1 - S3) / (1 + S2)^(3/2),    K = 0.

``verify_prop2`` samples the simplex uniformly and checks the bounds
``0 <= H <= (n-1)/sqrt(n(n+1))`` and ``0 <= R <= (n-1)(n-2)/(n(n+1))``
together with the algebraic identities used to establish them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundViolation
from .oracles import sample_simplex

__all__ = [
    "PowerSums",
    "SuperIdealForms",
    "closed_forms",
    "scalar_from_power_sums",
    "mean_from_power_sums",
    "R_hat",
    "bounds",
    "verify_prop2",
    "e0_identities",
]

SLACK = 1e-12


@dataclass(frozen=True)
class PowerSums:
    S1: float
    S2: float
    S3: float
    S4: float

    @classmethod
    def of(cls, w) -> "PowerSums":
        w = np.asarray(w, dtype=float)
        return cls(*(float(np.sum(w**p)) for p in (1, 2, 3, 4)))

    def __getitem__(self, p: int) -> float:
        return (self.S1, self.S2, self.S3, self.S4)[p - 1]


@dataclass(frozen=True)
class SuperIdealForms:
    w: np.ndarray
    S: PowerSums
    g: np.ndarray
    det_g: float
    omega: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar_R: float
    mean_H: float
    gauss_kronecker_K: float

    def entropy(self, x) -> float:
        """``x_{n+1} - sum_i w_i x_i`` at a point x with these weights."""
        x = np.asarray(x, dtype=float)
        top = x.max()
        F = top + np.log(np.exp(x - top).sum())
        return float(F - self.w @ x)


def scalar_from_power_sums(S2, S4):
    return 2.0 * (1.0 + S4) / (1.0 + S2) ** 2 - 1.0


def mean_from_power_sums(S2, S3):
    return (1.0 - S3) / (1.0 + S2) ** 1.5


def R_hat(w):
    """Numerator ``2 S4 + 2 - (1 + S2)^2`` of the scalar curvature; vectorized."""
    w = np.asarray(w, dtype=float)
    S2 = np.sum(w**2, axis=-1)
    S4 = np.sum(w**4, axis=-1)
    return 2.0 * S4 + 2.0 - (1.0 + S2) ** 2


def bounds(n: int):
    """Upper bounds ``(mean, scalar)`` over the simplex, both attained at e0."""
    return (n - 1) / np.sqrt(n * (n + 1.0)), (n - 1) * (n - 2) / (n * (n + 1.0))


def closed_forms(w) -> SuperIdealForms:
    w = np.asarray(w, dtype=float)
    n = w.size
    S = PowerSums.of(w)
    d = np.eye(n)
    ww = np.outer(w, w)
    D = 1.0 + S.S2
    omega = (np.diag(w) - ww) / np.sqrt(D)
    # R_sijk written out term by term
    wi = w[None, :, None, None]
    wj = w[None, None, :, None]
    wk = w[None, None, None, :]
    ws = w[:, None, None, None]
    d_js = np.einsum("sj->sj", d)[:, None, :, None]
    d_ik = d[None, :, None, :]
    d_ks = d[:, None, None, :]
    d_ij = d[None, :, :, None]
    riem = (
        d_js * d_ik * wi * wj
        - d_js * wi * wj * wk
        - d_ks * d_ij * wi * wk
        + d_ks * wi * wj * wk
        + d_ij * wi * wk * ws
        - d_ik * wi * wj * ws
    ) / D
    one_w = 1.0 + w
    ricci = -(
        (D * (1.0 + d) - np.outer(one_w, one_w)) * ww + (S.S3 - 1.0) * (np.diag(w) - ww)
    ) / D**2
    return SuperIdealForms(
        w=w,
        S=S,
        g=d + ww,
        det_g=D,
        omega=omega,
        riemann=riem,
        ricci=ricci,
        scalar_R=scalar_from_power_sums(S.S2, S.S4),
        mean_H=mean_from_power_sums(S.S2, S.S3),
        gauss_kronecker_K=0.0,
    )


def _merge_gap(W, i):
    # R_hat(W) - R_hat(W with w_i folded into w_1), and its closed form
    merged = W.copy()
    merged[:, 0] += merged[:, i]
    merged[:, i] = 0.0
    gap = R_hat(W) - R_hat(merged)
    others = np.delete(W, [0, i], axis=1)
    closed = 4.0 * W[:, 0] * W[:, i] * (1.0 - (W[:, 0] + W[:, i]) ** 2 + np.sum(others**2, axis=1))
    return gap, closed


def _midpoint(W, i, j):
    mid = W.copy()
    avg = 0.5 * (W[:, i] + W[:, j])
    mid[:, i] = avg
    mid[:, j] = avg
    return mid


def _scalar_rows(W):
    return scalar_from_power_sums(np.sum(W**2, axis=1), np.sum(W**4, axis=1))


def verify_prop2(n: int, samples: int, rng: np.random.Generator, *, raise_on_violation: bool = False) -> dict:
    """Check the mean/scalar bounds and their supporting inequalities.

    Returns a JSON-ready report.  Violations are collected with the offending
    weight vector; ``raise_on_violation`` turns the first one into a
    :class:`BoundViolation`.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    W = sample_simplex(rng, n, samples)
    S2 = np.sum(W**2, axis=1)
    S3 = np.sum(W**3, axis=1)
    S4 = np.sum(W**4, axis=1)
    H = mean_from_power_sums(S2, S3)
    R = scalar_from_power_sums(S2, S4)
    bH, bR = bounds(n)
    violations = []

    def flag(name, mask):
        for idx in np.flatnonzero(mask)[: max(0, 10 - len(violations))]:
            violations.append({"check": name, "w": [float(v) for v in W[idx]]})

    for p, Sp in ((2, S2), (3, S3), (4, S4)):
        flag(f"holder_S{p}", Sp < n ** (1.0 - p) - SLACK)
    flag("mean_lower", H < -SLACK)
    flag("mean_upper", H > bH + SLACK)
    flag("scalar_lower", R < -SLACK)
    flag("scalar_upper", R > bR + SLACK)
    flag("R_hat_nonnegative", R_hat(W) < -SLACK)

    # fold weights into w_1 one at a time; every fold must lower R_hat
    chain = W.copy()
    for i in range(n - 1, 0, -1):
        gap, closed = _merge_gap(chain, i)
        flag("merge_identity", np.abs(gap - closed) > 1e-12)
        flag("merge_inequality", gap < -SLACK)
        chain[:, 0] += chain[:, i]
        chain[:, i] = 0.0
    flag("chain_endpoint", np.abs(R_hat(chain)) > 1e-12)

    for i in range(n):
        for j in range(i + 1, n):
            mid = _midpoint(W, i, j)
            others = np.delete(W, [i, j], axis=1)
            closed = (W[:, i] - W[:, j]) ** 2 * (
                1.0 - (W[:, i] + W[:, j]) ** 2 + np.sum(others**2, axis=1)
            )
            flag("midpoint_identity", np.abs(R_hat(mid) - R_hat(W) - closed) > 1e-12)
            flag("midpoint_scalar", _scalar_rows(mid) < R - SLACK)

    e0 = closed_forms(np.full(n, 1.0 / n))
    if abs(e0.mean_H - bH) > 1e-12 or abs(e0.scalar_R - bR) > 1e-12:
        violations.append({"check": "e0_attains_bounds", "w": e0.w.tolist()})

    if violations and raise_on_violation:
        raise BoundViolation(f"{violations[0]['check']} violated", violations[0]["w"])
    return {
        "n": n,
        "samples": samples,
        "max_mean": float(H.max()),
        "max_scalar": float(R.max()),
        "min_mean": float(H.min()),
        "min_scalar": float(R.min()),
        "bound_mean": float(bH),
        "bound_scalar": float(bR),
        "e0_mean": float(e0.mean_H),
        "e0_scalar": float(e0.scalar_R),
        "violations": violations,
    }


def e0_identities(n: int) -> dict:
    """``sqrt(det g) H`` and ``det g R`` at the barycentre, checked exactly."""
    if n < 1:
        raise ValueError("n must be >= 1")
    f = closed_forms(np.full(n, 1.0 / n))
    a = float(np.sqrt(f.det_g) * f.mean_H)
    b = float(f.det_g * f.scalar_R)
    ea, eb = (n - 1) / n, (n - 1) * (n - 2) / n**2
    if abs(a - ea) > 1e-14 or abs(b - eb) > 1e-14:
        raise BoundViolation(f"e0 identities off: got ({a}, {b}), expected ({ea}, {eb})", f.w)
    return {"sqrt_detg_mean": a, "detg_R": b}
