"""Ideal (affine) models: covariance structure and rank-based predicates.

For ``f_a = a_a . x + b_a`` the Hessian of F is the covariance of the
random vector taking value ``a_a`` with probability ``w_a``:
``Hess F = a^T H a`` with ``H = diag(w) - w w^T``.  H is positive
semidefinite with kernel spanned by the all-ones vector, so ``K = 0``
identically exactly when some nonzero v has ``a v`` proportional to 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DuplicateP, ModelError, NonIntegerExponent, NonPositiveY, WrongVariant
from .model import LinearModel, SuperIdealModel, gibbs_weights

__all__ = [
    "CovarianceBundle",
    "KPrediction",
    "SolitonSpec",
    "covariance_bundle",
    "predict_K_zero",
    "rank",
    "soliton_matrix",
    "algebraic_coordinates",
    "linear_scalar_curvature",
    "as_linear",
]


def as_linear(model) -> LinearModel:
    if isinstance(model, LinearModel):
        return model
    if isinstance(model, SuperIdealModel):
        return LinearModel(np.eye(model.n))
    raise WrongVariant(f"expected a linear model, got {type(model).__name__}")


@dataclass(frozen=True)
class CovarianceBundle:
    w: np.ndarray
    abar: np.ndarray
    H: np.ndarray
    aTHa: np.ndarray


def covariance_bundle(model, x) -> CovarianceBundle:
    lin = as_linear(model)
    w = gibbs_weights(lin, x)
    H = np.diag(w) - np.outer(w, w)
    aTHa = lin.a.T @ H @ lin.a
    return CovarianceBundle(w, w @ lin.a, H, 0.5 * (aTHa + aTHa.T))


def rank(matrix, tol: float = 1e-10) -> int:
    """Numeric rank by Gaussian elimination with complete pivoting.

    Elimination stops once the largest remaining entry falls below
    ``tol`` times the first (largest) pivot.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.size == 0:
        return 0
    rows, cols = a.shape
    first = None
    r = 0
    for k in range(min(rows, cols)):
        sub = np.abs(a[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        piv = sub[i, j]
        if first is None:
            first = piv
            if first == 0.0:
                return 0
        if piv <= tol * first:
            break
        i += k
        j += k
        a[[k, i], :] = a[[i, k], :]
        a[:, [k, j]] = a[:, [j, k]]
        a[k + 1 :, k:] -= np.outer(a[k + 1 :, k] / a[k, k], a[k, k:])
        r += 1
    return r


@dataclass(frozen=True)
class KPrediction:
    verdict: str  # AlwaysZero | GenericallyNonzero | ZeroOnLocus
    reason: str = ""
    witness_x0: Optional[np.ndarray] = None

    @property
    def always_zero(self) -> bool:
        return self.verdict == "AlwaysZero"

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "reason": self.reason}
        if self.witness_x0 is not None:
            out["witness_x0"] = [float(v) for v in self.witness_x0]
        return out

    def note(self) -> str:
        return f"{self.verdict}: {self.reason}" if self.reason else self.verdict


def predict_K_zero(model, tol: float = 1e-10) -> KPrediction:
    """Decide from ``a`` alone whether K vanishes identically.

    The checks run in order: ``n >= m``, then ``rank(a) < n``, then whether
    ``a x0 = 1`` has an exact solution.  An affine family never vanishes only
    on a proper locus, so ``ZeroOnLocus`` is not produced here.
    """
    lin = as_linear(model)
    a = np.asarray(lin.a)
    m, n = a.shape
    if n >= m:
        return KPrediction("AlwaysZero", "n ≥ m")
    if rank(a, tol) < n:
        return KPrediction("AlwaysZero", "rank(a) < n")
    ones = np.ones(m)
    x0, *_ = np.linalg.lstsq(a, ones, rcond=None)
    resid = np.linalg.norm(a @ x0 - ones)
    if resid < 1e-8 * max(1.0, np.abs(a).max()) * np.sqrt(m):
        return KPrediction("AlwaysZero", "a·x₀ = 1⃗ solvable", x0)
    return KPrediction("GenericallyNonzero", f"least-squares residual {resid:.3g}")


@dataclass(frozen=True)
class SolitonSpec:
    N: int
    p: Sequence[float]
    M: int = 1


def soliton_matrix(spec: SolitonSpec) -> np.ndarray:
    """Exponent matrix of the N-soliton tau function.

    Row alpha (1-based) is ``sum_l eta_l (p_l, p_l^3, ..., p_l^(2M+1))`` where
    ``eta`` is the binary expansion of ``alpha - 1`` (bit l-1 for soliton l).
    """
    p = np.asarray(spec.p, dtype=float)
    if p.size != spec.N:
        raise ModelError(f"expected {spec.N} momenta, got {p.size}")
    if np.any(p <= 0):
        raise ModelError("momenta must be positive")
    if np.unique(p).size != p.size:
        raise DuplicateP(f"momenta must be distinct, got {p.tolist()}")
    powers = p[:, None] ** (2 * np.arange(1, spec.M + 2) - 1)  # (N, M+1)
    alpha = np.arange(2**spec.N)
    eta = (alpha[:, None] >> np.arange(spec.N)) & 1  # (2^N, N)
    return eta @ powers


def algebraic_coordinates(model, y) -> float:
    """``sum_a exp(b_a) prod_i y_i^{a_ai}``, the exponential-coordinate form."""
    lin = as_linear(model)
    a = np.asarray(lin.a)
    if np.any(a < 0) or np.any(a != np.round(a)):
        raise NonIntegerExponent("all exponents a_ai must be nonnegative integers")
    y = np.asarray(y, dtype=float)
    if y.size != lin.n:
        raise ValueError(f"y has dimension {y.size}, model expects {lin.n}")
    if np.any(y <= 0):
        raise NonPositiveY("coordinates y_i must be positive")
    mono = np.prod(y[None, :] ** a.astype(int), axis=1)
    return float(np.exp(lin.b) @ mono)


def linear_scalar_curvature(model, x) -> float:
    """Scalar curvature of an affine family written out in moments of a.

    Evaluated term by term from ``abar`` and the second moment
    ``A_ik = sum_a w_a a_ai a_ak``; used as a cross-check of the contraction.
    """
    lin = as_linear(model)
    w = gibbs_weights(lin, x)
    a = np.asarray(lin.a)
    ab = w @ a
    A = np.einsum("a,ai,ak->ik", w, a, a)
    s = ab @ ab
    D = 1.0 + s
    cov = A - np.outer(ab, ab)
    first = ((np.trace(A) - s) ** 2 - np.sum(cov * cov)) / D
    second = (
        np.einsum("il,lk,i,k->", A, A, ab, ab)
        - np.trace(A) * ab @ A @ ab
        - s * (ab @ A @ ab)
    )
    third = np.trace(A) * s * s - s * (ab @ A @ ab) + s * (ab @ A @ ab)
    return float(first + 2.0 * second / D**2 + 2.0 * third / D**2)
