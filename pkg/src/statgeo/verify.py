"""Seeded verification suites.

Each suite returns a JSON-ready dict ``{"suite", "pass", "checks"}`` where
every check carries its own ``pass`` flag and the numbers behind it.  The
random stream of a suite depends only on ``(seed, suite name)``, so suites
can run alone or together with identical results.
"""

from __future__ import annotations

import zlib
from typing import Callable, Optional

import numpy as np

from . import geometry as geo
from .errors import StatGeoError
from .ideal import rank
from .model import ExpressionModel, LinearModel, SubsystemModel, SuperIdealModel, entropy, free_energy, primitives
from .oracles import riemann_from_metric, sample_simplex
from .perturb import (
    EpsilonFamily,
    blockdet_first_order,
    epsilon_series,
    example2_analytic,
    example2_first_order,
    example2_model,
    example2_second_order_K,
    verify_prop3,
)
from .singular import builtin_example, classify
from .superideal import e0_identities, verify_prop2
from . import tropical as trop

__all__ = ["SUITES", "run_suite", "run_all", "random_smooth_model"]

DEFAULT_SAMPLES = 10_000


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


class _Checks:
    def __init__(self, name):
        self.name = name
        self.items = []

    def add(self, check: str, ok: bool, **data):
        self.items.append({"check": check, "pass": bool(ok), **data})
        return ok

    def report(self) -> dict:
        return {
            "suite": self.name,
            "pass": all(c["pass"] for c in self.items),
            "checks": self.items,
        }


def random_smooth_model(rng: np.random.Generator, n: int, m: int) -> ExpressionModel:
    """Random expression family mixing linear, bilinear, sin and exp terms."""
    sources = []
    for _ in range(m):
        c = rng.normal(size=n)
        i, j, k = rng.integers(0, n, size=3)
        a, b, s = rng.uniform(-0.8, 0.8, size=3)
        terms = [f"{c[t]:.6f}*x{t + 1}" for t in range(n)]
        terms.append(f"{a:.6f}*x{i + 1}*x{j + 1}")
        terms.append(f"{b:.6f}*sin(x{k + 1})")
        terms.append(f"{s:.6f}*exp(0.5*x{(k + 1) % n + 1})")
        sources.append(" + ".join(terms))
    return ExpressionModel(tuple(sources), n)


# --------------------------------------------------------------------------


def suite_prop1(seed: int, samples: Optional[int] = None) -> dict:
    rng = _rng(seed, "prop1")
    ck = _Checks("prop1")
    count = 100
    for m in range(2, 9):
        W = sample_simplex(rng, m, count)
        W = np.clip(W, 1e-6, None)
        W /= W.sum(axis=1, keepdims=True)
        ranks, min_eig, row_sum = [], np.inf, 0.0
        for w in W:
            H = np.diag(w) - np.outer(w, w)
            ranks.append(rank(H))
            min_eig = min(min_eig, float(np.linalg.eigvalsh(H).min()))
            row_sum = max(row_sum, float(np.abs(H.sum(axis=1)).max()))
        ck.add(f"rank_H_m{m}", all(r == m - 1 for r in ranks), m=m, ranks=sorted(set(ranks)))
        ck.add(f"psd_H_m{m}", min_eig >= -1e-12, m=m, min_eigenvalue=min_eig)
        ck.add(f"null_vector_m{m}", row_sum <= 1e-14, m=m, max_row_sum=row_sum)
    worst = 0
    for _ in range(100):
        m, n = (int(v) for v in rng.integers(1, 7, size=2))
        a = rng.normal(size=(m, n))
        x = rng.normal(size=n)
        H = primitives(LinearModel(a), x).hessian_F
        worst = max(worst, rank(H) - min(n, m - 1))
    ck.add("rank_aTHa_bound", worst <= 0, max_excess=int(worst))
    return ck.report()


def suite_prop2(seed: int, samples: Optional[int] = None) -> dict:
    rng = _rng(seed, "prop2")
    ck = _Checks("prop2")
    samples = DEFAULT_SAMPLES if samples is None else samples
    for n in (2, 3, 5):
        rep = verify_prop2(n, samples, rng)
        ck.add(f"bounds_n{n}", not rep["violations"], **rep)
    r3 = geo.full_report(SuperIdealModel(3), np.zeros(3))
    ck.add("e0_n3_scalar", abs(r3.scalar_R - 1 / 6) <= 1e-10, value=r3.scalar_R, expected=1 / 6)
    ck.add("e0_n3_mean", abs(r3.mean_H - 2 / np.sqrt(12)) <= 1e-10, value=r3.mean_H, expected=2 / np.sqrt(12))
    for n in range(2, 7):
        r = geo.full_report(SuperIdealModel(n), np.zeros(n))
        a, b = np.sqrt(r.det_g) * r.mean_H, r.det_g * r.scalar_R
        ea, eb = (n - 1) / n, (n - 1) * (n - 2) / n**2
        ok = abs(a - ea) <= 1e-10 and abs(b - eb) <= 1e-10
        try:
            e0_identities(n)
        except StatGeoError:
            ok = False
        ck.add(f"e0_identities_n{n}", ok, sqrt_detg_mean=float(a), detg_R=float(b))
    return ck.report()


_GAMMAS = {
    2: ("x1*x2", "sin(x1 + x2)", "x1^2*x2", "exp(0.3*x1*x2)"),
    3: ("x1*x2*x3", "x1*x2 + x2*x3", "sin(x1)*x2*x3", "cos(x1 - x3)*x2"),
}


def suite_prop3(seed: int, samples: Optional[int] = None) -> dict:
    rng = _rng(seed, "prop3")
    ck = _Checks("prop3")
    for k in range(5):
        P = int(rng.integers(2, 4))
        gamma = _GAMMAS[P][int(rng.integers(len(_GAMMAS[P])))]
        c = tuple(float(v) for v in np.round(rng.uniform(0.5, 1.5, P), 6))
        model = SubsystemModel((2,) * P, c, gamma)
        x = rng.normal(scale=0.5, size=model.n)
        rep = verify_prop3(model, x)
        rel = abs(rep["c1_K"]) / max(1.0, abs(rep["c2_K"]))
        ck.add(f"c1_K_instance{k}", rel < 1e-6, P=P, gamma=gamma, c=list(c), c1_K=rep["c1_K"],
               c2_K=rep["c2_K"], relative=rel)
        block = blockdet_first_order(model, x)
        ck.add(f"block_sum_instance{k}", abs(block) < 1e-10, block_sum=block)

    # the worked example with two states
    worst_det = worst_K = 0.0
    for _ in range(50):
        x = rng.normal(size=3)
        eps = float(rng.uniform(-1.0, 1.0))
        ref = example2_analytic(x, eps)
        r = geo.full_report(example2_model(eps), x)
        worst_det = max(worst_det, abs(r.det_g - ref["det_g"]))
        worst_K = max(worst_K, abs(r.gauss_kronecker_K - ref["K"]))
    ck.add("example_closed_forms", max(worst_det, worst_K) <= 1e-10, max_det_g_error=worst_det,
           max_K_error=worst_K)
    worst = 0.0
    fam = EpsilonFamily.from_expressions(example2_model(0.0).sources, 3, quantity="det_g", frozen_weights=True)
    for _ in range(10):
        x = rng.normal(size=3)
        c1 = epsilon_series(fam, x).c1
        worst = max(worst, abs(c1 - example2_first_order(x)["det_g"]))
    ck.add("example_first_order_det_g", worst <= 1e-6, max_error=worst)
    fam_K = EpsilonFamily.from_expressions(example2_model(0.0).sources, 3, quantity="K")
    x = np.array([float(rng.normal()), 0.0, 0.0])
    est = epsilon_series(fam_K, x)
    expected = -8 / 10**2.5
    ck.add("example_second_order_K", abs(est.c2 - expected) <= 1e-6 and abs(est.c1) <= 1e-6,
           c1=est.c1, c2=est.c2, closed_form=example2_second_order_K(x), expected=expected)
    return ck.report()


def suite_gauss(seed: int, samples: Optional[int] = None) -> dict:
    rng = _rng(seed, "gauss")
    ck = _Checks("gauss")
    # K vanishes identically for translation-degenerate families
    worst = 0.0
    for n in range(2, 7):
        model = SuperIdealModel(n)
        for _ in range(100):
            worst = max(worst, abs(geo.gauss_kronecker(model, rng.normal(scale=2.0, size=n))))
    ck.add("K_zero_super_ideal", worst <= 1e-12, max_abs_K=worst)
    worst = 0.0
    for _ in range(20):
        m = int(rng.integers(1, 5))
        n = int(rng.integers(m, 6))
        model = LinearModel(rng.normal(size=(m, n)), rng.normal(size=m))
        for _ in range(5):
            worst = max(worst, abs(geo.gauss_kronecker(model, rng.normal(size=n))))
    ck.add("K_zero_linear_n_ge_m", worst <= 1e-12, max_abs_K=worst)

    # product-form Riemann against Riemann-from-metric
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(2, 5))
        model = random_smooth_model(rng, n, int(rng.integers(2, 5)))
        x = rng.normal(scale=0.5, size=n)
        oracle = riemann_from_metric(lambda y: geo.metric(model, y)[0], x)
        worst = max(worst, float(np.abs(oracle - geo.riemann(model, x)).max()))
    ck.add("gauss_equation", worst <= 1e-4, max_abs_error=worst)

    # entropy identities
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        model = random_smooth_model(rng, n, int(rng.integers(1, 5)))
        x = rng.normal(size=n)
        p = primitives(model, x)
        worst = max(worst, abs(entropy(model, x) - (free_energy(model, x) - p.w @ p.values)))
    ck.add("entropy_identity", worst <= 1e-12, max_abs_error=worst)
    worst = 0.0
    for k in range(50):
        n = int(rng.integers(2, 6))
        if k % 2:
            model = SuperIdealModel(n)
        else:
            model = LinearModel(rng.normal(size=(int(rng.integers(1, 6)), n)))
        S, term, _ = geo.entropy_geometric(model, rng.normal(size=n))
        worst = max(worst, abs(S - term))
    ck.add("entropy_scalar_product", worst <= 1e-10, max_abs_error=worst)
    return ck.report()


def suite_tropical(seed: int, samples: Optional[int] = None) -> dict:
    rng = _rng(seed, "tropical")
    ck = _Checks("tropical")
    lams = (10.0, 20.0, 40.0)
    for n in (2, 3, 5):
        x = rng.normal(size=n)
        t = trop.lambda_sweep(SuperIdealModel(n), x, 1.0, lams, "F")
        bound = np.log(n) / t.lambdas
        ck.add(f"value_gap_n{n}", bool(np.all(t.gaps <= bound)), gaps=t.gaps.tolist(), bounds=bound.tolist())

    si2 = SuperIdealModel(2)
    g40 = trop.lambda_sweep(si2, [1.0, 1.0], 1.0, lams, "g")
    o40 = trop.lambda_sweep(si2, [1.0, 1.0], 1.0, lams, "omega")
    g_edge = np.array([[1.25, 0.25], [0.25, 1.25]])
    o_edge = np.array([[1.0, -1.0], [-1.0, 1.0]]) / np.sqrt(24.0)
    eg = float(np.abs(g40.normalized[-1] - g_edge).max())
    eo = float(np.abs(o40.normalized[-1] - o_edge).max())
    ck.add("edge_metric", eg <= 1e-6, max_abs_error=eg)
    ck.add("edge_second_form", eo <= 1e-6, max_abs_error=eo)
    worst = 0.0
    for r in range(2, 7):
        cf = trop.r_edge_curvatures(r)
        si = SuperIdealModel(r + 1)
        pt = trop.tropical_eval(si, np.r_[np.ones(r), 0.0])
        tt = trop.tropical_tensors_uniform(si, pt)
        worst = max(worst, abs(tt["mean_H"] - cf["mean_H"]), abs(tt["scalar_R"] - cf["scalar_R"]),
                    abs(tt["S"] - np.log(r)))
    ck.add("r_edge_curvatures", worst <= 1e-12, max_abs_error=worst)

    # the quadratic example on the cell where x1 x2 wins
    eps = 1.0
    xs = np.array([1.0, 2.0, 1.0])
    model = example2_model(eps)
    x1, x2 = xs[0], xs[1]
    s = x1**2 + x2**2
    want = {
        "g": eps**2 * np.array([[x2**2, x1 * x2, 0], [x1 * x2, x1**2, 0], [0, 0, 0]]),
        "omega": np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]]) / np.sqrt(s),
        "riemann": _v1_riemann(s),
        "K": np.array(0.0),
    }
    ext_lams = (16.0, 32.0, 64.0, 128.0, 256.0)
    for q, target in want.items():
        t = trop.lambda_sweep(model, xs, None, ext_lams, q)
        err = float(np.abs(t.extrapolated - target).max())
        ck.add(f"worked_example_{q}", err <= 1e-6, extrapolated_error=err, last_gap=float(t.gaps[-1]))
    t = trop.lambda_sweep(model, xs, None, (8.0, 16.0, 32.0), "g12")
    ck.add("worked_example_g12_decay", bool(np.all(np.diff(t.gaps) < 0)) and t.order > 0.5,
           gaps=t.gaps.tolist(), order=t.order)

    worst = 0.0
    for _ in range(10):
        grad = rng.normal(size=3)
        hess = rng.normal(size=(3, 3))
        hess = hess + hess.T
        a = trop.regular_cell_tensors(grad, hess, 2.0)
        b = trop.singular_cell_tensors(grad[None, :], 2.0, phi=hess)
        for key in ("g", "det_g", "christoffel", "omega", "riemann", "K"):
            worst = max(worst, float(np.max(np.abs(np.asarray(a[key]) - np.asarray(b[key])))))
    ck.add("r1_reduction", worst <= 1e-12, max_abs_error=worst)
    return ck.report()


def _v1_riemann(s: float) -> np.ndarray:
    R = np.zeros((3, 3, 3, 3))
    # R[i, k, l, j], 0-based
    R[1, 0, 0, 1] = R[0, 1, 1, 0] = 1.0 / s
    R[1, 0, 1, 0] = R[0, 1, 0, 1] = -1.0 / s
    return R


def suite_singular(seed: int, samples: Optional[int] = None) -> dict:
    ck = _Checks("singular")
    expect = {
        "1": (1, "visible"),
        "2": (1, "hidden"),
        "3a": (2, "visible"),
        "3b": (1, "hidden"),
        "3c": (2, "visible"),
    }
    cases = [(k, {}, v) for k, v in expect.items()] + [("3a", {"hess_zero": True}, (2, "hidden"))]
    for key, params, (order, vis) in cases:
        label = key + ("_hess_zero" if params else "")
        events = []
        for depth in (8, 16):
            spec = builtin_example(key, depth=depth, **params)
            events.append(classify(spec, spec.exclude[0]))
        ev, ev2 = events
        K = ev.quantities["K"]
        stable = (ev.order, ev.visibility, K.kind) == (ev2.order, ev2.visibility, ev2.quantities["K"].kind)
        ok = ev.order == order and ev.visibility == vis and stable
        data = {"order": ev.order, "visibility": ev.visibility, "K": K.kind, "stable": stable}
        if key in ("1", "3c"):
            ok = ok and K.kind == "blowup"
        if key == "2":
            ok = ok and K.kind == "continuous" and abs(K.left) < 1e-6 and abs(K.right) < 1e-6
        if key == "3b":
            expo = [e for e in (K.left_exponent, K.right_exponent) if e is not None]
            data["K_exponents"] = expo
            ok = ok and bool(expo) and all(abs(e - 5.0 / 3.0) <= 0.1 for e in expo)
        ck.add(f"example_{label}", ok, **data)
    return ck.report()


SUITES: dict = {
    "prop1": suite_prop1,
    "prop2": suite_prop2,
    "prop3": suite_prop3,
    "gauss": suite_gauss,
    "tropical": suite_tropical,
    "singular": suite_singular,
}


def run_suite(name: str, seed: int = 7, samples: Optional[int] = None) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    return SUITES[name](seed, samples)


def run_all(seed: int = 7, samples: Optional[int] = None, mapper: Callable = map) -> dict:
    """Every suite, in a fixed order; ``mapper`` may be a pool's ``map``."""
    names = list(SUITES)
    reports = list(mapper(lambda n: run_suite(n, seed, samples), names))
    return {
        "suite": "all",
        "seed": seed,
        "pass": all(r["pass"] for r in reports),
        "suites": dict(zip(names, reports)),
    }
