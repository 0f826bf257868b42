"""Model families {f_alpha} and the statistical-mapping primitives.

A model is a finite family of real functions f_1..f_m on R^n.  The mapping of
interest is the free energy ``F(x) = ln sum_a exp f_a(x)`` whose gradient and
Hessian are Gibbs-weighted averages of the derivatives of the f_a.  In the
physical reading ``f_a = -E_a / kT``.

All model classes are immutable and their methods are pure, so a single model
can be shared between threads.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ModelError, NonSmoothPoint
from .expr import Expression, eval_jet2, evaluate, parse, to_source

__all__ = [
    "Model",
    "ExpressionModel",
    "LinearModel",
    "SuperIdealModel",
    "SubsystemModel",
    "Primitives",
    "primitives",
    "free_energy",
    "gibbs_weights",
    "mean_gradient",
    "mean_second",
    "hessian_F",
    "entropy",
    "MAX_SUBSYSTEM_STATES",
]

MAX_SUBSYSTEM_STATES = 4096
WEIGHT_FLOOR = 1e-300


def _frozen_array(a, ndim):
    arr = np.array(a, dtype=float)
    if arr.ndim != ndim:
        raise ModelError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _as_point(x, n):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != n:
        raise ValueError(f"point has dimension {x.size}, model expects {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point must be finite")
    return x


class Model:
    """Common interface: ``values(x)`` and ``jets(x)``.

    ``jets`` returns ``(values (m,), gradients (m, n), hessians (m, n, n),
    nonsmooth)``.
    """

    n: int
    m: int
    kind: str = "model"

    def values(self, x) -> np.ndarray:
        raise NotImplementedError

    def jets(self, x):
        raise NotImplementedError

    def describe(self) -> dict:
        """Model-file style JSON description."""
        raise NotImplementedError

    def digest(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ExpressionModel(Model):
    """f_a given as expression strings in x1..xn.

    ``constants`` binds extra identifiers, e.g. ``{"e": 0.1}`` for a coupling.
    """

    sources: tuple
    n: int
    constants: Mapping[str, float] = field(default_factory=dict)
    exprs: tuple = field(init=False, repr=False, compare=False)
    kind = "expressions"

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("n must be >= 1")
        if len(self.sources) == 0:
            raise ModelError("at least one expression is required")
        srcs = tuple(to_source(s.root) if isinstance(s, Expression) else str(s) for s in self.sources)
        object.__setattr__(self, "sources", srcs)
        object.__setattr__(self, "constants", dict(self.constants))
        exprs = tuple(parse(s, self.n, self.constants) for s in srcs)
        object.__setattr__(self, "exprs", exprs)

    @property
    def m(self) -> int:
        return len(self.exprs)

    def with_constants(self, **values) -> "ExpressionModel":
        return ExpressionModel(self.sources, self.n, {**self.constants, **values})

    def values(self, x):
        x = _as_point(x, self.n)
        return np.array([evaluate(e, x) for e in self.exprs])

    def jets(self, x):
        x = _as_point(x, self.n)
        js = [eval_jet2(e, x) for e in self.exprs]
        vals = np.array([j.value for j in js])
        grads = np.array([j.gradient for j in js])
        hess = np.array([j.hessian for j in js])
        return vals, grads, hess, any(j.nonsmooth for j in js)

    def describe(self):
        out = {"type": "expressions", "n": self.n, "expressions": list(self.sources)}
        if self.constants:
            out["constants"] = dict(self.constants)
        return out


@dataclass(frozen=True)
class LinearModel(Model):
    """Affine family f_a = sum_i a[a, i] x_i + b[a]."""

    a: np.ndarray
    b: np.ndarray = None
    kind = "linear"

    def __post_init__(self):
        a = _frozen_array(self.a, 2)
        m, n = a.shape
        if m < 1 or n < 1:
            raise ModelError("linear model needs m >= 1 and n >= 1")
        b = np.zeros(m) if self.b is None else self.b
        b = _frozen_array(b, 1)
        if b.size != m:
            raise ModelError(f"b has length {b.size}, expected m={m}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self):
        return self.a.shape[0]

    @property
    def n(self):
        return self.a.shape[1]

    def values(self, x):
        return self.a @ _as_point(x, self.n) + self.b

    def jets(self, x):
        vals = self.values(x)
        return vals, np.array(self.a), np.zeros((self.m, self.n, self.n)), False

    def describe(self):
        return {"type": "linear", "n": self.n, "a": self.a.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True)
class SuperIdealModel(Model):
    """m = n and f_a = x_a."""

    n: int
    kind = "super-ideal"

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("n must be >= 1")

    @property
    def m(self):
        return self.n

    def values(self, x):
        return _as_point(x, self.n).copy()

    def jets(self, x):
        vals = self.values(x)
        return vals, np.eye(self.n), np.zeros((self.n, self.n, self.n)), False

    def describe(self):
        return {"type": "super-ideal", "n": self.n}


@dataclass(frozen=True)
class SubsystemModel(Model):
    """P interacting subsystems with q_p levels each.

    The coordinates are the concatenated level energies ``x^1 (q_1 values),
    ..., x^P``.  One state per level choice s = (s_1..s_P), with exponent
    ``sum_p c_p x^p_{s_p} + epsilon * gamma(x^1_{s_1}, ..., x^P_{s_P})``.
    """

    q: tuple
    c: tuple
    gamma: str
    epsilon: float = 0.0
    _gamma: Expression = field(init=False, repr=False, compare=False)
    _states: np.ndarray = field(init=False, repr=False, compare=False)
    kind = "subsystems"

    def __post_init__(self):
        q = tuple(int(v) for v in self.q)
        c = tuple(float(v) for v in self.c)
        if len(q) < 1:
            raise ModelError("at least one subsystem is required")
        if any(v < 1 for v in q):
            raise ModelError("subsystem sizes must be positive")
        if len(c) != len(q):
            raise ModelError(f"c has length {len(c)}, expected P={len(q)}")
        m = int(np.prod(q))
        if m > MAX_SUBSYSTEM_STATES:
            raise ModelError(f"{m} states exceed the enumeration cap of {MAX_SUBSYSTEM_STATES}")
        gsrc = to_source(self.gamma.root) if isinstance(self.gamma, Expression) else str(self.gamma)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "gamma", gsrc)
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "_gamma", parse(gsrc, len(q)))
        offsets = np.cumsum((0,) + q[:-1])
        states = np.array([offsets + np.array(s) for s in itertools.product(*(range(v) for v in q))])
        states.setflags(write=False)
        object.__setattr__(self, "_states", states)

    @property
    def P(self):
        return len(self.q)

    @property
    def n(self):
        return int(sum(self.q))

    @property
    def m(self):
        return self._states.shape[0]

    @property
    def states(self) -> np.ndarray:
        """(m, P) array of global coordinate indices picked by each state."""
        return self._states

    def blocks(self):
        """Coordinate index ranges of the subsystems."""
        start = 0
        out = []
        for v in self.q:
            out.append(range(start, start + v))
            start += v
        return out

    def with_epsilon(self, epsilon: float) -> "SubsystemModel":
        return SubsystemModel(self.q, self.c, self.gamma, epsilon)

    def values(self, x):
        x = _as_point(x, self.n)
        c = np.array(self.c)
        out = (x[self._states] * c).sum(axis=1)
        if self.epsilon != 0.0:
            out = out + self.epsilon * np.array([evaluate(self._gamma, x[s]) for s in self._states])
        return out

    def jets(self, x):
        x = _as_point(x, self.n)
        m, n = self.m, self.n
        c = np.array(self.c)
        vals = (x[self._states] * c).sum(axis=1)
        grads = np.zeros((m, n))
        hess = np.zeros((m, n, n))
        rows = np.arange(m)[:, None]
        grads[rows, self._states] = c
        nonsmooth = False
        if self.epsilon != 0.0:
            for a, s in enumerate(self._states):
                j = eval_jet2(self._gamma, x[s])
                nonsmooth |= j.nonsmooth
                vals[a] += self.epsilon * j.value
                np.add.at(grads[a], s, self.epsilon * j.gradient)
                np.add.at(hess[a], np.ix_(s, s), self.epsilon * j.hessian)
        return vals, grads, hess, nonsmooth

    def describe(self):
        return {
            "type": "subsystems",
            "n": self.n,
            "P": self.P,
            "q": list(self.q),
            "c": list(self.c),
            "gamma": self.gamma,
            "epsilon": self.epsilon,
        }


# --------------------------------------------------------------------------
# primitives


def _softmax(vals):
    top = np.max(vals)
    z = np.exp(vals - top)
    total = z.sum()
    return top + np.log(total), z / total


def _flush(w):
    if np.any(w < WEIGHT_FLOOR):
        w = np.where(w < WEIGHT_FLOOR, 0.0, w)
        w = w / w.sum()
    return w


@dataclass(frozen=True)
class Primitives:
    """Everything the geometric formulas consume at one point."""

    x: np.ndarray
    F: float
    w: np.ndarray
    values: np.ndarray
    grads: np.ndarray
    hess: np.ndarray
    fbar: np.ndarray
    fbar2: np.ndarray

    @property
    def hessian_F(self) -> np.ndarray:
        h = self.fbar2 - np.outer(self.fbar, self.fbar)
        return 0.5 * (h + h.T)


def primitives(model: Model, x, weights=None) -> Primitives:
    """Weights, mean gradient and second moment in one pass.

    ``weights`` overrides the Gibbs weights (used to hold them fixed while
    other ingredients vary).
    """
    x = _as_point(x, model.n)
    vals, grads, hess, nonsmooth = model.jets(x)
    if nonsmooth or not (np.all(np.isfinite(grads)) and np.all(np.isfinite(hess))):
        raise NonSmoothPoint(f"model is not twice differentiable at x={x.tolist()}")
    F, w = _softmax(vals)
    w = _flush(w)
    if weights is not None:
        w = np.asarray(weights, dtype=float)
    fbar = w @ grads
    second = np.einsum("a,aik->ik", w, hess) + np.einsum("a,ai,ak->ik", w, grads, grads)
    second = 0.5 * (second + second.T)
    for arr in (vals, grads, hess, fbar, second):
        arr.setflags(write=False)
    return Primitives(x, float(F), w, vals, grads, hess, fbar, second)


def free_energy(model: Model, x) -> float:
    """ln sum exp f_a, shifted by the max so large exponents do not overflow."""
    F, _ = _softmax(model.values(x))
    return float(F)


def gibbs_weights(model: Model, x) -> np.ndarray:
    _, w = _softmax(model.values(x))
    return _flush(w)


def mean_gradient(model: Model, x) -> np.ndarray:
    return np.array(primitives(model, x).fbar)


def mean_second(model: Model, x) -> np.ndarray:
    return np.array(primitives(model, x).fbar2)


def hessian_F(model: Model, x) -> np.ndarray:
    return primitives(model, x).hessian_F


def _shannon(w):
    nz = w[w > 0]
    return float(-(nz * np.log(nz)).sum())


def entropy(model: Model, x) -> float:
    """Shannon entropy of the Gibbs weights, with 0 ln 0 = 0."""
    return _shannon(gibbs_weights(model, x))


def from_description(desc: Mapping) -> Model:
    """Inverse of ``Model.describe`` for already validated dictionaries."""
    kind = desc["type"]
    if kind == "expressions":
        return ExpressionModel(tuple(desc["expressions"]), int(desc["n"]), desc.get("constants", {}))
    if kind == "linear":
        return LinearModel(desc["a"], desc.get("b"))
    if kind == "super-ideal":
        return SuperIdealModel(int(desc["n"]))
    if kind == "subsystems":
        return SubsystemModel(tuple(desc["q"]), tuple(desc["c"]), desc["gamma"], desc.get("epsilon", 0.0))
    raise ModelError(f"unknown model type {kind!r}")


def expression_model(sources: Sequence[str], n: int, **constants) -> ExpressionModel:
    return ExpressionModel(tuple(sources), n, constants)
