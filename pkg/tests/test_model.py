import numpy as np
import pytest

from statgeo.errors import ModelError, NonSmoothPoint
from statgeo.model import (
    ExpressionModel,
    LinearModel,
    SubsystemModel,
    SuperIdealModel,
    entropy,
    free_energy,
    from_description,
    gibbs_weights,
    hessian_F,
    mean_gradient,
    primitives,
)
from statgeo.oracles import fd_jet2


def test_free_energy_is_stable_for_huge_exponents():
    m = SuperIdealModel(3)
    F = free_energy(m, [1000.0, 1000.0, 1000.0])
    assert F == pytest.approx(1000.0 + np.log(3))
    assert np.isfinite(free_energy(m, [-800.0, 900.0, 0.0]))


def test_tiny_weights_are_flushed():
    w = gibbs_weights(SuperIdealModel(2), [0.0, 800.0])
    assert w[0] == 0.0 and w[1] == 1.0


def test_weights_sum_to_one(rng):
    m = LinearModel(rng.normal(size=(5, 3)), rng.normal(size=5))
    for _ in range(10):
        assert gibbs_weights(m, rng.normal(size=3)).sum() == pytest.approx(1.0)


def test_gradient_and_hessian_of_F_match_finite_differences(rng):
    m = ExpressionModel(("x1*x2", "sin(x1) + x2^2", "exp(0.3*x1) - x2"), 2)
    for _ in range(5):
        x = rng.normal(size=2)
        ref = fd_jet2(lambda y: free_energy(m, y), x, h=1e-3)
        np.testing.assert_allclose(mean_gradient(m, x), ref.gradient, rtol=1e-6, atol=1e-8)
        np.testing.assert_allclose(hessian_F(m, x), ref.hessian, rtol=1e-6, atol=1e-7)


def test_entropy_uniform():
    assert entropy(SuperIdealModel(4), np.zeros(4)) == pytest.approx(np.log(4))


def test_nonsmooth_point_raises():
    m = ExpressionModel(("abs(x1)", "0"), 1)
    with pytest.raises(NonSmoothPoint):
        primitives(m, [0.0])


def test_subsystem_enumeration():
    m = SubsystemModel((2, 3), (1.0, 2.0), "x1*x2", 0.0)
    assert m.n == 5 and m.m == 6
    x = np.arange(5.0)
    vals = np.sort(m.values(x))
    ref = np.sort([1.0 * a + 2.0 * b for a in x[:2] for b in x[2:]])
    np.testing.assert_allclose(vals, ref)


def test_subsystem_coupling_enters_linearly():
    base = SubsystemModel((2, 2), (1.0, 1.0), "x1*x2", 0.0)
    eps = SubsystemModel((2, 2), (1.0, 1.0), "x1*x2", 0.5)
    x = np.array([0.1, 0.2, 0.3, 0.4])
    prod = np.array([a * b for a in x[:2] for b in x[2:]])
    np.testing.assert_allclose(np.sort(eps.values(x) - base.values(x)), np.sort(0.5 * prod))


@pytest.mark.parametrize(
    "model",
    [
        SuperIdealModel(3),
        LinearModel([[1.0, 2.0], [0.5, -1.0]], [0.0, 1.0]),
        ExpressionModel(("x1 + e*x2", "x2^2"), 2, {"e": 0.25}),
        SubsystemModel((2, 2), (1.0, 0.5), "x1*x2", 0.1),
    ],
)
def test_describe_round_trip(model):
    back = from_description(model.describe())
    assert back.describe() == model.describe()
    assert back.digest() == model.digest()


@pytest.mark.parametrize(
    "build",
    [
        lambda: SuperIdealModel(0),
        lambda: LinearModel([[1.0, 2.0]], [0.0, 1.0]),
        lambda: ExpressionModel((), 2),
        lambda: SubsystemModel((2, 2), (1.0,), "x1*x2"),
    ],
)
def test_invalid_models(build):
    with pytest.raises(ModelError):
        build()
