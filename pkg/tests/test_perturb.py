import numpy as np
import pytest

from statgeo import geometry as geo
from statgeo.errors import UnstableExtraction
from statgeo.model import SubsystemModel
from statgeo.perturb import (
    EXAMPLE2_SOURCES,
    EpsilonFamily,
    adjugate,
    block_determinants,
    blockdet_first_order,
    epsilon_series,
    example2_analytic,
    example2_first_order,
    example2_model,
    example2_second_order_K,
    quantity_selector,
    translation_symmetric_example,
    verify_prop3,
)


def test_series_recovers_polynomial_coefficients():
    fam = EpsilonFamily.from_expressions(("x1 + 3*e + 2*e^2", "0"), 1, quantity="F")
    x = np.array([50.0])  # weight of the second state is negligible
    est = epsilon_series(fam, x)
    assert est.c0 == pytest.approx(50.0)
    assert est.c1 == pytest.approx(3.0, abs=1e-8)
    assert est.c2 == pytest.approx(2.0, abs=1e-5)


def test_series_reports_instability():
    fam = EpsilonFamily.from_expressions(("x1 + 100*sqrt(e^2 + 1e-12)", "0"), 1, quantity="F")
    with pytest.raises(UnstableExtraction):
        epsilon_series(fam, np.array([30.0]))


@pytest.mark.parametrize("name", ["K", "det_g", "R", "meanH", "S", "F", "hess_det", "g12", "omega21"])
def test_quantity_selector_names(name):
    r = geo.full_report(example2_model(0.2), [0.1, 0.2, 0.3])
    assert np.isfinite(quantity_selector(name)(r))
    with pytest.raises(KeyError):
        quantity_selector("nope")


def test_worked_example_closed_forms(rng):
    for _ in range(20):
        x = rng.normal(size=3)
        eps = float(rng.uniform(-1, 1))
        ref = example2_analytic(x, eps)
        r = geo.full_report(example2_model(eps), x)
        assert r.det_g == pytest.approx(ref["det_g"], abs=1e-10)
        assert r.gauss_kronecker_K == pytest.approx(ref["K"], abs=1e-10)


def test_worked_example_orders(rng):
    x = rng.normal(size=3)
    fam = EpsilonFamily.from_expressions(EXAMPLE2_SOURCES, 3, quantity="det_g", frozen_weights=True)
    assert epsilon_series(fam, x).c1 == pytest.approx(example2_first_order(x)["det_g"], abs=1e-6)
    famK = EpsilonFamily.from_expressions(EXAMPLE2_SOURCES, 3, quantity="K")
    est = epsilon_series(famK, x)
    assert est.c0 == pytest.approx(0.0, abs=1e-12)
    assert est.c1 == pytest.approx(0.0, abs=1e-6)
    assert est.c2 == pytest.approx(example2_second_order_K(x), abs=1e-6)


def test_second_order_value_on_diagonal():
    assert example2_second_order_K([0.7, 0.0, 0.0]) == pytest.approx(-8 / 10**2.5, rel=1e-14)


def test_translation_symmetric_variant(rng):
    for _ in range(5):
        translation_symmetric_example(rng.normal(size=3), float(rng.uniform(-1, 1)))


@pytest.mark.parametrize("P, gamma", [(2, "x1*x2"), (2, "sin(x1 + x2)"), (3, "x1*x2*x3")])
def test_first_order_vanishes(P, gamma, rng):
    model = SubsystemModel((2,) * P, tuple(rng.uniform(0.5, 1.5, P)), gamma)
    x = rng.normal(scale=0.5, size=model.n)
    rep = verify_prop3(model, x)
    assert rep["pass"]
    assert abs(blockdet_first_order(model, x)) < 1e-10


def test_three_level_blocks_have_nonzero_determinants(rng):
    model = SubsystemModel((3, 3), (1.0, 0.7), "x1*x2")
    det0, det1 = block_determinants(model, rng.normal(size=6))
    # each block is a 3x3 covariance with kernel (1,1,1)
    assert all(abs(d) < 1e-12 for d in det0)
    assert len(det1) == 2


def test_adjugate(rng):
    a = rng.normal(size=(4, 4))
    np.testing.assert_allclose(adjugate(a) @ a, np.linalg.det(a) * np.eye(4), atol=1e-12)
    s = np.array([[1.0, 2.0], [2.0, 4.0]])
    np.testing.assert_allclose(adjugate(s), [[4.0, -2.0], [-2.0, 1.0]])
