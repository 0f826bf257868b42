import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from statgeo import geometry as geo
from statgeo.model import ExpressionModel, LinearModel, SuperIdealModel
from statgeo.oracles import christoffel_from_metric, riemann_from_metric
from statgeo.verify import random_smooth_model


def test_metric_identities(rng):
    m = random_smooth_model(rng, 3, 4)
    x = rng.normal(size=3)
    g, det, g_inv = geo.metric(m, x)
    np.testing.assert_allclose(g @ g_inv, np.eye(3), atol=1e-12)
    assert det == pytest.approx(np.linalg.det(g))
    N = geo.normal_vector(m, x)
    assert np.linalg.norm(N) == pytest.approx(1.0)


def test_christoffel_matches_metric_derivatives(rng):
    m = random_smooth_model(rng, 3, 3)
    x = rng.normal(scale=0.5, size=3)
    ref = christoffel_from_metric(lambda y: geo.metric(m, y)[0], x)
    np.testing.assert_allclose(geo.christoffel(m, x), ref, atol=1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_gauss_equation_against_metric_oracle(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 3
    m = random_smooth_model(rng, n, 3)
    x = rng.normal(scale=0.5, size=n)
    ref = riemann_from_metric(lambda y: geo.metric(m, y)[0], x)
    np.testing.assert_allclose(geo.riemann(m, x), ref, atol=1e-4)


def test_riemann_symmetries(rng):
    m = random_smooth_model(rng, 4, 5)
    R = geo.riemann(m, rng.normal(size=4))
    np.testing.assert_allclose(R, -R.transpose(1, 0, 2, 3), atol=1e-14)
    np.testing.assert_allclose(R, -R.transpose(0, 1, 3, 2), atol=1e-14)
    np.testing.assert_allclose(R, R.transpose(2, 3, 0, 1), atol=1e-14)
    bianchi = R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)
    np.testing.assert_allclose(bianchi, 0, atol=1e-14)


def test_scalar_curvature_is_twice_sectional_in_2d(rng):
    # for surfaces R = 2 K_gauss with K_gauss = det(Omega)/det(g)
    m = random_smooth_model(rng, 2, 3)
    x = rng.normal(size=2)
    r = geo.full_report(m, x)
    assert r.scalar_R == pytest.approx(2 * np.linalg.det(r.omega) / r.det_g, rel=1e-10)


def test_closed_form_ricci_and_scalar_agree(rng):
    for _ in range(5):
        n = int(rng.integers(2, 5))
        m = random_smooth_model(rng, n, 4)
        ric, R, ric_cf, R_cf = geo.ricci_and_scalar(m, rng.normal(size=n))
        np.testing.assert_allclose(ric, ric_cf, atol=1e-10)
        assert R == pytest.approx(R_cf, abs=1e-10)


def test_one_dimensional_graph_is_flat():
    m = ExpressionModel(("x1^2", "sin(x1)"), 1)
    r = geo.full_report(m, [0.3])
    assert r.scalar_R == 0.0
    assert r.mean_H == pytest.approx(r.omega[0, 0] / r.det_g)


def test_report_serialisations():
    r = geo.full_report(SuperIdealModel(2), [0.1, -0.2])
    d = r.to_dict()
    assert set(geo.SCALAR_FIELDS) <= set(d)
    lines = r.to_csv().strip().splitlines()
    assert len(lines) == 2 and lines[0].startswith("x1,x2,w1,w2")


def test_entropy_geometric_decomposition(rng):
    m = random_smooth_model(rng, 3, 4)
    x = rng.normal(size=3)
    S, term, resid = geo.entropy_geometric(m, x)
    assert S == pytest.approx(term + resid, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-20, 20, allow_nan=False), min_size=3, max_size=3))
def test_super_ideal_K_vanishes_everywhere(x):
    assert abs(geo.gauss_kronecker(SuperIdealModel(3), x)) <= 1e-12


def test_mean_curvature_accessor_matches_report(rng):
    m = LinearModel(rng.normal(size=(5, 3)))
    x = rng.normal(size=3)
    assert geo.mean_curvature(m, x) == pytest.approx(geo.full_report(m, x).mean_H)
