import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from statgeo.errors import DomainError, ExpressionSyntaxError, UnknownIdentifier, VariableOutOfRange
from statgeo.expr import BinOp, Const, Expression, Neg, Var, eval_jet2, evaluate, parse, to_source
from statgeo.oracles import fd_jet2


def test_precedence_unary_minus_binds_looser_than_power():
    e = parse("-x1^2", 1)
    assert isinstance(e.root, Neg)
    assert evaluate(e, [3.0]) == -9.0


def test_negative_exponent_and_star_star_alias():
    assert evaluate(parse("2^-1", 1), [0.0]) == 0.5
    assert evaluate(parse("x1**3", 1), [2.0]) == 8.0


def test_power_is_right_associative():
    assert evaluate(parse("2^3^2", 1), [0.0]) == 2.0**9


def test_constants_and_pi():
    e = parse("e*x1 + pi", 1, {"e": 0.5})
    assert evaluate(e, [2.0]) == pytest.approx(1.0 + math.pi)


@pytest.mark.parametrize(
    "src, n, exc",
    [
        ("", 1, ExpressionSyntaxError),
        ("x1 +", 1, ExpressionSyntaxError),
        ("(x1", 1, ExpressionSyntaxError),
        ("x3", 2, VariableOutOfRange),
        ("foo(x1)", 1, UnknownIdentifier),
        ("y", 1, UnknownIdentifier),
        ("x1 $ 2", 1, ExpressionSyntaxError),
    ],
)
def test_parse_errors(src, n, exc):
    with pytest.raises(exc):
        parse(src, n)


def test_syntax_error_reports_offset():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse("x1 + * x2", 2)
    assert info.value.offset == 5


@pytest.mark.parametrize(
    "src, x",
    [
        ("log(-x1)", [1.0]),
        ("sqrt(x1)", [-1.0]),
        ("asin(x1)", [1.5]),
    ],
)
def test_domain_errors(src, x):
    with pytest.raises(DomainError):
        evaluate(parse(src, 1), x)


_SMOOTH = [
    "exp(x1) * sin(x2) + x1^3",
    "log(1 + x1^2 + x2^2) / (2 + cos(x1))",
    "sqrt(2 + x1*x2) - cbrt(3 + x1)",
    "asin(0.3 * sin(x1 + x2)) * x2^2",
    "x1 / (1 + x2^2) + (x1 - x2)^4",
    "abs(x1 + 5) * heaviside(x2 + 10)",
]


@pytest.mark.parametrize("src", _SMOOTH)
def test_jet_matches_richardson_finite_differences(src, rng):
    e = parse(src, 2)
    for _ in range(5):
        x = rng.uniform(-1, 1, 2)
        exact = eval_jet2(e, x)
        ref = fd_jet2(lambda y: evaluate(e, y), x, h=1e-3)
        assert not exact.nonsmooth
        assert exact.value == pytest.approx(evaluate(e, x))
        np.testing.assert_allclose(exact.gradient, ref.gradient, rtol=1e-6, atol=1e-7)
        np.testing.assert_allclose(exact.hessian, ref.hessian, rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize(
    "src, x",
    [("abs(x1)", [0.0]), ("sgn(x1)", [0.0]), ("heaviside(x1)", [0.0]), ("sqrt(x1)", [0.0]), ("asin(x1)", [1.0])],
)
def test_kinks_flag_nonsmooth(src, x):
    assert eval_jet2(parse(src, 1), x).nonsmooth


def test_kink_conventions():
    assert evaluate(parse("heaviside(x1)", 1), [0.0]) == 1.0
    assert evaluate(parse("sgn(x1)", 1), [0.0]) == 0.0
    j = eval_jet2(parse("abs(x1)", 1), [0.0])
    assert j.gradient[0] == 0.0 and j.hessian[0, 0] == 0.0


def test_off_step_factor_short_circuits_domain():
    e = parse("sqrt(1 - x1^2) * heaviside(1 - x1^2)", 1)
    j = eval_jet2(e, [2.0])
    assert j.value == 0.0 and not j.nonsmooth
    assert np.all(j.gradient == 0)


def test_hessian_symmetric(rng):
    e = parse("x1*x2*x3 + sin(x1*x3)", 3)
    h = eval_jet2(e, rng.normal(size=3)).hessian
    np.testing.assert_array_equal(h, h.T)


_leaf = st.one_of(
    st.integers(1, 3).map(Var),
    st.floats(-5, 5, allow_nan=False).map(lambda v: Const(round(v, 3))),
)
_tree = st.recursive(
    _leaf,
    lambda kids: st.one_of(
        st.tuples(st.sampled_from("+-*"), kids, kids).map(lambda t: BinOp(*t)),
        kids.map(Neg),
    ),
    max_leaves=8,
)


@settings(max_examples=150, deadline=None)
@given(_tree, st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3))
def test_to_source_round_trip(node, x):
    src = to_source(node)
    back = parse(src, 3)
    again = to_source(back.root)
    assert to_source(parse(again, 3).root) == again
    assert evaluate(back, x) == pytest.approx(evaluate(Expression(node, 3), x), rel=1e-12, abs=1e-12)
