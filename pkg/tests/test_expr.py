import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylbec.errors import ExprSyntaxError, UnknownIdentifier
from weylbec.expr import SurfacePair, differentiate, load_model_file, parse_expr

PI = math.pi


def test_parse_example_surfaces():
    assert parse_expr("2 + cos(kx) + cos(ky)")(0.0, 0.0) == pytest.approx(4.0)
    assert parse_expr("sin(ky) - cos(kx)")(0.0, 0.0) == pytest.approx(-1.0)


def test_parse_constant_zero():
    e = parse_expr("0")
    assert e.is_constant()
    assert e(1.3, -0.2) == 0.0


def test_operator_precedence_and_unary_minus():
    assert parse_expr("1 + 2 * 3")(0, 0) == 7.0
    assert parse_expr("(1 + 2) * 3")(0, 0) == 9.0
    assert parse_expr("-2 * -3")(0, 0) == 6.0
    assert parse_expr("8 / 2 / 2")(0, 0) == 2.0
    assert parse_expr("1 - 2 - 3")(0, 0) == -4.0
    assert parse_expr("pi / 2")(0, 0) == pytest.approx(PI / 2)
    assert parse_expr("1.5e-1 * kx")(2.0, 0) == pytest.approx(0.3)


def test_vectorised_evaluation_broadcasts():
    e = parse_expr("cos(kx) + 0 * ky")
    kx = np.linspace(0, 1, 5)
    out = e(kx, 0.0)
    assert out.shape == (5,)
    np.testing.assert_allclose(out, np.cos(kx))
    assert parse_expr("3")(kx, kx).shape == (5,)


@pytest.mark.parametrize("text,error", [
    ("sin(kz)", UnknownIdentifier),
    ("tan(kx)", UnknownIdentifier),
    ("2 +", ExprSyntaxError),
    ("(1", ExprSyntaxError),
    ("kx kx", ExprSyntaxError),
    ("", ExprSyntaxError),
    ("2 $ 3", ExprSyntaxError),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_expr(text)


def test_table_derivatives():
    dky = differentiate(parse_expr("sin(ky)"), "ky")
    assert str(dky) == "cos(ky)"
    dkx = differentiate(parse_expr("2 + cos(kx) + cos(ky)"), "kx")
    assert str(dkx) == "-sin(kx)"


def test_example3_det_j_closed_form():
    pair = SurfacePair.parse("2 + cos(kx) + cos(ky)", "sin(ky) - cos(kx)")
    kx, ky = np.meshgrid(np.linspace(0, 2 * PI, 64), np.linspace(0, 2 * PI, 64))
    expected = -math.sqrt(2.0) * np.sin(kx) * np.cos(ky + PI / 4)
    np.testing.assert_allclose(pair.det_j(kx, ky), expected, atol=1e-12)


def test_det_j_matches_partials_exactly():
    pair = SurfacePair.parse("cos(kx) + cos(2*ky) * sin(kx)", "sin(ky) - 0.3 * cos(kx + ky)")
    rng = np.random.default_rng(1)
    kx, ky = rng.uniform(-5, 5, (2, 50))
    ax, ay = pair.grad_a(kx, ky)
    bx, by = pair.grad_b(kx, ky)
    assert np.array_equal(pair.det_j(kx, ky), ax * by - ay * bx)
    np.testing.assert_allclose(np.linalg.det(pair.jacobian(kx, ky)), ax * by - ay * bx, atol=1e-12)


def test_load_model_file(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"name": "m", "a": "cos(kx)", "b": "sin(ky)", "note": 1}')
    name, pair, extra = load_model_file(p)
    assert name == "m" and extra == {"note": 1}
    assert pair.a(0.0, 0.0) == 1.0


# -- property tests ---------------------------------------------------------------

_leaf = st.one_of(
    st.sampled_from(["kx", "ky", "pi"]),
    st.integers(0, 5).map(str),
    st.floats(0.1, 3.0).map(lambda x: f"{x:.3f}"),
)


def _trig(arg):
    return st.tuples(st.sampled_from(["sin", "cos"]), arg).map(lambda t: f"{t[0]}({t[1]})")


def _linear_arg():
    return st.tuples(st.integers(-3, 3), st.integers(-3, 3)).map(lambda t: f"{t[0]} * kx + {t[1]} * ky")


_periodic_term = st.one_of(_trig(_linear_arg()), st.integers(-3, 3).map(str))


def _combine(children):
    return st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(
        lambda t: f"({t[0]} {t[1]} {t[2]})")


expressions = st.recursive(st.one_of(_leaf, _trig(_leaf)), lambda c: st.one_of(_combine(c), _trig(c)),
                           max_leaves=8)
periodic_expressions = st.recursive(_periodic_term, _combine, max_leaves=6)
points = st.tuples(st.floats(-4, 4), st.floats(-4, 4))


@settings(max_examples=200, deadline=None)
@given(expressions, points)
def test_print_parse_round_trip(text, p):
    e = parse_expr(text)
    again = parse_expr(str(e))
    assert again(*p) == pytest.approx(e(*p), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(expressions, points, st.sampled_from(["kx", "ky"]))
def test_derivative_matches_central_difference(text, p, var):
    e = parse_expr(text)
    d = differentiate(e, var)
    h = 1e-5
    dx, dy = (h, 0.0) if var == "kx" else (0.0, h)
    fd = (e(p[0] + dx, p[1] + dy) - e(p[0] - dx, p[1] - dy)) / (2 * h)
    exact = d(*p)
    assert abs(exact - fd) <= 1e-6 * max(1.0, abs(exact)) + 1e-6


@settings(max_examples=100, deadline=None)
@given(periodic_expressions, points)
def test_periodicity(text, p):
    e = parse_expr(text)
    v = e(*p)
    assert e(p[0] + 2 * PI, p[1]) == pytest.approx(v, abs=1e-9)
    assert e(p[0], p[1] - 2 * PI) == pytest.approx(v, abs=1e-9)
