import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from movingwave import expr as E
from movingwave.errors import ParseError


def test_derivative_of_boundary_prints_constant():
    node = E.parse("1 + 0.25*t", variables={"t"})
    assert str(node.diff("t")) == "0.25"


def test_derivative_of_constant_is_zero():
    assert E.parse("3.5*pi + 2").diff("t") == E.ZERO


@pytest.mark.parametrize("text, value", [
    ("1 + 2*3", 7.0),
    ("2^3^2", 512.0),
    ("(2^3)^2", 64.0),
    ("-2^2", 4.0),          # unary minus binds tighter than ^
    ("-(2^2)", -4.0),
    ("8/4/2", 1.0),
    ("1 - 2 - 3", -4.0),
    ("sqrt(16) + abs(-3)", 7.0),
    ("tanh(0) + exp(0)", 1.0),
    ("1.5e1 + .5", 15.5),
])
def test_evaluation(text, value):
    assert E.parse(text)() == pytest.approx(value)


@pytest.mark.parametrize("bad, col", [("1 +", 4), ("2 * (3", 7), ("foo(1)", 1), ("1 $ 2", 3)])
def test_parse_errors_carry_column(bad, col):
    with pytest.raises(ParseError) as info:
        E.parse(bad)
    assert info.value.column == col


def test_unknown_identifier_rejected():
    with pytest.raises(ParseError):
        E.parse("x2 + t", variables=E.allowed_variables(1))
    E.parse("x + x1 + t", variables=E.allowed_variables(1))


def _sympy(text):
    x, t = sp.symbols("x t", real=True)
    return sp.sympify(text.replace("^", "**"), locals={"pi": sp.pi, "x": x, "t": t})


@pytest.mark.parametrize("text", [
    "sin(pi*x/(1 + 0.25*t))*cos(t)",
    "exp(-(x^2))*tanh(3*t) + sqrt(1 + x^2)",
    "x^t + log(2 + x)",
    "abs(x - 0.3)*t^3 / (2 + cos(x))",
])
def test_derivatives_match_sympy(text):
    node = E.parse(text)
    ref = _sympy(text)
    x, t = sp.symbols("x t", real=True)
    pts = np.array([[0.4, 0.7], [1.1, 0.2], [0.9, 1.3]])
    for var, sym in (("x", x), ("t", t)):
        d = node.diff(var)
        dref = sp.lambdify((x, t), sp.diff(ref, sym), "numpy")
        for px, pt in pts:
            assert d(x=px, t=pt) == pytest.approx(float(dref(px, pt)), rel=1e-12, abs=1e-12)


_atoms = st.one_of(
    st.floats(min_value=0, max_value=100, allow_nan=False).map(lambda v: E.Num(round(v, 3))),
    st.sampled_from([E.Var("x"), E.Var("t"), E.Var("pi")]),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/^"), children, children).map(
            lambda a: E.BinOp(a[0], a[1], a[2])),
        children.map(E.Neg),
        st.tuples(st.sampled_from(E.FUNCTIONS), children).map(lambda a: E.Call(a[0], a[1])),
    )


trees = st.recursive(_atoms, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(trees)
def test_print_parse_round_trip(tree):
    text = E.to_string(tree)
    again = E.parse(text)
    assert E.to_string(again) == text
    assert again == tree


@settings(max_examples=200, deadline=None)
@given(trees)
def test_whitespace_is_irrelevant(tree):
    text = E.to_string(tree)
    assert E.parse(text.replace(" ", "")) == E.parse(text)


def test_vectorised_evaluation():
    node = E.parse("sin(x)*t")
    x = np.linspace(0, 1, 5)
    np.testing.assert_allclose(node(x=x, t=2.0), 2 * np.sin(x))


def test_constants():
    assert E.parse("pi")() == math.pi
