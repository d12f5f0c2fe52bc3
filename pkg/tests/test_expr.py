import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fderiv import expr as ex
from fderiv import families as fam
from fderiv.errors import DivisionByZero, ExprParseError, NotHolomorphic, OrderTooLow

from conftest import cplx, poly_coeffs


def test_eval_im():
    assert ex.evaluate(ex.parse("im"), 2 + 3j) == 3


def test_eval_product():
    assert ex.evaluate(ex.Z * ex.Z, 1 + 1j) == 2j


def test_eval_reciprocal_at_pole():
    with pytest.raises(DivisionByZero) as info:
        ex.evaluate(ex.parse("div(1,z)"), 0)
    assert info.value.point == 0


def test_eval_array_shape():
    z = np.array([[1, 2], [3j, 4]])
    out = ex.evaluate(ex.parse("add(re,conj)"), z)
    assert out.shape == (2, 2)
    assert out[1, 0] == pytest.approx(-3j)


@given(poly_coeffs, poly_coeffs, cplx)
def test_eval_compositional(a, b, z):
    f, g = ex.polynomial(a), ex.polynomial(b)
    assert ex.evaluate(ex.Compose(f, g), z) == ex.evaluate(f, ex.evaluate(g, z))


def test_polynomial_oracle():
    e = ex.polynomial([1, 0, 2j, -1])
    z = 0.3 - 0.7j
    assert ex.evaluate(e, z) == pytest.approx(1 + 2j * z**2 - z**3)


# -- symbolic derivative -------------------------------------------------------


def _same(e1, e2, pts=(0.3 + 0.4j, -1.1 + 0.2j, 2.0 - 1.5j)):
    return all(abs(ex.evaluate(e1, z) - ex.evaluate(e2, z)) < 1e-12 * max(1, abs(ex.evaluate(e2, z))) for z in pts)


def test_derivative_cube():
    assert _same(ex.holo_derivative(ex.parse("pow(z,3)")), ex.parse("mul(3,pow(z,2))"))


def test_derivative_reciprocal():
    assert _same(ex.holo_derivative(ex.parse("div(1,z)")), ex.parse("neg(div(1,pow(z,2)))"))


def test_derivative_im_rejected():
    with pytest.raises(NotHolomorphic):
        ex.holo_derivative(ex.parse("im"))


def test_derivative_nested_conj_rejected():
    with pytest.raises(NotHolomorphic):
        ex.holo_derivative(ex.parse("add(z,mul(2,conj))"))


def _random_tree(draw_coeffs, draw_den):
    num = ex.polynomial(draw_coeffs)
    den = ex.polynomial(draw_den)
    return ex.Compose(ex.mk_div(num, den), ex.parse("add(z,mul(0.5,pow(z,2)))"))


@given(poly_coeffs, st.lists(cplx, min_size=1, max_size=3), st.integers(0, 2**31 - 1))
def test_derivative_matches_central_differences(num, den_roots, seed):
    # denominator roots pushed to |w| >= 3 keep poles well away from samples
    roots = [3 * r / abs(r) if abs(r) > 1e-3 else 3 for r in den_roots]
    den = ex.ONE
    for r in roots:
        den = ex.mk_mul(den, ex.mk_sub(ex.Z, ex.Const(r)))
    e = ex.Compose(ex.mk_div(ex.polynomial(num), den), ex.parse("mul(0.8,z)"))
    d = ex.holo_derivative(e)
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1, 1, 100) + 1j * rng.uniform(-1, 1, 100)
    h = 1e-5
    fd = (ex.evaluate(e, z + h) - ex.evaluate(e, z - h)) / (2 * h)
    exact = ex.evaluate(d, z)
    scale = np.maximum(np.abs(exact), 1.0)
    assert np.max(np.abs(fd - exact) / scale) < 1e-6


def test_holo_derivatives_sequence():
    seq = ex.holo_derivatives(ex.parse("pow(z,4)"), 5)
    assert seq.order == 5
    assert ex.evaluate(seq[4], 0.7) == pytest.approx(24)
    assert ex.evaluate(seq[5], 0.7) == 0


def test_deriv_sequence_require():
    seq = ex.DerivSequence(["z", "1"])
    with pytest.raises(OrderTooLow):
        seq.require(2)
    assert seq.padded(4).order == 4


# -- simplification ------------------------------------------------------------


def test_simplify_folds_constants():
    assert ex.simplify(ex.parse("add(mul(2,3),0)")) == ex.Const(6)


def test_simplify_self_quotient():
    assert ex.simplify(ex.parse("div(z,z)")) == ex.ONE


def test_simplify_like_terms():
    assert ex.simplify(ex.parse("add(z,mul(2,z))")) == ex.Mul(ex.Const(3), ex.Z)


@given(poly_coeffs, poly_coeffs, cplx)
def test_simplify_preserves_value(a, b, z):
    e = ex.Add(ex.Mul(ex.polynomial(a), ex.polynomial(b)), ex.Sub(ex.polynomial(b), ex.polynomial(a)))
    want = ex.evaluate(e, z)
    got = ex.evaluate(ex.simplify(e), z)
    assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


# -- sup estimates -------------------------------------------------------------


def test_sup_identity_on_square_edges():
    assert ex.sup_on_paths(ex.Z, fam.rectangle_edges()) == pytest.approx(math.sqrt(2))


def test_sup_constant():
    assert ex.sup_on_paths(ex.Const(5), fam.grid_segments()) == 5


def test_sup_im_on_horizontals():
    assert ex.sup_on_paths(ex.parse("im"), fam.horizontal_segments(heights=(0, 0.5, 1))) == 1


# -- serialisation -------------------------------------------------------------


@pytest.mark.parametrize(
    "text",
    ["z", "im", "re", "conj", "const(1.5,-2.0)", "add(pow(z,3),mul(2,z))", "div(1,sub(z,const(0,1)))",
     "compose(im,mul(z,z))"],
)
def test_prefix_round_trip(text):
    e = ex.parse(text)
    assert ex.parse(ex.to_prefix(e)) == e
    assert ex.from_json(json.loads(json.dumps(ex.to_json(e)))) == e


def test_parse_nary_and_neg():
    e = ex.parse("add(z,1,z)")
    assert ex.evaluate(e, 2) == 5
    assert ex.evaluate(ex.parse("neg(z)"), 2) == -2


@pytest.mark.parametrize("bad", ["add(", "foo(z)", "pow(z,-1)", "add(z,1))", ""])
def test_parse_errors(bad):
    with pytest.raises(ExprParseError):
        ex.parse(bad)
