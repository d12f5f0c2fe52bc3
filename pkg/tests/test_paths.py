import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fderiv import expr as ex
from fderiv import paths as P
from fderiv.errors import ConstantPath, InvalidInterval, InvalidPath, JoinMismatch, NonConvergent

from conftest import polylines


def brute_length(path, n=200_001):
    """Independent oracle: chord sum on a fine uniform grid."""
    z = path.evaluate(np.linspace(0.0, 1.0, n))
    return float(np.sum(np.abs(np.diff(z))))


# -- construction and evaluation ---------------------------------------------


def test_polyline_rejects_repeated_vertex():
    with pytest.raises(InvalidPath):
        P.Polyline([0, 1, 1, 2])


def test_polyline_rejects_nonfinite():
    with pytest.raises(InvalidPath):
        P.Polyline([0, complex(np.inf, 0)])


def test_polyline_needs_two_vertices():
    with pytest.raises(InvalidPath):
        P.Polyline([1 + 1j])


def test_chord_length_parametrisation(square):
    assert square.evaluate(0.125) == pytest.approx(0.5)
    assert square.evaluate(0.375) == pytest.approx(1 + 0.5j)
    assert square.evaluate(np.array([0.0, 1.0])) == pytest.approx(np.array([0, 0]))


@given(polylines)
def test_endpoints_are_declared_vertices(p):
    a, b = P.endpoints(p)
    assert a == p.points[0]
    assert b == p.points[-1]


def test_sub_requires_increasing_interval(square):
    with pytest.raises(InvalidInterval):
        P.subpath(square, 0.5, 0.5)
    with pytest.raises(InvalidInterval):
        P.subpath(square, -0.1, 0.5)


def test_join_mismatch():
    with pytest.raises(JoinMismatch):
        P.join(P.segment(0, 1), P.segment(2, 3))


def test_join_tolerates_tiny_gap():
    j = P.join(P.segment(0, 1), P.segment(1 + 1e-12, 2))
    assert P.length(j) == pytest.approx(2.0, abs=1e-9)


def test_reverse_endpoints():
    assert P.endpoints(P.reverse(P.segment(0, 1))) == (1, 0)


# -- total variation -----------------------------------------------------------


def test_square_perimeter(square):
    assert P.total_variation(square) == pytest.approx(4.0, abs=1e-9)


def test_half_segment():
    assert P.total_variation(P.segment(0, 1), 0.0, 0.5) == pytest.approx(0.5, abs=1e-9)


def test_mapped_square_length():
    p = P.Mapped(P.segment(0, 1), ex.parse("pow(z,2)"))
    assert P.total_variation(p) == pytest.approx(1.0, abs=1e-9)
    assert brute_length(p) == pytest.approx(1.0, abs=1e-9)


def test_mapped_curved_length_matches_quadrature_oracle():
    # t -> (1 + it)^2 / 2, speed |i (1 + it)| = sqrt(1 + t^2), closed-form length
    p = P.Mapped(P.segment(0, 1), ex.parse("mul(0.5,pow(add(1,mul(const(0,1),z)),2))"))
    want = 0.5 * (math.sqrt(2) + math.asinh(1.0))
    assert P.total_variation(p) == pytest.approx(want, abs=1e-8)


def test_half_perimeter_subpath(square):
    assert P.total_variation(P.subpath(square, 0, 0.5)) == pytest.approx(2.0, abs=1e-9)


def test_join_length():
    assert P.length(P.join(P.segment(0, 1), P.segment(1, 1 + 1j))) == pytest.approx(2.0, abs=1e-9)


def test_nonconvergent_on_wild_path():
    # a tight spiral with a tiny depth budget forces the error path
    p = P.Mapped(P.segment(1, 1 + 1j), ex.parse("pow(z,40)"))
    with pytest.raises(NonConvergent) as info:
        P.total_variation(p, tol=1e-15, max_depth=6)
    assert info.value.depth == 6


@given(polylines, st.integers(1, 8), st.integers(0, 3))
def test_refinement_monotone(p, depth, extra):
    coarse = P.Partition.dyadic(0.0, 1.0, depth)
    fine = P.Partition.dyadic(0.0, 1.0, depth + 1 + extra)
    assert P.partition_sum(p, fine) >= P.partition_sum(p, coarse) - 1e-12


@given(polylines, st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_tv_additive(p, x, y, w):
    a, c, b = sorted([x, y, w])
    if c - a < 1e-6 or b - c < 1e-6:
        return
    whole = P.total_variation(p, a, b)
    parts = P.total_variation(p, a, c) + P.total_variation(p, c, b)
    assert abs(whole - parts) <= 2 * P.DEFAULT_TOL


def test_tv_additive_curved():
    p = P.Mapped(P.segment(-1, 1 + 1j), ex.parse("add(pow(z,3),z)"))
    for a, c, b in [(0.0, 0.3, 1.0), (0.1, 0.5, 0.9), (0.25, 0.26, 0.8)]:
        whole = P.total_variation(p, a, b)
        parts = P.total_variation(p, a, c) + P.total_variation(p, c, b)
        assert abs(whole - parts) <= 2 * P.DEFAULT_TOL


@given(polylines)
def test_reverse_and_arclength_preserve_tv(p):
    ell = P.length(p)
    assert P.length(P.reverse(p)) == pytest.approx(ell, abs=P.DEFAULT_TOL)
    assert P.length(P.arc_length_param(p)) == pytest.approx(ell, abs=P.DEFAULT_TOL)


@given(polylines, polylines)
def test_join_additive(p, q):
    shift = p.end - q.start
    q = P.Polyline(q.points + shift)
    total = P.length(P.join(p, q))
    assert total == pytest.approx(P.length(p) + P.length(q), abs=P.DEFAULT_TOL)


# -- admissibility -------------------------------------------------------------


def test_segment_admissible():
    assert P.is_admissible(P.segment(0, 1 + 1j)).status == "admissible"


def test_constant_on_half_witness():
    p = P.join(P.segment(0, 1), P.Mapped(P.segment(0, 1), ex.Const(1)))
    verdict = P.is_admissible(p)
    assert not verdict
    assert verdict.status == "constant_subpath"
    lo, hi = verdict.witness
    assert lo >= 0.5 - 1e-9 and hi == pytest.approx(1.0)


def test_arclength_of_curved_path_admissible():
    p = P.Mapped(P.segment(0, 1), ex.parse("pow(z,2)"))
    assert P.is_admissible(P.arc_length_param(p))


# -- arc-length parametrisation ------------------------------------------------


def test_arclength_of_segment_is_identity():
    s = P.segment(0, 1)
    q = P.arc_length_param(s)
    t = np.linspace(0, 1, 17)
    assert np.allclose(q.evaluate(t), s.evaluate(t), atol=1e-15)


def test_arclength_of_squared_segment_is_unit_speed():
    q = P.arc_length_param(P.Mapped(P.segment(0, 1), ex.parse("pow(z,2)")))
    t = np.linspace(0, 1, 101)
    assert np.max(np.abs(q.evaluate(t) - t)) < 1e-9


def test_arclength_square_length(square):
    assert P.arc_length_param(square).length == pytest.approx(4.0, abs=1e-9)


def test_arclength_constant_path_raises():
    with pytest.raises(ConstantPath):
        P.arc_length_param(P.Mapped(P.segment(0, 1), ex.Const(2)))


@pytest.mark.parametrize(
    "base",
    [
        P.Mapped(P.segment(0, 1 + 1j), ex.parse("pow(z,2)")),
        P.Mapped(P.segment(-1, 1), ex.parse("add(pow(z,3),mul(const(0,1),z))")),
        P.Polyline([0, 2, 2 + 1j, -1j]),
    ],
)
def test_arclength_cumulative_variation(base):
    q = P.arc_length_param(base)
    ell = P.length(base)
    for t in np.linspace(0, 1, 33)[1:]:
        assert P.total_variation(q, 0.0, t) == pytest.approx(t * ell, abs=P.DEFAULT_TOL)
    a, b = P.endpoints(q)
    assert a == pytest.approx(base.start, abs=1e-12)
    assert b == pytest.approx(base.end, abs=1e-12)


def test_normalised_matches_arclength():
    base = P.Mapped(P.segment(0, 1), ex.parse("pow(z,3)"))
    t = np.linspace(0, 1, 9)
    assert np.allclose(P.normalised(base).evaluate(t), P.arc_length_param(base).evaluate(t))


# -- json ---------------------------------------------------------------------


def test_json_round_trip(square):
    p = P.join(
        P.subpath(square, 0.1, 0.6),
        P.Mapped(P.segment(square.evaluate(0.6), 3 + 3j), ex.parse("z")),
    )
    doc = json.loads(json.dumps(P.to_json(P.reverse(p))))
    q = P.from_json(doc)
    t = np.linspace(0, 1, 41)
    assert np.array_equal(q.evaluate(t), P.reverse(p).evaluate(t))


def test_json_arclength_kinds():
    base = P.Mapped(P.segment(0, 1), ex.parse("pow(z,2)"))
    for p in (P.arc_length_param(base), P.normalised(base)):
        q = P.from_json(P.to_json(p))
        assert type(q) is type(p)
