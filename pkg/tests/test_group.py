import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hcalc.group import (
    HLinearMap,
    dilate,
    group_inv,
    group_mul,
    horizontal_point,
    koranyi_dist,
    koranyi_norm,
    omega,
    project,
    unit_direction,
    vector_at,
)

coord = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


def h1_points(draw_len=3):
    return st.lists(coord, min_size=draw_len, max_size=draw_len).map(lambda v: np.asarray(v, float))


def test_group_law_frozen_example():
    # direct substitution: cross term -2(<a,b'> - <b,a'>) = -2
    assert np.allclose(group_mul([1, 0, 0], [0, 1, 0]), [1, 1, -2])


def test_identity_and_inverse():
    x = np.array([0.3, -1.2, 0.7])
    assert np.allclose(group_mul(x, np.zeros(3)), x)
    assert np.allclose(group_mul(x, group_inv(x)), np.zeros(3))


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        group_mul(np.zeros(3), np.zeros(5))


def test_dilation_frozen_example():
    assert np.allclose(dilate(3.0, [1, 2, 1]), [3, 6, 9])
    x = np.array([0.5, 1.5, -2.0])
    assert np.allclose(dilate(1.0, x), x)
    assert np.allclose(dilate(2.0, dilate(0.5, x)), x)


def test_dilation_rejects_nonpositive_factor():
    with pytest.raises(ValueError):
        dilate(0.0, np.zeros(3))
    with pytest.raises(ValueError):
        dilate(-1.0, np.zeros(3))


def test_vector_field_values():
    assert np.allclose(vector_at([1, 0], [0, 0, 0]), [1, 0, 0])
    assert np.allclose(vector_at([1, 0], [0, 1, 0]), [1, 0, 2])
    assert np.allclose(vector_at([0, 1], [1, 0, 0]), [0, 1, -2])


def test_koranyi_frozen_values():
    zero = np.zeros(3)
    assert koranyi_dist(zero, zero) == 0.0
    assert np.isclose(koranyi_dist(zero, [0, 0, 4]), 2.0)
    assert np.isclose(koranyi_dist(zero, [3, 4, 0]), 5.0)
    assert koranyi_norm(np.array([3, 4, 0.0])) == pytest.approx(5.0)


def test_hlinear_frozen_values():
    L = HLinearMap(1.0, np.array([1.0, 0.0]))
    assert L(np.zeros(3)) == 0.0
    for t in (-2.0, 0.5, 3.0):
        assert L(np.array([t, 0.0, 0.0])) == pytest.approx(t)
    x = np.array([0.4, -0.3, 1.1])
    assert L(dilate(2.0, x)) == pytest.approx(2.0 * L(x))


def test_hlinear_requires_unit_direction():
    with pytest.raises(ValueError):
        HLinearMap(1.0, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        HLinearMap(-0.5, np.array([1.0, 0.0]))


def test_hlinear_from_coeffs():
    L = HLinearMap.from_coeffs(np.array([3.0, 4.0]))
    assert L.lip == pytest.approx(5.0)
    assert np.allclose(L.coeffs, [3.0, 4.0])
    zero = HLinearMap.from_coeffs(np.zeros(2))
    assert zero.lip == 0.0


@settings(max_examples=150, deadline=None)
@given(h1_points(), h1_points(), h1_points())
def test_associativity(x, y, z):
    lhs = group_mul(group_mul(x, y), z)
    rhs = group_mul(x, group_mul(y, z))
    scale = 1.0 + float(np.max(np.abs([x, y, z]))) ** 2
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(h1_points(), st.floats(min_value=0.01, max_value=20.0))
def test_dilation_homomorphism(x, r):
    lhs = dilate(r, group_mul(x, x))
    rhs = group_mul(dilate(r, x), dilate(r, x))
    scale = 1.0 + r * r * (1.0 + float(np.max(np.abs(x)))) ** 2
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(h1_points(), h1_points())
def test_projection_homomorphism(x, y):
    assert np.array_equal(project(group_mul(x, y)), project(x) + project(y))


@settings(max_examples=100, deadline=None)
@given(h1_points(), st.floats(min_value=-5, max_value=5))
def test_horizontal_line_translation_identity(x, t):
    e = np.array([0.6, 0.8])
    lhs = group_mul(x, t * horizontal_point(e))
    rhs = x + t * vector_at(e, x)
    scale = 1.0 + float(np.max(np.abs(x))) + abs(t)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_koranyi_left_invariance():
    rng = np.random.default_rng(7)
    for _ in range(200):
        g, x, y = rng.standard_normal((3, 5))
        assert koranyi_dist(group_mul(g, x), group_mul(g, y)) == pytest.approx(
            koranyi_dist(x, y), abs=1e-10
        )


def test_unit_direction_and_omega():
    h = np.array([3.0, 4.0])
    assert omega(h) == pytest.approx(5.0)
    assert np.allclose(unit_direction(h), [0.6, 0.8])
    with pytest.raises(ValueError):
        unit_direction(np.zeros(2))
