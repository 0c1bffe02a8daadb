import math

import numpy as np
import pytest

from hcalc.curves import gamma_y, horizontal_length
from hcalc.group import dilate, group_mul, horizontal_point, koranyi_dist
from hcalc.metric import (
    Ball,
    ConstantsEstimate,
    DistanceBounds,
    angle_fit,
    cc_bounds,
    cc_lower,
    cc_upper,
    cc_upper_quick,
    cc_upper_value_batch,
    distance_pansu_check,
    holder_fit,
    square_route_upper,
)

ORIGIN = np.zeros(3)


def test_lower_bound_frozen_values():
    assert cc_lower(ORIGIN, ORIGIN) == 0.0
    assert cc_lower(ORIGIN, np.array([0, 0, 4.0])) == pytest.approx(2.0)
    assert cc_lower(ORIGIN, np.array([3, 4, 0.0])) == pytest.approx(5.0)


def test_vertical_upper_route():
    up, witness = cc_upper(ORIGIN, np.array([0, 0, 1.0]))
    # inscribed polygon exceeds the smooth circle only by its defect
    assert math.sqrt(math.pi) <= up <= math.sqrt(math.pi) + 1e-5
    assert np.allclose(witness.end(), [0, 0, 1.0], atol=1e-12)
    assert horizontal_length(witness) == pytest.approx(up, abs=1e-12)
    # the square route is a strictly worse competitor
    assert square_route_upper(1.0) == pytest.approx(2.0)
    assert up < square_route_upper(1.0)


def test_bracket_collapses_on_horizontal_lines():
    x = np.array([0.3, -0.2, 0.7])
    y = group_mul(x, horizontal_point(np.array([0.37, 0.0])))
    b = cc_bounds(x, y)
    assert b.lower == pytest.approx(0.37, abs=1e-12)
    assert b.upper == pytest.approx(0.37, abs=1e-12)


def test_bracket_ordering_and_witness():
    rng = np.random.default_rng(1)
    for _ in range(100):
        x, y = rng.standard_normal((2, 3))
        b = cc_bounds(x, y)
        assert b.lower <= b.upper + 1e-12
        assert np.allclose(b.witness.start(), x, atol=1e-9)
        assert np.allclose(b.witness.end(), y, atol=1e-9)
        assert b.upper >= koranyi_dist(x, y) / 4.0  # sanity scale


def test_arc_never_beats_the_lower_bound_and_gamma_route():
    rng = np.random.default_rng(2)
    for _ in range(100):
        z = rng.standard_normal(3)
        if np.linalg.norm(z[:2]) < 1e-6:
            continue
        up, _ = cc_upper(ORIGIN, z)
        assert up >= cc_lower(ORIGIN, z) - 1e-12
        gamma_route = horizontal_length(gamma_y(z))
        assert up <= gamma_route + 1e-12


def test_left_invariance_and_dilation_scaling():
    rng = np.random.default_rng(3)
    for _ in range(30):
        g, x, y = rng.standard_normal((3, 3))
        b1 = cc_bounds(x, y)
        b2 = cc_bounds(group_mul(g, x), group_mul(g, y))
        assert b1.lower == pytest.approx(b2.lower, abs=1e-9)
        assert b1.upper == pytest.approx(b2.upper, abs=1e-9)
        r = float(rng.uniform(0.3, 3.0))
        b3 = cc_bounds(dilate(r, x), dilate(r, y))
        assert b3.lower == pytest.approx(r * b1.lower, abs=1e-9 * max(1, r))
        assert b3.upper == pytest.approx(r * b1.upper, abs=1e-9 * max(1, r))


def test_koranyi_and_bracket_are_uniformly_comparable():
    rng = np.random.default_rng(4)
    ratios = []
    for _ in range(500):
        x, y = rng.standard_normal((2, 3))
        b = cc_bounds(x, y)
        dk = koranyi_dist(x, y)
        if dk > 1e-9:
            ratios.append((b.lower / dk, b.upper / dk))
    los, his = zip(*ratios)
    assert min(los) > 0.3
    assert max(his) < 3.0


def test_batch_value_matches_witness_value():
    rng = np.random.default_rng(5)
    zs = rng.standard_normal((50, 3))
    vals = cc_upper_value_batch(zs)
    for z, v in zip(zs, vals):
        u, _ = cc_upper(ORIGIN, z)
        assert v == pytest.approx(u, rel=3e-4)
        assert v >= cc_lower(ORIGIN, z) - 1e-12


def test_quick_bound_dominates_bracket():
    rng = np.random.default_rng(6)
    zs = rng.standard_normal((50, 3))
    quick = cc_upper_quick(zs)
    for z, q in zip(zs, quick):
        u, _ = cc_upper(ORIGIN, z)
        assert q >= u - 1e-9


def test_distance_bounds_validation():
    with pytest.raises(ValueError):
        DistanceBounds(2.0, 1.0)
    with pytest.raises(ValueError):
        DistanceBounds(-1.0, 1.0)
    path = gamma_y(np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        DistanceBounds(0.5, 2.0, witness=path)  # witness length 1 != 2


def test_constants_estimate_validation():
    with pytest.raises(ValueError):
        ConstantsEstimate(c_holder=0.5)
    est = ConstantsEstimate(c_holder=3.0, region="test", samples=10)
    assert est.c_vector == 2.0


def test_holder_fit():
    ball = Ball(np.zeros(3), 2.0)
    est = holder_fit(ball, 500, seed=0)
    assert est.c_holder >= 1.0
    assert est.samples == 500
    with pytest.raises(ValueError):
        holder_fit(ball, 50, seed=0)
    with pytest.raises(ValueError):
        Ball(np.zeros(3), 0.0)


def test_angle_fit_is_at_least_one():
    est = angle_fit(2.0, 50, seed=0)
    assert est.c_angle >= 1.0


def test_distance_pansu_check_cases():
    u = np.array([1.0, 0.0])
    # z = 0: both sides equal d(u)
    rep = distance_pansu_check(u, np.zeros((1, 3)))
    assert rep.inequality_margins[0] == pytest.approx(0.0, abs=1e-12)
    assert rep.residuals[0] == pytest.approx(0.0, abs=1e-9)
    # along the line the inequality is an equality
    rep2 = distance_pansu_check(u, (0.05 * horizontal_point(u))[None, :])
    assert abs(rep2.inequality_margins[0]) <= 1e-12
    # vertical displacement keeps a nonnegative margin
    rep3 = distance_pansu_check(u, np.array([[0.0, 0.0, 1e-4]]))
    assert rep3.inequality_margins[0] >= -1e-12
    assert rep3.passed
    with pytest.raises(ValueError):
        distance_pansu_check(u, np.zeros((0, 3)))
    with pytest.raises(ValueError):
        distance_pansu_check(np.array([2.0, 0.0]), np.zeros((1, 3)))
