import math
from fractions import Fraction

import numpy as np
import pytest

from hcalc.curves import (
    HorizontalPath,
    ModifyLineParams,
    delta_cap,
    gamma_y,
    horizontal_length,
    lift_planar,
    line_path,
    lipschitz_constant,
    modify_line,
)
from hcalc.group import dilate, group_mul, horizontal_point, vector_at


def test_flat_segment_lifts_flat():
    path = lift_planar(np.array([[0.0, 0.0], [1.0, 0.0]]), np.zeros(3))
    assert np.allclose(path.end(), [1.0, 0.0, 0.0], atol=1e-15)


def test_circle_lift_approaches_minus_four_pi():
    # enclosed area converts to height at rate -4; refinement tightens it
    errs = []
    for m in (100, 1000, 10_000):
        th = np.linspace(0.0, 2.0 * math.pi, m + 1)
        circle = np.stack([np.cos(th), np.sin(th)], axis=1)
        path = lift_planar(circle, np.array([1.0, 0.0, 0.0]))
        errs.append(abs(float(path.end()[-1]) + 4.0 * math.pi))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 1e-6


def test_lift_rejects_base_projection_mismatch():
    with pytest.raises(ValueError):
        lift_planar(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.5, 0.0, 0.0]))


def test_zero_motion_keeps_base():
    base = np.array([0.5, 0.5, 0.25])
    path = lift_planar(np.array([[0.5, 0.5], [0.5, 0.5]]), base)
    assert np.allclose(path.end(), base)


def test_lengths_and_speeds():
    path = lift_planar(np.array([[0.0, 0.0], [3.0, 0.0]]), np.zeros(3))
    assert horizontal_length(path) == pytest.approx(3.0)
    two = HorizontalPath(np.array([0.0, 1.0]), np.array([[0.0, 0.0], [2.0, 0.0]]), 0.0)
    assert lipschitz_constant(two) == pytest.approx(2.0)
    line = line_path(np.array([0.3, -0.4, 0.9]), np.array([0.6, 0.8]), -1.0, 2.0)
    assert lipschitz_constant(line) == pytest.approx(1.0)


def test_left_translation_preserves_geometry():
    rng = np.random.default_rng(3)
    planar = np.cumsum(rng.standard_normal((6, 2)), axis=0)
    path = lift_planar(planar, np.concatenate([planar[0], [0.7]]))
    g = rng.standard_normal(3)
    moved = path.left_translate(g)
    assert horizontal_length(moved) == pytest.approx(horizontal_length(path), abs=1e-12)
    assert lipschitz_constant(moved) == pytest.approx(lipschitz_constant(path), abs=1e-12)
    ts = np.linspace(path.t_min, path.t_max, 9)
    assert np.allclose(moved.eval(ts), group_mul(g, path.eval(ts)), atol=1e-10)


class TestGammaY:
    def test_frozen_h1_example(self):
        path = gamma_y(np.array([1.0, 0.0, 1.0]))
        assert np.allclose(path.end(), [1.0, 0.0, 1.0], atol=1e-15)
        assert np.allclose(path.eval(0.5), [0.5, 0.5, 0.0], atol=1e-15)
        assert horizontal_length(path) == pytest.approx(math.sqrt(2.0))
        lip = lipschitz_constant(path)
        assert lip == pytest.approx(math.sqrt(2.0))
        assert lip <= math.sqrt(6.0)
        second_leg, _ = path.derivative(0.75)
        dev = np.linalg.norm(second_leg - np.array([1.0, 0.0, 0.0]))
        assert dev == pytest.approx(math.sqrt(5.0))

    def test_flat_target_collapses_to_chord(self):
        path = gamma_y(np.array([1.0, 0.0, 0.0]))
        assert lipschitz_constant(path) == pytest.approx(1.0)
        ts = np.linspace(0, 1, 7)
        assert np.allclose(path.eval(ts)[:, 1], 0.0)

    def test_rejects_vertical_targets(self):
        with pytest.raises(ValueError):
            gamma_y(np.array([0.0, 0.0, 1.0]))

    def test_posts_on_random_targets(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            n = int(rng.integers(1, 3))
            y = rng.standard_normal(2 * n + 1)
            L = np.linalg.norm(y[:-1])
            if L < 1e-3:
                continue
            c = y[-1]
            path = gamma_y(y)
            scale = 1.0 + c * c / L**2 + float(np.max(np.abs(y)))
            assert np.max(np.abs(path.end() - y)) <= 1e-12 * scale
            bound = L * math.sqrt(1 + c**2 / L**4 + 4 * c**2 / L**2)
            assert lipschitz_constant(path) <= bound * (1 + 1e-12)
            dev_bound = abs(c) / L * math.sqrt(1 + 4 * L**2)
            flat = np.concatenate([y[:-1], [0.0]])
            for tq in (0.2, 0.8):
                d, _ = path.derivative(tq)
                assert np.linalg.norm(d - flat) <= dev_bound * (1 + 1e-9) + 1e-12 * scale

    def test_rational_payload(self):
        path = gamma_y([1, 0, 1], rational=True)
        knots, rows, c0 = path.rational
        assert rows[1] == (Fraction(1, 2), Fraction(1, 2))
        assert c0 == 0


class TestModifyLine:
    def params(self, **over):
        defaults = dict(
            x=np.zeros(3),
            u=np.array([0.0, 1.0, 0.0]),
            direction=np.array([1.0, 0.0]),
            r=1e-6,
            delta=1e-5,
            eta=0.1,
        )
        defaults.update(over)
        return ModifyLineParams(**defaults)

    def test_detour_hits_target(self):
        params = self.params()
        path, zeta = modify_line(params)
        target = group_mul(params.x, dilate(params.r, params.u))
        assert np.allclose(path.eval(zeta), target, atol=1e-12)
        assert zeta == pytest.approx(params.r * float(params.u[:2] @ params.direction))

    def test_tails_follow_the_line(self):
        params = self.params(x=np.array([0.2, -0.7, 1.3]))
        path, _ = modify_line(params)
        for t in (-2.0 * params.s, -params.s, params.s, 1.7 * params.s):
            expected = group_mul(params.x, horizontal_point(t * params.direction))
            assert np.allclose(path.eval(t), expected, atol=1e-12)

    def test_speed_bound(self):
        params = self.params()
        path, _ = modify_line(params)
        assert lipschitz_constant(path) <= 1.0 + params.eta * params.delta

    def test_zero_detour_is_the_line(self):
        params = self.params(u=np.zeros(3))
        path, zeta = modify_line(params)
        assert zeta == 0.0
        ts = np.linspace(-params.s, params.s, 17)
        line = np.stack([t * vector_at(params.direction, np.zeros(3)) for t in ts])
        assert np.allclose(path.eval(ts), line, atol=1e-15)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            self.params(r=1e-4)  # r >= delta
        with pytest.raises(ValueError):
            self.params(delta=1e-3)  # above delta_cap(0.1)
        with pytest.raises(ValueError):
            self.params(direction=np.array([1.0, 1.0]))  # not unit
        with pytest.raises(ValueError):
            ModifyLineParams(
                x=np.zeros(3), u=np.array([0.0, 1.0, 0.0]), direction=np.array([1.0, 0.0]),
                r=1e-6, delta=1e-5, eta=0.1, cc_bound_of_u=1.5,
            )

    def test_delta_cap(self):
        assert delta_cap(1632.0 * 0.25) == pytest.approx(0.25)
        with pytest.raises(ValueError):
            delta_cap(0.0)

    def test_rational_payload_matches_floats(self):
        params = self.params(r=2.0**-20, delta=2.0**-18)
        path, zeta = modify_line(params, rational=True)
        knots, rows, c0 = path.rational
        assert [float(t) for t in knots] == pytest.approx(path.knots.tolist())
        assert float(c0) == pytest.approx(path.c0)


def test_derivative_reports_knots():
    path = gamma_y(np.array([1.0, 0.0, 1.0]))
    _, at_knot = path.derivative(0.5)
    assert at_knot
    _, interior = path.derivative(0.3)
    assert not interior


def test_path_serialization_roundtrip():
    path = gamma_y(np.array([1.0, 0.5, -0.5]))
    again = HorizontalPath.from_json(path.to_json())
    ts = np.linspace(0, 1, 11)
    assert np.allclose(again.eval(ts), path.eval(ts))
