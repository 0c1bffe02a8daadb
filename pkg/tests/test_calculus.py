import dataclasses
import math

import numpy as np
import pytest

from hcalc.calculus import (
    MeanValueHypothesisError,
    MeanValueInstance,
    MeanValueSearchError,
    PansuReport,
    ScalarField,
    almost_maximal_pair_check,
    cc_distance_field,
    curve_directional_consistency,
    directional_derivative,
    directional_derivative_batch,
    hlinear_field,
    koranyi_gauge_field,
    lattice_max,
    lattice_min,
    lipschitz_estimate,
    mean_value_search,
    pansu_residual,
    sample_unit_ball,
    vertical_coordinate_field,
)
from hcalc.curves import line_path
from hcalc.group import HLinearMap, group_mul, horizontal_point
from hcalc.metric import Ball, cc_upper_quick

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


class TestDirectionalDerivative:
    def test_hlinear_is_exact(self):
        f = hlinear_field(HLinearMap(1.0, E1))
        est = directional_derivative(f, np.zeros(3), E1)
        assert est.value == pytest.approx(1.0, abs=1e-10)
        assert est.ok

    def test_vertical_coordinate_vanishes_along_axis(self):
        est = directional_derivative(vertical_coordinate_field(), np.zeros(3), E1)
        assert est.value == pytest.approx(0.0, abs=1e-10)

    def test_constant_field(self):
        f = ScalarField(lambda x: np.full(np.asarray(x).shape[:-1], 3.0), declared_lip=0.0)
        est = directional_derivative(f, np.zeros(3), E1)
        assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_rejects_non_unit_direction(self):
        f = hlinear_field(HLinearMap(1.0, E1))
        with pytest.raises(ValueError):
            directional_derivative(f, np.zeros(3), np.array([1.0, 1.0]))

    def test_rejects_bad_schedule(self):
        f = hlinear_field(HLinearMap(1.0, E1))
        with pytest.raises(ValueError):
            directional_derivative(f, np.zeros(3), E1, steps=np.array([0.1, 0.2, 0.3]))

    def test_odd_symmetry(self):
        f = koranyi_gauge_field(np.array([2.0, 1.0, 0.3]))
        x = np.array([0.2, -0.5, 0.1])
        plus = directional_derivative(f, x, E1)
        minus = directional_derivative(f, x, -E1)
        assert plus.value == pytest.approx(-minus.value, abs=plus.error + minus.error + 1e-12)

    def test_discontinuity_flags_divergence(self):
        f = ScalarField(lambda x: np.sign(x[..., 0]), label="step")
        est = directional_derivative(f, np.zeros(3), E1)
        assert est.diverging
        assert not est.ok

    def test_batch_agrees_with_scalar(self):
        f = koranyi_gauge_field(np.array([3.0, 0.5, -0.2]))
        rng = np.random.default_rng(0)
        xs = rng.standard_normal((8, 3))
        dirs = rng.standard_normal((8, 2))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        vals, errs, div = directional_derivative_batch(f, xs, dirs)
        for i in range(8):
            est = directional_derivative(f, xs[i], dirs[i])
            assert vals[i] == pytest.approx(est.value, abs=1e-12)

    def test_translation_invariance_for_composed_homomorphism(self):
        L = HLinearMap(1.0, E1)
        g = np.array([0.4, -0.9, 2.2])
        f_shift = ScalarField(lambda x: L(group_mul(g, x)))
        for e in (E1, E2, np.array([0.6, 0.8])):
            a = directional_derivative(hlinear_field(L), np.zeros(3), e)
            b = directional_derivative(f_shift, np.zeros(3), e)
            assert a.value == pytest.approx(b.value, abs=1e-9)


class TestCurveConsistency:
    def test_identical_curves(self):
        f = koranyi_gauge_field(np.array([2.0, 1.0, 0.5]))
        g = line_path(np.zeros(3), E1, -1.0, 1.0)
        rep = curve_directional_consistency(f, g, g, at=0.2)
        assert rep["consistent"]
        assert rep["gap"] == 0.0

    def test_rejects_mismatched_points(self):
        f = koranyi_gauge_field(np.array([2.0, 1.0, 0.5]))
        g = line_path(np.zeros(3), E1, -1.0, 1.0)
        h = line_path(np.array([0.0, 0.5, 0.0]), E1, -1.0, 1.0)
        with pytest.raises(ValueError):
            curve_directional_consistency(f, g, h, at=0.0)

    def test_rejects_mismatched_derivatives(self):
        f = koranyi_gauge_field(np.array([2.0, 1.0, 0.5]))
        g = line_path(np.zeros(3), E1, -1.0, 1.0)
        h = line_path(np.zeros(3), E2, -1.0, 1.0)
        with pytest.raises(ValueError):
            curve_directional_consistency(f, g, h, at=0.0)


class TestLipschitzEstimate:
    def test_unit_homomorphism(self):
        f = hlinear_field(HLinearMap(1.0, E1))
        rep = lipschitz_estimate(f, Ball(np.zeros(3), 1.0), 2000, 300, seed=0)
        assert 0.9 <= rep["pair_sup"] <= 1.0 + 1e-9
        assert 0.95 <= rep["dir_sup"] <= 1.0 + 1e-6

    def test_constant_field(self):
        f = ScalarField(lambda x: np.zeros(np.asarray(x).shape[:-1]), declared_lip=0.0)
        rep = lipschitz_estimate(f, Ball(np.zeros(3), 1.0), 200, 100, seed=0)
        assert rep["pair_sup"] == 0.0
        assert rep["dir_sup"] == pytest.approx(0.0, abs=1e-12)

    def test_sample_floor(self):
        f = hlinear_field(HLinearMap(1.0, E1))
        with pytest.raises(ValueError):
            lipschitz_estimate(f, Ball(np.zeros(3), 1.0), 50, 100)


class TestPansuResidual:
    def test_homomorphism_is_its_own_derivative(self):
        L = HLinearMap(0.8, np.array([0.6, 0.8]))
        rep = pansu_residual(hlinear_field(L), np.array([0.3, 0.1, -0.7]), L, seed=1)
        assert np.max(rep.residuals) <= 1e-10
        assert rep.accepted

    def test_vertical_coordinate_scales_linearly(self):
        rep = pansu_residual(
            vertical_coordinate_field(), np.zeros(3), HLinearMap.from_coeffs(np.zeros(2)), seed=2
        )
        ratios = rep.residuals[:-1] / rep.residuals[1:]
        assert np.all(np.abs(ratios - 10.0) < 0.5)

    def test_report_validation(self):
        L = HLinearMap(1.0, E1)
        with pytest.raises(ValueError):
            PansuReport(L, np.array([1e-2, 1e-1]), np.array([0.0, 0.0]))
        with pytest.raises(ValueError):
            PansuReport(L, np.array([1e-1, 1e-2]), np.array([-1.0, 0.0]))

    def test_sampled_points_are_certified(self):
        rng = np.random.default_rng(3)
        ws = sample_unit_ball(rng, 1, 500)
        assert np.all(cc_upper_quick(ws) <= 1.0)


def _triangle_instance(grid_exp=12, slope=0.1, height=0.5, s=1.0, zeta_target=0.25, v=1 / 64, L=2.0):
    rho = s * math.sqrt(s * L / (v * height)) * 1.05
    m = 2**grid_exp
    grid = np.linspace(-rho * 1.01, rho * 1.01, m + 1)
    zeta = float(grid[np.argmin(np.abs(grid - zeta_target))])
    psi = slope * grid
    bump = height * np.clip(np.minimum((grid + s) / (zeta + s), (s - grid) / (s - zeta)), 0.0, None)
    phi = psi + np.where(np.abs(grid) >= s, 0.0, bump)
    sigma = 0.5 * v**3 * (height / (s * L)) ** 2
    return MeanValueInstance(grid, phi, psi, s=s, zeta=zeta, rho=rho, v=v, sigma=sigma, L=L)


class TestMeanValue:
    def test_triangle_bump_found_on_rising_edge(self):
        inst = _triangle_instance()
        tau = mean_value_search(inst)
        assert -inst.s < tau < inst.s
        assert tau != inst.zeta
        # the derivative bound certifies the conclusion directly
        h = inst.step
        i = inst.index_of(tau)
        phi_p = (inst.phi[i + 1] - inst.phi[i - 1]) / (2 * h)
        need = 0.1 + inst.v * 0.5 / inst.s
        assert phi_p >= need - 1e-9

    def test_exclusion_forces_the_choice(self):
        inst = _triangle_instance()
        iz = inst.index_of(inst.zeta)
        i_lo = int(np.searchsorted(inst.grid, -inst.s)) + 1
        allowed = set(range(i_lo + (iz - i_lo) // 3, i_lo + (iz - i_lo) // 2))
        exclude = set(range(len(inst.grid))) - allowed
        tau = mean_value_search(inst, exclude=exclude)
        assert inst.index_of(tau) in allowed

    def test_equal_functions_violate_hypotheses(self):
        inst = _triangle_instance()
        broken = dataclasses.replace(inst, phi=inst.psi.copy())
        with pytest.raises(MeanValueHypothesisError) as err:
            mean_value_search(broken)
        assert "phi(zeta)" in str(err.value)

    def test_named_hypothesis_failures(self):
        inst = _triangle_instance()
        with pytest.raises(MeanValueHypothesisError):
            mean_value_search(dataclasses.replace(inst, v=0.5))
        with pytest.raises(MeanValueHypothesisError):
            mean_value_search(dataclasses.replace(inst, rho=inst.s * 1.01))
        with pytest.raises(MeanValueHypothesisError):
            mean_value_search(dataclasses.replace(inst, sigma=1.0))
        with pytest.raises(MeanValueHypothesisError):
            mean_value_search(dataclasses.replace(inst, L=1e-6))

    def test_search_failure_reports_best_candidate(self):
        inst = _triangle_instance()
        iz = inst.index_of(inst.zeta)
        exclude = set(range(len(inst.grid))) - {iz}
        with pytest.raises(MeanValueSearchError):
            mean_value_search(inst, exclude=exclude)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            MeanValueInstance(
                np.array([0.0, 1.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]),
                np.zeros(9), np.zeros(9), s=1, zeta=0, rho=2, v=0.01, sigma=0.1, L=1,
            )


class TestAlmostMaximalCheck:
    def test_reflexive(self):
        f = hlinear_field(HLinearMap(0.5, E1))
        pair = (np.zeros(3), E1)
        grid = np.linspace(-0.9, 0.9, 19)
        assert almost_maximal_pair_check(f, pair, pair, K=6.0, t_grid=grid) is True

    def test_equal_derivative_translate(self):
        f = hlinear_field(HLinearMap(0.5, E1))
        grid = np.linspace(-0.9, 0.9, 19)
        star = (np.zeros(3), E1)
        comp = (horizontal_point(0.2 * E1), E1)
        assert almost_maximal_pair_check(f, star, comp, K=6.0, t_grid=grid) is True

    def test_smaller_derivative_rejected(self):
        f = hlinear_field(HLinearMap(0.5, E2))
        grid = np.linspace(-0.9, 0.9, 19)
        assert almost_maximal_pair_check(f, (np.zeros(3), E2), (np.zeros(3), E1), K=6.0, t_grid=grid) is False

    def test_indeterminate_on_divergent_estimates(self):
        f = ScalarField(lambda x: np.sign(x[..., 0]), declared_lip=1.0)
        grid = np.linspace(-0.9, 0.9, 5)
        out = almost_maximal_pair_check(f, (np.zeros(3), E1), (np.zeros(3), E1), K=6.0, t_grid=grid)
        assert out is None

    def test_requires_lip_bound(self):
        f = ScalarField(lambda x: x[..., 0])
        with pytest.raises(ValueError):
            almost_maximal_pair_check(f, (np.zeros(3), E1), (np.zeros(3), E1), K=6.0,
                                      t_grid=np.array([0.5]))

    def test_t_grid_validation(self):
        f = hlinear_field(HLinearMap(0.5, E1))
        with pytest.raises(ValueError):
            almost_maximal_pair_check(f, (np.zeros(3), E1), (np.zeros(3), E1), K=6.0,
                                      t_grid=np.array([1.5]))


class TestFieldLibrary:
    def test_lattice_bounds(self):
        f = lattice_max(hlinear_field(HLinearMap(0.7, E1)), hlinear_field(HLinearMap(0.4, E2)))
        assert f.declared_lip == pytest.approx(0.7)
        g = lattice_min(hlinear_field(HLinearMap(0.7, E1)), hlinear_field(HLinearMap(0.4, E2)))
        x = np.array([1.0, 1.0, 0.0])
        assert f(x) == pytest.approx(0.7)
        assert g(x) == pytest.approx(0.4)

    def test_cc_distance_field_guard(self):
        f = cc_distance_field(np.zeros(3), max_rel_width=1e-6)
        # wide bracket away from horizontal reach trips the guard
        with pytest.raises(ValueError):
            f(np.array([1.0, 0.0, 1.0]))
        # on a horizontal line through the target the bracket collapses
        tight = cc_distance_field(np.zeros(3), max_rel_width=1e-6)
        assert tight(horizontal_point(0.7 * E1)) == pytest.approx(0.7, abs=1e-9)

    def test_shifted_field(self):
        f = hlinear_field(HLinearMap(0.5, E1)).shifted(0.25 * E1)
        est = directional_derivative(f, np.zeros(3), E1)
        assert est.value == pytest.approx(0.75, abs=1e-10)
        assert f.declared_lip == pytest.approx(0.75)
