import dataclasses
import json

import numpy as np
import pytest

from hcalc.calculus import ScalarField, hlinear_field
from hcalc.group import HLinearMap
from hcalc.maximizer import (
    IterationState,
    MaximizerConfig,
    Pair,
    Trajectory,
    comparison_le,
    default_t_grid,
    run,
    step,
    verify_trajectory,
)
from hcalc.uds import Cover

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


@pytest.fixture(scope="module")
def cover():
    return Cover.build(n=1, height=2, depth=12, max_lines=64)


@pytest.fixture(scope="module")
def linear_run(cover):
    f0 = hlinear_field(HLinearMap(0.5, E1), label="half-axis")
    cfg = MaximizerConfig(max_steps=6, budget=128, uds_level=6, seed=11)
    start = Pair.in_cover(np.zeros(3), E1, cover, 6)
    return run(f0, start, cfg, cover)


class TestConfigAndPair:
    def test_k_floor(self):
        with pytest.raises(ValueError):
            MaximizerConfig(K=4.0)

    def test_t_grid_domain(self):
        with pytest.raises(ValueError):
            MaximizerConfig(t_grid=np.array([0.5, 1.5]))

    def test_pair_unit_check(self):
        with pytest.raises(ValueError):
            Pair(np.zeros(3), np.array([1.0, 1.0]))

    def test_pair_cover_membership(self, cover):
        with pytest.raises(ValueError):
            Pair.in_cover(np.array([0.47, 1.93, 8.21]), E1, cover, 6)


class TestComparison:
    def test_reflexive(self):
        f = hlinear_field(HLinearMap(0.5, E1))
        p = Pair(np.zeros(3), E1)
        assert comparison_le(f, p, p, sigma=0.0, K=8.0, t_grid=default_t_grid()) is True

    def test_orthogonal_rejected_at_zero_slack(self):
        f = hlinear_field(HLinearMap(0.5, E1))
        p1 = Pair(np.zeros(3), E1)
        p2 = Pair(np.zeros(3), E2)
        assert comparison_le(f, p1, p2, sigma=0.0, K=8.0, t_grid=default_t_grid()) is False

    def test_generous_slack_admits(self):
        f = hlinear_field(HLinearMap(0.5, E1))
        p1 = Pair(np.zeros(3), E2)
        p2 = Pair(np.zeros(3), E1)
        assert comparison_le(f, p1, p2, sigma=1.0, K=8.0, t_grid=default_t_grid()) is True

    def test_sigma_validation(self):
        f = hlinear_field(HLinearMap(0.5, E1))
        p = Pair(np.zeros(3), E1)
        with pytest.raises(ValueError):
            comparison_le(f, p, p, sigma=-1.0, K=8.0, t_grid=default_t_grid())


class TestRun:
    def test_monotone_derivatives_and_clean_verify(self, linear_run):
        rep = verify_trajectory(linear_run)
        assert rep["clean"], rep["violations"]
        e = rep["e_values"]
        assert all(b > a for a, b in zip(e, e[1:]))
        assert e[0] == pytest.approx(0.5, abs=1e-10)

    def test_direction_locks_onto_the_gradient(self, linear_run):
        assert np.allclose(linear_run.final_pair().direction, E1)

    def test_field_shift_budget(self, linear_run):
        assert linear_run.field_shift_norm() <= linear_run.config.mu + 1e-12

    def test_schedules_decay_geometrically(self, linear_run):
        for s in linear_run.states[1:]:
            assert s.sigma <= 2.0 / 4.0**s.m

    def test_zero_steps_returns_start(self, cover):
        f0 = hlinear_field(HLinearMap(0.5, E1))
        start = Pair.in_cover(np.zeros(3), E1, cover, 6)
        traj = run(f0, start, MaximizerConfig(max_steps=0, seed=0), cover)
        assert len(traj.states) == 1
        assert np.array_equal(traj.final_pair().x, start.x)

    def test_negative_start_direction_is_flipped(self, cover):
        f0 = hlinear_field(HLinearMap(0.5, E1))
        start = Pair.in_cover(np.zeros(3), -E1, cover, 6)
        traj = run(f0, start, MaximizerConfig(max_steps=1, budget=32, seed=0), cover)
        assert traj.states[0].direction @ E1 > 0

    def test_requires_declared_lip(self, cover):
        f = ScalarField(lambda x: np.zeros(np.asarray(x).shape[:-1]))
        start = Pair(np.zeros(3), E1)
        with pytest.raises(ValueError):
            run(f, start, MaximizerConfig(max_steps=1), cover)

    def test_fast_fields_are_rescaled(self, cover):
        f = hlinear_field(HLinearMap(2.0, E1))
        start = Pair.in_cover(np.zeros(3), E1, cover, 6)
        traj = run(f, start, MaximizerConfig(max_steps=1, budget=32, seed=0), cover)
        assert traj.f0.declared_lip == pytest.approx(0.5)


class TestVerification:
    def test_corrupted_schedule_is_flagged(self, linear_run):
        states = list(linear_run.states)
        bad = dataclasses.replace(states[2], sigma=states[1].sigma)
        tampered = Trajectory([*states[:2], bad, *states[3:]], linear_run.f0, linear_run.config, linear_run.cover)
        rep = verify_trajectory(tampered)
        assert any("sigma" in v for v in rep["violations"])

    def test_corrupted_ball_is_flagged(self, linear_run):
        states = list(linear_run.states)
        bad = dataclasses.replace(states[2], delta=states[1].delta)
        tampered = Trajectory([*states[:2], bad, *states[3:]], linear_run.f0, linear_run.config, linear_run.cover)
        rep = verify_trajectory(tampered)
        assert any("delta" in v or "nested" in v for v in rep["violations"])

    def test_single_state_trajectory_is_clean(self, linear_run):
        solo = Trajectory(linear_run.states[:1], linear_run.f0, linear_run.config, linear_run.cover)
        rep = verify_trajectory(solo)
        assert rep["clean"]

    def test_empty_trajectory_rejected(self, linear_run):
        with pytest.raises(ValueError):
            verify_trajectory(Trajectory([], linear_run.f0, linear_run.config, linear_run.cover))


class TestStateLog:
    def test_jsonl_roundtrip(self, linear_run, tmp_path):
        out = tmp_path / "traj.jsonl"
        linear_run.write_jsonl(str(out))
        lines = out.read_text().strip().splitlines()
        assert json.loads(lines[0])["config"]["max_steps"] == linear_run.config.max_steps
        states = [IterationState.from_json(json.loads(line)) for line in lines[1:]]
        assert len(states) == len(linear_run.states)
        for a, b in zip(states, linear_run.states):
            assert a.m == b.m
            assert a.sigma == b.sigma
            assert np.allclose(a.x, b.x)

    def test_step_flags_vacuous_competition(self, cover):
        f0 = hlinear_field(HLinearMap(0.5, E1))
        state0 = IterationState(
            m=0, accum=np.zeros(2), x=np.zeros(3), direction=E1,
            sigma=2.0, t=0.25, delta=1.0, e_value=0.5,
        )
        rng = np.random.default_rng(0)
        nxt = step(state0, f0, MaximizerConfig(budget=16, seed=0), cover, rng)
        assert nxt.m == 1
        assert nxt.e_value > state0.e_value
