"""Finite realization of the almost-maximal directional derivative iteration.

Starting from a Lipschitz field f0 with speed bound 1/2 and a pair
(point, unit direction), each step adds a small homomorphism
t_{m-1} <., E_{m-1}(0)> to the field and then searches a finite candidate
set for a near-maximal directional derivative among pairs that stay inside
the current ball, remain in the tube cover, and satisfy an increment
comparison against the incumbent.  The schedules

    sigma_m = sigma_{m-1} / 5            (allowed: below sigma_{m-1}/4)
    t_m     = min(t_{m-1}/2, sigma_{m-1}/(4m)) / 2
    lambda_m = t_m sigma_m^4 / (4 C_a^4) (allowed: below .. / (2 C_a^4))

sit at interior points of their allowed open ranges; sigma_0 = 2 and
t_0 = min(1/4, mu/2).  The ball radius delta_m is found by halving until
the closed ball fits inside a level-m tube and the incumbent-vs-selected
increment inequality verifies on the configured grid.

The true candidate set is uncountable; the finite surrogate preserves
every checkable invariant but the near-maximality margin is only known
over the sampled candidates (the best-seen margin is recorded, global
optimality is not asserted).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calculus import (
    DEFAULT_STEPS,
    ScalarField,
    almost_maximal_pair_check,
    directional_derivative,
    directional_derivative_batch,
)
from .group import (
    group_inv,
    group_mul,
    horizontal_point,
    project,
    require_unit,
    vector_at,
)
from .metric import VECTOR_FIELD_LIP, cc_upper_quick
from .uds import Cover, rationalize_direction

__all__ = [
    "Pair",
    "IterationState",
    "MaximizerConfig",
    "Trajectory",
    "comparison_le",
    "comparison_required_sigma",
    "step",
    "run",
    "verify_trajectory",
    "default_t_grid",
]


@dataclass(frozen=True)
class Pair:
    """Candidate (point, unit horizontal direction)."""

    x: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "direction", require_unit(np.asarray(self.direction, dtype=float)))

    @classmethod
    def in_cover(cls, x, direction, cover: Cover, level: int) -> "Pair":
        pair = cls(x, direction)
        if not cover.contains(pair.x, level):
            raise ValueError("point is not a certified member of the cover at this level")
        return pair


@dataclass(frozen=True)
class IterationState:
    """One accepted step: field shift, selected pair and schedule values.

    ``accum`` holds the homomorphism coefficients defining the step-m field
    f_m = f0 + <p(.), accum>; ``lam`` and ``eps`` are None at step 0.
    """

    m: int
    accum: np.ndarray
    x: np.ndarray
    direction: np.ndarray
    sigma: float
    t: float
    delta: float
    lam: Optional[float] = None
    eps: Optional[float] = None
    e_value: float = 0.0
    candidates: int = 0
    indeterminate: int = 0
    flag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "accum", np.asarray(self.accum, dtype=float))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "direction", require_unit(np.asarray(self.direction, dtype=float)))

    def field(self, f0: ScalarField) -> ScalarField:
        return f0.shifted(self.accum) if np.any(self.accum != 0.0) else f0

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "accum": self.accum.tolist(),
            "x": self.x.tolist(),
            "direction": self.direction.tolist(),
            "sigma": self.sigma,
            "t": self.t,
            "delta": self.delta,
            "lam": self.lam,
            "eps": self.eps,
            "e_value": self.e_value,
            "candidates": self.candidates,
            "indeterminate": self.indeterminate,
            "flag": self.flag,
        }

    @classmethod
    def from_json(cls, data: dict) -> "IterationState":
        return cls(
            m=data["m"],
            accum=np.asarray(data["accum"]),
            x=np.asarray(data["x"]),
            direction=np.asarray(data["direction"]),
            sigma=data["sigma"],
            t=data["t"],
            delta=data["delta"],
            lam=data["lam"],
            eps=data["eps"],
            e_value=data["e_value"],
            candidates=data.get("candidates", 0),
            indeterminate=data.get("indeterminate", 0),
            flag=data.get("flag", ""),
        )


def default_t_grid() -> np.ndarray:
    fine = 0.5 ** np.arange(1, 11)
    coarse = np.linspace(0.05, 0.95, 10)
    ts = np.unique(np.concatenate([fine, coarse]))
    return np.concatenate([-ts[::-1], ts])


@dataclass
class MaximizerConfig:
    """Knobs of the iteration; defaults match the schedule description above."""

    delta0: float = 1.0
    mu: float = 0.5
    K: float = 8.0
    budget: int = 512
    max_steps: int = 10
    uds_level: int = 10
    c_angle: float = 2.0
    c_holder: float = 4.0
    seed: int = 0
    t_grid: np.ndarray = field(default_factory=default_t_grid)
    deriv_steps: np.ndarray = field(default_factory=lambda: DEFAULT_STEPS)

    def __post_init__(self):
        if self.K < 8.0:
            raise ValueError("K must be at least 8")
        if min(self.delta0, self.mu) <= 0:
            raise ValueError("delta0 and mu must be positive")
        if self.c_angle < 1.0 or self.c_holder < 1.0:
            raise ValueError("comparison constants must be >= 1")
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        if np.any(np.abs(self.t_grid) >= 1.0) or np.all(self.t_grid == 0.0):
            raise ValueError("t grid must be nonzero values in (-1, 1)")

    def to_json(self) -> dict:
        return {
            "delta0": self.delta0,
            "mu": self.mu,
            "K": self.K,
            "budget": self.budget,
            "max_steps": self.max_steps,
            "uds_level": self.uds_level,
            "c_angle": self.c_angle,
            "c_holder": self.c_holder,
            "seed": self.seed,
        }


def _increments(h: ScalarField, x: np.ndarray, e_line: np.ndarray, t_grid: np.ndarray) -> np.ndarray:
    pts = x + t_grid[:, None] * vector_at(e_line, x)
    return np.asarray(h(pts), float) - float(h(x))


def comparison_required_sigma(
    h: ScalarField,
    pair1: Pair,
    pair2: Pair,
    K: float,
    t_grid: np.ndarray,
    steps: Optional[np.ndarray] = None,
):
    """Data deciding pair1 <=_(h, sigma) pair2 for any slack sigma.

    Returns (ordering_ok, required_sigma, gap_lo, slack) where
    ``required_sigma`` is the smallest slack making the increment bound
    hold on the grid, computed against the conservative derivative gap.
    ``ordering_ok`` is None when the error bars straddle the ordering.
    """
    d1 = directional_derivative(h, pair1.x, pair1.direction, steps)
    d2 = directional_derivative(h, pair2.x, pair2.direction, steps)
    slack = d1.error + d2.error
    if d1.diverging or d2.diverging:
        return None, math.inf, 0.0, slack
    if d1.value - d2.value > slack:
        return False, math.inf, 0.0, slack
    gap_lo = max(d2.value - d1.value - slack, 0.0)
    inc1 = _increments(h, pair1.x, pair1.direction, t_grid)
    inc2 = _increments(h, pair2.x, pair1.direction, t_grid)
    lhs = np.abs(inc2 - inc1)
    needed = lhs / (K * np.abs(t_grid)) - gap_lo**0.25
    return True, float(max(np.max(needed), 0.0)), gap_lo, slack


def comparison_le(
    h: ScalarField,
    pair1: Pair,
    pair2: Pair,
    sigma: float,
    K: float,
    t_grid: np.ndarray,
    steps: Optional[np.ndarray] = None,
) -> Optional[bool]:
    """Increment-constrained ordering of two pairs under the field h.

    True when pair2's derivative is at least pair1's and the line
    increments along pair1's direction differ by at most
    K (sigma + gap^(1/4)) |t| over the grid; None when derivative error
    bars prevent a certified decision either way.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    ordering, required, gap_lo, slack = comparison_required_sigma(h, pair1, pair2, K, t_grid, steps)
    if ordering is None:
        return None
    if ordering is False:
        return False
    if required <= sigma:
        return True
    # retry the bound with the optimistic gap before declaring failure
    d1 = directional_derivative(h, pair1.x, pair1.direction, steps)
    d2 = directional_derivative(h, pair2.x, pair2.direction, steps)
    gap_hi = max(d2.value - d1.value + slack, 0.0)
    inc1 = _increments(h, pair1.x, pair1.direction, t_grid)
    inc2 = _increments(h, pair2.x, pair1.direction, t_grid)
    lhs = np.abs(inc2 - inc1)
    if np.all(lhs <= K * (sigma + gap_hi**0.25) * np.abs(t_grid) + 1e-12):
        return None
    return False


def _candidate_points(cover: Cover, center: np.ndarray, radius: float, rng: np.random.Generator, count: int) -> np.ndarray:
    """Points on cover lines within the metric ball around ``center``.

    Sampling concentrates on the parameter window where each line can
    still meet the ball, so candidates exist at every ball scale.
    """
    pts = [center]
    per_line = max(3, count // max(len(cover.lines), 1))
    p_center = project(center)
    for base, vec, (t0, t1) in zip(cover._bases, cover._vecs, cover.spans):
        h = vec[:-1]
        h2 = float(h @ h)
        t_near = float((p_center - base[:-1]) @ h) / h2
        half = 2.0 * radius / math.sqrt(h2)
        lo = max(t0, t_near - half)
        hi = min(t1, t_near + half)
        if lo >= hi:
            continue
        ts = rng.uniform(lo, hi, per_line)
        cand = base + ts[:, None] * vec
        z = group_mul(group_inv(center), cand)
        keep = cc_upper_quick(z) < radius
        if np.any(keep):
            pts.append(cand[keep])
    pool = np.vstack([np.atleast_2d(p) for p in pts])
    if len(pool) > count:
        idx = rng.choice(len(pool) - 1, size=count - 1, replace=False) + 1
        pool = np.vstack([pool[:1], pool[idx]])
    return pool


def _candidate_directions(incumbent: np.ndarray, sigma: float, rng: np.random.Generator, count: int) -> np.ndarray:
    n2 = len(incumbent)
    dirs = [incumbent]
    near = max(1, count // 2)
    for _ in range(near):
        pert = incumbent + sigma * rng.standard_normal(n2)
        norm = np.linalg.norm(pert)
        if norm == 0.0:
            continue
        pert /= norm
        try:
            exact = rationalize_direction(pert, tol=min(1e-3, sigma / 8 + 1e-9))
            dirs.append(np.array([float(v) for v in exact]))
        except ValueError:
            dirs.append(pert)
    extra = max(0, count - len(dirs))
    if extra == 0:
        return np.stack(dirs)
    uniform = rng.standard_normal((extra, n2))
    uniform /= np.linalg.norm(uniform, axis=1, keepdims=True)
    return np.vstack([np.stack(dirs), uniform])


def _ball_in_tube(cover: Cover, level: int, x: np.ndarray, delta: float) -> bool:
    radii = cover.radii(level)
    d = cover.upper_distances(x[None, :], needed=radii)[0]
    return bool(np.any(d + delta <= radii))


def step(
    state: IterationState,
    f0: ScalarField,
    config: MaximizerConfig,
    cover: Cover,
    rng: np.random.Generator,
) -> IterationState:
    """One iteration: shift the field, then select a near-maximal admissible pair.

    The candidate set pairs points sampled on cover lines inside the
    current ball with directions near the incumbent (plus uniform ones);
    admissibility requires the incumbent-rooted increment comparison with
    slack strictly inside (0, sigma_{m-1}).  The arg-max of the derivative
    estimates is selected, so the near-maximality condition holds on the
    sampled set by construction; indeterminate comparisons are counted and
    skipped.
    """
    m = state.m + 1
    accum = state.accum + state.t * state.direction
    f_m = f0.shifted(accum)
    sigma_prev, t_prev, delta_prev = state.sigma, state.t, state.delta
    sigma_m = sigma_prev / 5.0
    t_m = min(t_prev / 2.0, sigma_prev / (4.0 * m)) / 2.0
    lam_m = t_m * sigma_m**4 / (4.0 * config.c_angle**4)

    incumbent = Pair(state.x, state.direction)
    n_dirs = max(4, int(math.sqrt(config.budget)))
    n_pts = max(4, config.budget // n_dirs)
    points = _candidate_points(cover, state.x, delta_prev, rng, n_pts)
    dirs = _candidate_directions(state.direction, sigma_prev, rng, n_dirs)
    cand_x, cand_e = [incumbent.x], [incumbent.direction]
    for i in range(len(points)):
        for j in range(len(dirs)):
            if i == 0 and j == 0:
                continue
            cand_x.append(points[i])
            cand_e.append(dirs[j])
    cand_x = np.stack(cand_x)[: config.budget + 1]
    cand_e = np.stack(cand_e)[: config.budget + 1]

    values, errors, diverging = directional_derivative_batch(f_m, cand_x, cand_e, config.deriv_steps)
    d_prev = directional_derivative(f_m, state.x, state.direction, config.deriv_steps)
    inc_prev = _increments(f_m, state.x, state.direction, config.t_grid)

    best_idx, best_val, best_required = 0, values[0], 0.0
    indeterminate = 0
    t_abs = np.abs(config.t_grid)
    for i in range(len(cand_x)):
        if diverging[i]:
            indeterminate += 1
            continue
        if values[i] <= best_val:
            if i > 0:
                continue
        slack = errors[i] + d_prev.error
        if d_prev.value - values[i] > slack:
            continue  # ordering fails outright
        gap_lo = max(values[i] - d_prev.value - slack, 0.0)
        inc_i = _increments(f_m, cand_x[i], state.direction, config.t_grid)
        needed = np.max(np.abs(inc_i - inc_prev) / (config.K * t_abs) - gap_lo**0.25)
        required = max(float(needed), 0.0)
        if required >= sigma_prev * (1.0 - 1e-9):
            gap_hi = max(values[i] - d_prev.value + slack, 0.0)
            bound_hi = config.K * (sigma_prev + gap_hi**0.25) * t_abs
            if np.all(np.abs(inc_i - inc_prev) <= bound_hi + 1e-12):
                indeterminate += 1
            continue
        if i == 0 or values[i] > best_val:
            best_idx, best_val, best_required = i, values[i], required

    flag = "" if best_idx != 0 else "incumbent retained"
    x_m, e_m = cand_x[best_idx], cand_e[best_idx]
    eps_m = sigma_prev / 2.0 if best_required <= 0.0 else min(sigma_prev / 2.0, (sigma_prev - best_required) / 2.0)

    d_move = float(cc_upper_quick(group_mul(group_inv(state.x), x_m)))
    delta_m = max((delta_prev - d_move) / 4.0, 1e-300)
    e_sel = float(values[best_idx])
    inc_sel = _increments(f_m, x_m, e_m, config.t_grid)
    inc_prev_own = _increments(f_m, state.x, state.direction, config.t_grid)
    gap_sel = e_sel - d_prev.value + sigma_prev
    level = min(m, cover.depth)
    for _ in range(600):
        t_range = config.c_holder**2 * math.sqrt(1.0 + VECTOR_FIELD_LIP) * math.sqrt(delta_m) / eps_m
        sel = t_abs < t_range
        ok = np.all(np.abs(inc_sel - inc_prev_own)[sel] <= gap_sel * t_abs[sel] + 1e-12)
        if ok and _ball_in_tube(cover, level, x_m, delta_m) and delta_m + d_move < delta_prev:
            break
        delta_m /= 2.0
    else:
        flag = (flag + "; " if flag else "") + "delta search exhausted"

    return IterationState(
        m=m,
        accum=accum,
        x=x_m,
        direction=e_m,
        sigma=sigma_m,
        t=t_m,
        delta=delta_m,
        lam=lam_m,
        eps=eps_m,
        e_value=e_sel,
        candidates=len(cand_x),
        indeterminate=indeterminate,
        flag=flag,
    )


@dataclass
class Trajectory:
    """Accepted states of a run plus everything needed to re-verify it."""

    states: list
    f0: ScalarField
    config: MaximizerConfig
    cover: Cover

    def final_pair(self) -> Pair:
        s = self.states[-1]
        return Pair(s.x, s.direction)

    def final_field(self) -> ScalarField:
        return self.f0.shifted(self.states[-1].accum + self.states[-1].t * self.states[-1].direction)

    def field_shift_norm(self) -> float:
        s = self.states[-1]
        return float(np.linalg.norm(s.accum + s.t * s.direction))

    def write_jsonl(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(json.dumps({"config": self.config.to_json()}, sort_keys=True) + "\n")
            for s in self.states:
                fh.write(json.dumps(s.to_json(), sort_keys=True) + "\n")


def run(f0: ScalarField, start: Pair, config: MaximizerConfig, cover: Cover) -> Trajectory:
    """Full iteration from a starting pair.

    Requires a certified speed bound on f0; fields faster than 1/2 are
    rescaled.  A starting direction with negative derivative is flipped.
    Returns the trajectory of accepted states (max_steps of them, or fewer
    when the candidate search stalls).
    """
    if f0.declared_lip is None:
        raise ValueError("f0 needs a declared Lipschitz bound")
    if f0.declared_lip > 0.5:
        scale = 0.5 / f0.declared_lip
        base = f0
        f0 = ScalarField(lambda x: scale * np.asarray(base.eval(x), float),
                         declared_lip=0.5, label=f"scaled({base.label})")
    if not cover.contains(start.x, min(config.uds_level, cover.depth)):
        raise ValueError("starting point is not a certified cover member")
    d0 = directional_derivative(f0, start.x, start.direction, config.deriv_steps)
    direction0 = start.direction if d0.value >= 0 else -start.direction
    rng = np.random.default_rng(config.seed)
    sigma0, t0 = 2.0, min(0.25, config.mu / 2.0)
    states = [
        IterationState(
            m=0,
            accum=np.zeros_like(start.direction),
            x=start.x,
            direction=direction0,
            sigma=sigma0,
            t=t0,
            delta=config.delta0,
            e_value=abs(d0.value),
        )
    ]
    for _ in range(config.max_steps):
        states.append(step(states[-1], f0, config, cover, rng))
    return Trajectory(states, f0, config, cover)


def verify_trajectory(traj: Trajectory) -> dict:
    """Re-check every trajectory invariant from the log; lists violations.

    Covers the schedule inequalities, geometric decay of sigma, nested
    balls (with the certified upper distance), strictly increasing selected
    derivatives, direction drift within sigma, the total field shift, and
    the final pair's increment-envelope dominance over every recorded
    state within the final ball.
    """
    states = traj.states
    if not states:
        raise ValueError("empty trajectory")
    violations = []
    c4 = 2.0 * traj.config.c_angle**4
    e_values = []
    for s in states:
        f_s = s.field(traj.f0)
        e_values.append(directional_derivative(f_s, s.x, s.direction, traj.config.deriv_steps).value)
    for prev, s in zip(states, states[1:]):
        if not s.sigma < prev.sigma / 4.0:
            violations.append(f"m={s.m}: sigma not below a quarter of the previous")
        if not s.sigma <= 2.0 / 4.0**s.m:
            violations.append(f"m={s.m}: sigma exceeds 2/4^m")
        if not s.t < min(prev.t / 2.0, prev.sigma / (4.0 * s.m)):
            violations.append(f"m={s.m}: t out of schedule")
        if s.lam is None or not s.lam < s.t * s.sigma**4 / c4:
            violations.append(f"m={s.m}: lambda out of schedule")
        if s.eps is None or not (0.0 < s.eps < prev.sigma):
            violations.append(f"m={s.m}: eps out of range")
        move = float(cc_upper_quick(group_mul(group_inv(prev.x), s.x)))
        if not s.delta < (prev.delta - move) / 2.0:
            violations.append(f"m={s.m}: delta too large for nesting")
        if not move + s.delta < prev.delta:
            violations.append(f"m={s.m}: closed ball not nested")
    for i, j in ((i, j) for i in range(len(states)) for j in range(i + 1, len(states))):
        em, eq = states[i].direction, states[j].direction
        drift = float(cc_upper_quick(group_mul(group_inv(horizontal_point(em)), horizontal_point(eq))))
        if drift > states[i].sigma + 1e-12:
            violations.append(f"direction drift {drift:.3g} from m={states[i].m} to m={states[j].m} exceeds sigma")
    for i in range(1, len(e_values)):
        if not e_values[i] > e_values[i - 1]:
            violations.append(f"m={states[i].m}: selected derivative not strictly increasing")
    shift = traj.field_shift_norm()
    if shift > min(traj.config.mu, 2.0 * states[0].t) + 1e-12:
        violations.append(f"field shift {shift:.3g} exceeds the allowed budget")
    final = traj.final_pair()
    f_final = traj.final_field()
    lip_final = (traj.f0.declared_lip or 0.5) + shift
    for s in states[:-1]:
        move = float(cc_upper_quick(group_mul(group_inv(final.x), s.x)))
        if move > states[-1].delta:
            continue
        verdict = almost_maximal_pair_check(
            f_final, (s.x, s.direction), (final.x, final.direction),
            K=traj.config.K, t_grid=traj.config.t_grid, lip=lip_final,
            steps=traj.config.deriv_steps,
        )
        if verdict is False:
            violations.append(f"final pair fails the increment envelope against m={s.m}")
    return {
        "states": len(states),
        "violations": violations,
        "clean": not violations,
        "e_values": e_values,
        "final_sigma": states[-1].sigma,
        "field_shift": shift,
    }
