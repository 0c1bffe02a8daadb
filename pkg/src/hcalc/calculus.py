"""Directional derivatives, Lipschitz estimation and Pansu-derivative residuals.

Scalar fields are real functions on the group evaluated in batches: the
callable receives an array of shape ``(..., 2n+1)`` and returns ``(...)``.
Derivative estimators use symmetric difference quotients along horizontal
lines with Richardson extrapolation and report an error bar from the
successive quotient levels; a quotient sequence that grows twice in a row
is flagged as diverging instead of being extrapolated.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .group import (
    HLinearMap,
    group_inv,
    group_mul,
    dilate,
    koranyi_norm,
    require_unit,
    vector_at,
)
from .metric import Ball, cc_bounds, cc_upper_quick
from .curves import HorizontalPath

__all__ = [
    "ScalarField",
    "hlinear_field",
    "koranyi_gauge_field",
    "vertical_coordinate_field",
    "cc_distance_field",
    "lattice_max",
    "lattice_min",
    "DEFAULT_STEPS",
    "DerivativeEstimate",
    "directional_derivative",
    "directional_derivative_batch",
    "curve_directional_consistency",
    "lipschitz_estimate",
    "PansuReport",
    "pansu_residual",
    "MeanValueInstance",
    "MeanValueHypothesisError",
    "MeanValueSearchError",
    "mean_value_search",
    "almost_maximal_pair_check",
]


@dataclass(frozen=True)
class ScalarField:
    """Real function on the group, with an optional certified Lipschitz bound.

    ``declared_lip`` bounds |f(x)-f(y)| / d(x,y); sampled difference
    quotients against upper distance brackets must never exceed it.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    declared_lip: Optional[float] = None
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(x, dtype=float)), dtype=float)

    def shifted(self, coeffs: np.ndarray) -> "ScalarField":
        """Field plus the homomorphism x -> <p(x), coeffs>."""
        coeffs = np.asarray(coeffs, dtype=float)
        base = self.eval
        lip = None if self.declared_lip is None else self.declared_lip + float(np.linalg.norm(coeffs))
        return ScalarField(
            lambda x: np.asarray(base(x), dtype=float) + x[..., :-1] @ coeffs,
            declared_lip=lip,
            label=f"{self.label}+linear" if self.label else "shifted",
        )


def hlinear_field(L: HLinearMap, label: str = "") -> ScalarField:
    return ScalarField(L, declared_lip=L.lip, label=label or f"hlinear(lip={L.lip:g})")


def koranyi_gauge_field(center: Optional[np.ndarray] = None) -> ScalarField:
    """Gauge distance from a center point.  No certified CC-Lipschitz bound."""
    if center is None:
        return ScalarField(koranyi_norm, label="koranyi")
    c = np.asarray(center, dtype=float)
    return ScalarField(lambda x: koranyi_norm(group_mul(group_inv(c), x)), label="koranyi@c")


def vertical_coordinate_field() -> ScalarField:
    """The height coordinate.  Not CC-Lipschitz on unbounded sets."""
    return ScalarField(lambda x: x[..., -1], label="vertical")


def cc_distance_field(target: np.ndarray, max_rel_width: float = 0.5) -> ScalarField:
    """Bracket midpoint of the distance to ``target``.

    Raises when the bracket at a queried point is wider than
    ``max_rel_width`` times its midpoint, so callers never silently consume
    a poorly-determined value.
    """
    target = np.asarray(target, dtype=float)

    def ev(x: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(x)
        out = np.empty(pts.shape[0])
        for i, p in enumerate(pts):
            b = cc_bounds(target, p)
            if b.width > max_rel_width * max(b.midpoint, 1e-12):
                raise ValueError(f"distance bracket too wide at {p}: [{b.lower}, {b.upper}]")
            out[i] = b.midpoint
        return out.reshape(np.asarray(x).shape[:-1])

    return ScalarField(ev, label="cc-dist")


def lattice_max(*fields: ScalarField) -> ScalarField:
    lips = [f.declared_lip for f in fields]
    lip = None if any(v is None for v in lips) else max(lips)
    return ScalarField(
        lambda x: np.max(np.stack([f(x) for f in fields]), axis=0),
        declared_lip=lip,
        label="max(" + ",".join(f.label for f in fields) + ")",
    )


def lattice_min(*fields: ScalarField) -> ScalarField:
    lips = [f.declared_lip for f in fields]
    lip = None if any(v is None for v in lips) else max(lips)
    return ScalarField(
        lambda x: np.min(np.stack([f(x) for f in fields]), axis=0),
        declared_lip=lip,
        label="min(" + ",".join(f.label for f in fields) + ")",
    )


# Step schedule t_k = 2^-k for k = 6..20: robust for merely Lipschitz data.
DEFAULT_STEPS = 0.5 ** np.arange(6, 21)


@dataclass(frozen=True)
class DerivativeEstimate:
    value: float
    error: float
    quotients: np.ndarray
    diverging: bool = False

    @property
    def ok(self) -> bool:
        return not self.diverging and np.isfinite(self.value)


def _finish_quotients(q: np.ndarray, floors: np.ndarray) -> DerivativeEstimate:
    """Extrapolate a quotient ladder at its most trustworthy level.

    ``floors`` is the roundoff noise floor of each quotient level.  The
    returned value is the Richardson extrapolation at the level minimizing
    (extrapolation gap + noise), which avoids both the truncation error of
    coarse levels and the cancellation noise of the finest ones.  Growth of
    the quotient differences clearly above the noise floor at the tail is
    flagged as divergence.
    """
    diffs = np.abs(np.diff(q))
    rich = (4.0 * q[1:] - q[:-1]) / 3.0
    base = 1e-15 * (1.0 + float(np.max(np.abs(q))))
    floors = np.maximum(floors, base)
    diverging = bool(
        len(diffs) >= 3
        and diffs[-1] > diffs[-2] > diffs[-3]
        and diffs[-1] > 8.0 * float(floors[-1])
    )
    scores = np.abs(np.diff(rich)) + 2.0 * floors[2:]
    k = int(np.argmin(scores)) + 1
    value = float(rich[k])
    err = float(max(scores[k - 1], base))
    if diverging:
        err = max(err, float(diffs[-1]))
    return DerivativeEstimate(value, err, q, diverging)


def directional_derivative(
    f: ScalarField,
    x: np.ndarray,
    direction: np.ndarray,
    steps: Optional[np.ndarray] = None,
) -> DerivativeEstimate:
    """Derivative of f at x along the horizontal line of a unit direction.

    Symmetric quotients over a decreasing step schedule, Richardson
    order-2 extrapolation, error bar from the last extrapolation gap.
    """
    direction = require_unit(np.asarray(direction, dtype=float))
    x = np.asarray(x, dtype=float)
    steps = DEFAULT_STEPS if steps is None else np.asarray(steps, dtype=float)
    if len(steps) < 3 or np.any(np.diff(steps) >= 0) or np.any(steps <= 0):
        raise ValueError("steps must be >= 3 values decreasing to 0")
    e_x = vector_at(direction, x)
    pts_plus = x + steps[:, None] * e_x
    pts_minus = x - steps[:, None] * e_x
    vp, vm = np.asarray(f(pts_plus), float), np.asarray(f(pts_minus), float)
    q = (vp - vm) / (2.0 * steps)
    scale = float(max(np.max(np.abs(vp)), np.max(np.abs(vm)), 1.0))
    return _finish_quotients(q, 4.0 * np.finfo(float).eps * scale / steps)


def directional_derivative_batch(
    f: ScalarField,
    xs: np.ndarray,
    directions: np.ndarray,
    steps: Optional[np.ndarray] = None,
):
    """Vectorized derivative estimates: returns (values, errors, diverging)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    steps = DEFAULT_STEPS if steps is None else np.asarray(steps, dtype=float)
    e_xs = vector_at(directions, xs)
    pts_plus = xs[None, :, :] + steps[:, None, None] * e_xs[None, :, :]
    pts_minus = xs[None, :, :] - steps[:, None, None] * e_xs[None, :, :]
    vp, vm = np.asarray(f(pts_plus), float), np.asarray(f(pts_minus), float)
    q = (vp - vm) / (2.0 * steps[:, None])
    rich = (4.0 * q[1:] - q[:-1]) / 3.0
    scale = np.maximum(np.max(np.abs(vp), axis=0), np.max(np.abs(vm), axis=0))
    base = 1e-15 * (1.0 + np.max(np.abs(q), axis=0))
    floors = np.maximum(4.0 * np.finfo(float).eps * np.maximum(scale, 1.0)[None, :] / steps[:, None], base[None, :])
    scores = np.abs(np.diff(rich, axis=0)) + 2.0 * floors[2:]
    k = np.argmin(scores, axis=0) + 1
    cols = np.arange(q.shape[1])
    values = rich[k, cols]
    errors = np.maximum(scores[k - 1, cols], base)
    diffs = np.abs(np.diff(q, axis=0))
    diverging = (diffs[-1] > diffs[-2]) & (diffs[-2] > diffs[-3]) & (diffs[-1] > 8.0 * floors[-1])
    return values, errors, diverging


def _curve_quotients(f: ScalarField, path: HorizontalPath, at: float, steps: np.ndarray) -> DerivativeEstimate:
    vals_p = np.asarray(f(path.eval(at + steps)), float)
    vals_m = np.asarray(f(path.eval(at - steps)), float)
    q = (vals_p - vals_m) / (2.0 * steps)
    scale = float(max(np.max(np.abs(vals_p)), np.max(np.abs(vals_m)), 1.0))
    return _finish_quotients(q, 4.0 * np.finfo(float).eps * scale / steps)


def curve_directional_consistency(
    f: ScalarField,
    g: HorizontalPath,
    h: HorizontalPath,
    at: float,
    steps: Optional[np.ndarray] = None,
) -> dict:
    """Compare (f o g)' and (f o h)' at a common parameter.

    The curves must pass through the same point with the same derivative
    there; the derivative of f along either must then agree, and the report
    asserts agreement within the combined error bars.
    """
    steps = DEFAULT_STEPS if steps is None else np.asarray(steps, dtype=float)
    pg, ph = g.eval(at), h.eval(at)
    scale = max(1.0, float(np.max(np.abs(pg))))
    if not np.allclose(pg, ph, rtol=0.0, atol=1e-9 * scale):
        raise ValueError("curves do not meet at the common parameter")
    dg, _ = g.derivative(at)
    dh, _ = h.derivative(at)
    if not np.allclose(dg, dh, rtol=0.0, atol=1e-9 * max(1.0, float(np.max(np.abs(dg))))):
        raise ValueError("curve derivatives differ at the common parameter")
    # stay inside both domains
    max_step = min(at - g.t_min, g.t_max - at, at - h.t_min, h.t_max - at)
    steps = steps[steps <= max_step]
    if len(steps) < 3:
        raise ValueError("parameter too close to a domain endpoint")
    eg = _curve_quotients(f, g, at, steps)
    eh = _curve_quotients(f, h, at, steps)
    gap = abs(eg.value - eh.value)
    budget = eg.error + eh.error
    return {
        "deriv_along_g": eg.value,
        "deriv_along_h": eh.value,
        "gap": gap,
        "error_budget": budget,
        "consistent": bool(gap <= budget * 4.0 + 1e-12),
    }


def lipschitz_estimate(
    f: ScalarField,
    region: Ball,
    samples: int,
    directions: int,
    seed: int = 0,
) -> dict:
    """Sampled two-sided Lipschitz gauge of a field.

    ``pair_sup`` takes difference quotients against upper distance brackets
    (never overestimates the true constant); ``dir_sup`` is the largest
    sampled directional derivative.  Both converge to the same constant.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    xs = region.sample(rng, samples)
    ys = region.sample(rng, samples)
    fx, fy = f(xs), f(ys)
    pair_sup = 0.0
    z = group_mul(group_inv(xs), ys)
    uppers = cc_upper_quick(z)
    mask = uppers > 1e-12
    pair_sup = float(np.max(np.abs(fx - fy)[mask] / uppers[mask])) if np.any(mask) else 0.0
    pts = region.sample(rng, directions)
    dirs = rng.standard_normal((directions, 2 * region.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    values, errors, diverging = directional_derivative_batch(f, pts, dirs)
    usable = ~diverging
    dir_sup = float(np.max(np.abs(values[usable]))) if np.any(usable) else 0.0
    report = {
        "pair_sup": pair_sup,
        "dir_sup": dir_sup,
        "declared_lip": f.declared_lip,
        "max_error_bar": float(np.max(errors)),
        "diverging_fraction": float(np.mean(diverging)),
    }
    return report


@dataclass
class PansuReport:
    """Sup difference-quotient residuals of a candidate derivative, per radius."""

    candidate: HLinearMap
    radii: np.ndarray
    residuals: np.ndarray
    tol: float = 1e-3

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.residuals = np.asarray(self.residuals, dtype=float)
        if np.any(np.diff(self.radii) >= 0):
            raise ValueError("radii must be strictly decreasing")
        if np.any(self.residuals < 0):
            raise ValueError("residuals must be nonnegative")

    @property
    def accepted(self) -> bool:
        return bool(self.residuals[-1] <= self.tol)

    def to_json(self) -> dict:
        return {
            "lip": self.candidate.lip,
            "direction": self.candidate.direction.tolist(),
            "radii": self.radii.tolist(),
            "residuals": self.residuals.tolist(),
            "tol": self.tol,
            "accepted": self.accepted,
        }

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["radius", "residual"])
            for r, s in zip(self.radii, self.residuals):
                writer.writerow([repr(float(r)), repr(float(s))])


def sample_unit_ball(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    """Rejection-sample points with certified distance bound <= 1.

    Uses the closed-form upper bound of the distance to the origin, so no
    inadmissible point can slip in and inflate a supremum.
    """
    out = []
    while sum(len(o) for o in out) < count:
        cand = rng.uniform(-1.0, 1.0, size=(4 * count, 2 * n + 1))
        keep = cand[cc_upper_quick(cand) <= 1.0]
        out.append(keep)
    return np.vstack(out)[:count]


def pansu_residual(
    f: ScalarField,
    x: np.ndarray,
    L: HLinearMap,
    radii: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
    dir_samples: int = 256,
    seed: int = 0,
    tol: float = 1e-3,
) -> PansuReport:
    """Scaled residuals sup_w |f(x dil_t(w)) - f(x) - t L(w)| / t per radius t.

    The sup runs over sampled w certified to lie in the unit distance ball.
    The candidate is accepted as the derivative at x when the residual at
    the smallest radius falls below ``tol``.
    """
    x = np.asarray(x, dtype=float)
    n = (x.shape[-1] - 1) // 2
    rng = np.random.default_rng(seed)
    ws = sample_unit_ball(rng, n, dir_samples)
    f_x = float(f(x))
    lw = L(ws)
    radii = np.asarray(sorted(radii, reverse=True), dtype=float)
    res = np.empty(len(radii))
    for i, t in enumerate(radii):
        pts = group_mul(x, dilate(t, ws))
        res[i] = float(np.max(np.abs(f(pts) - f_x - t * lw))) / t
    return PansuReport(L, radii, res, tol=tol)


class MeanValueHypothesisError(ValueError):
    """A named hypothesis of the mean-value search is violated."""

    def __init__(self, name: str, detail: str = ""):
        self.hypothesis = name
        super().__init__(f"hypothesis violated: {name}" + (f" ({detail})" if detail else ""))


class MeanValueSearchError(RuntimeError):
    """No grid point satisfies both conclusions; carries the best candidate."""

    def __init__(self, best_tau: float, detail: str = ""):
        self.best_tau = best_tau
        super().__init__(f"no admissible grid point found; best candidate tau={best_tau}" + (f"; {detail}" if detail else ""))


@dataclass
class MeanValueInstance:
    """Grid data for the mean-value derivative search.

    ``grid`` is uniform; ``phi`` and ``psi`` are sampled on it.  The scalar
    parameters must satisfy |zeta| < s < rho, 0 < v < 1/32, phi = psi
    outside [-s, s], a linearization bound for psi at 0 with slope error
    sigma*L, a lower bound on rho and an upper bound on sigma in terms of
    the gap |phi(zeta) - psi(zeta)|.
    """

    grid: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    s: float
    zeta: float
    rho: float
    v: float
    sigma: float
    L: float

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float)
        h = np.diff(self.grid)
        if len(self.grid) < 9 or not np.allclose(h, h[0], rtol=1e-9):
            raise ValueError("grid must be uniform with at least 9 points")
        if self.phi.shape != self.grid.shape or self.psi.shape != self.grid.shape:
            raise ValueError("phi and psi must be sampled on the grid")

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def index_of(self, t: float) -> int:
        i = int(round((t - self.grid[0]) / self.step))
        if not (0 <= i < len(self.grid)) or abs(self.grid[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"{t} is not a grid point")
        return i


def _central_diff(vals: np.ndarray, h: float) -> np.ndarray:
    d = np.empty_like(vals)
    d[1:-1] = (vals[2:] - vals[:-2]) / (2.0 * h)
    d[0] = (vals[1] - vals[0]) / h
    d[-1] = (vals[-1] - vals[-2]) / h
    return d


def _check_hypotheses(inst: MeanValueInstance, margin: float = 1e-9):
    if not (abs(inst.zeta) < inst.s < inst.rho):
        raise MeanValueHypothesisError("|zeta| < s < rho")
    if not (0.0 < inst.v < 1.0 / 32.0):
        raise MeanValueHypothesisError("0 < v < 1/32")
    h = inst.step
    lip_sum = float(np.max(np.abs(np.diff(inst.phi))) + np.max(np.abs(np.diff(inst.psi)))) / h
    if lip_sum > inst.L * (1.0 + 1e-9):
        raise MeanValueHypothesisError("Lip(phi) + Lip(psi) <= L", f"{lip_sum} > {inst.L}")
    outside = np.abs(inst.grid) >= inst.s - 1e-12
    if not np.allclose(inst.phi[outside], inst.psi[outside], rtol=0.0, atol=1e-12):
        raise MeanValueHypothesisError("phi = psi outside [-s, s]")
    iz = inst.index_of(inst.zeta)
    gap = float(inst.phi[iz] - inst.psi[iz])
    if gap == 0.0:
        raise MeanValueHypothesisError("phi(zeta) != psi(zeta)")
    i0 = inst.index_of(0.0)
    psi_p0 = float(_central_diff(inst.psi, h)[i0])
    within = np.abs(inst.grid) <= inst.rho
    lin_err = np.abs(inst.psi[within] - inst.psi[i0] - inst.grid[within] * psi_p0)
    bound = inst.sigma * inst.L * np.abs(inst.grid[within]) + margin
    if np.any(lin_err > bound):
        raise MeanValueHypothesisError("|psi(t) - psi(0) - t psi'(0)| <= sigma L |t|")
    rho_floor = inst.s * math.sqrt(inst.s * inst.L / (inst.v * abs(gap)))
    if inst.rho < rho_floor - margin:
        raise MeanValueHypothesisError("rho >= s sqrt(sL / (v |gap|))", f"{inst.rho} < {rho_floor}")
    sigma_cap = inst.v**3 * (gap / (inst.s * inst.L)) ** 2
    if inst.sigma > sigma_cap + margin:
        raise MeanValueHypothesisError("sigma <= v^3 (gap / (sL))^2", f"{inst.sigma} > {sigma_cap}")
    return gap, psi_p0, i0, iz


def mean_value_search(inst: MeanValueInstance, exclude: Optional[set] = None) -> float:
    """Find tau in (-s, s) away from zeta with a large phi derivative.

    Verifies every hypothesis first (raising a named error on failure),
    then returns a grid point tau, not in ``exclude``, whose central
    difference derivative satisfies

        phi'(tau) >= psi'(0) + v |phi(zeta) - psi(zeta)| / s

    and for which every grid increment obeys

        |(phi(tau+t) - phi(tau)) - (psi(t) - psi(0))|
            <= 4 (1 + 20 v) sqrt((phi'(tau) - psi'(0)) L) |t|.

    Candidates are tried in order of decreasing derivative; if none passes,
    the best-derivative candidate is reported in the raised error.
    """
    exclude = exclude or set()
    gap, psi_p0, i0, iz = _check_hypotheses(inst)
    h = inst.step
    phi_p = _central_diff(inst.phi, h)
    need = psi_p0 + inst.v * abs(gap) / inst.s
    interior = (np.abs(inst.grid) < inst.s) & (np.arange(len(inst.grid)) != iz)
    interior &= np.array([i not in exclude for i in range(len(inst.grid))])
    cand = np.where(interior & (phi_p >= need))[0]
    if len(cand) == 0:
        raise MeanValueSearchError(float(inst.grid[int(np.argmax(np.where(interior, phi_p, -np.inf)))]),
                                   "no grid point reaches the derivative lower bound")
    order = cand[np.argsort(-phi_p[cand])]
    m = len(inst.grid)
    psi_rel = inst.psi - inst.psi[i0]
    best = order[0]
    for idx in order:
        slope = 4.0 * (1.0 + 20.0 * inst.v) * math.sqrt((phi_p[idx] - psi_p0) * inst.L)
        # align phi(tau + t) with psi(t): t grid offsets shared through k
        lo = max(0, i0 - idx)
        hi = min(m, m + i0 - idx)
        k = np.arange(lo, hi)
        t_vals = inst.grid[k] - inst.grid[i0]
        lhs = np.abs((inst.phi[k + idx - i0] - inst.phi[idx]) - psi_rel[k])
        if np.all(lhs <= slope * np.abs(t_vals) + 1e-12):
            return float(inst.grid[idx])
    raise MeanValueSearchError(float(inst.grid[best]), "derivative bound reached but increment bound failed")


def almost_maximal_pair_check(
    f: ScalarField,
    star: tuple,
    competitor: tuple,
    K: float,
    t_grid: np.ndarray,
    lip: Optional[float] = None,
    steps: Optional[np.ndarray] = None,
) -> Optional[bool]:
    """Does the competitor beat the star pair within the increment envelope?

    ``star`` and ``competitor`` are (point, unit direction) pairs.  Returns
    True when the competitor's derivative is at least the star's and the
    difference of line increments along the star direction is bounded by
    K |t| (gap * lip)^(1/4) on the grid; False when a violation is certain;
    None when derivative error bars straddle the decision.  A derivative
    gap within the combined error bars counts as equality (gap zero), so
    the reflexive comparison of a pair with itself decides True.
    """
    x_star, e_star = np.asarray(star[0], float), require_unit(np.asarray(star[1], float))
    x, e = np.asarray(competitor[0], float), require_unit(np.asarray(competitor[1], float))
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.abs(t_grid) >= 1.0):
        raise ValueError("t grid must lie in (-1, 1)")
    d_star = directional_derivative(f, x_star, e_star, steps)
    d_comp = directional_derivative(f, x, e, steps)
    gap = d_comp.value - d_star.value
    slack = d_comp.error + d_star.error
    if d_star.diverging or d_comp.diverging:
        return None
    if gap < -slack:
        return False
    # |gap| <= slack counts as equality within precision, with gap 0
    if lip is None:
        lip = f.declared_lip
    if lip is None:
        raise ValueError("need a Lipschitz bound: declared on the field or passed in")
    bound_lo = K * (max(gap - slack, 0.0) * lip) ** 0.25
    bound_hi = K * (max(gap + slack, 0.0) * lip) ** 0.25
    line_star = x_star + t_grid[:, None] * vector_at(e_star, x_star)
    line_x = x + t_grid[:, None] * vector_at(e_star, x)
    lhs = np.abs((f(line_x) - float(f(x))) - (f(line_star) - float(f(x_star))))
    t_abs = np.abs(t_grid)
    if np.all(lhs <= bound_lo * t_abs + 1e-12):
        return True
    if np.any(lhs > bound_hi * t_abs + 1e-12):
        return False
    return None
