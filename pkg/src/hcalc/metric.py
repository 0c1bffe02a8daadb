"""Carnot-Caratheodory distance brackets.

No closed formula for the distance is used anywhere: every query returns a
bracket [lower, upper].  The lower bound combines the projection norm and
the square-root bound on the height,

    d(z) >= max(|p(z)|, sqrt(|c|)),

both exact.  The upper bound is the measured length of an explicit witness
curve: either the two-leg construction of :func:`hcalc.curves.gamma_y`, or
a planar circular arc joining the projections whose lifted height closes
exactly on the target (projections of length minimizers are circular arcs,
so this family contains near-optimal competitors).  Arcs are realized as
inscribed polylines whose bulge is solved so that the polygonal enclosed
area, and hence the lifted height, is exact; the returned upper bound is
the actual polyline length and therefore always certified by the witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .curves import HorizontalPath, gamma_y, horizontal_length
from .group import (
    group_dim,
    group_inv,
    group_mul,
    horizontal_point,
    project,
    require_unit,
    vertical,
)

__all__ = [
    "VECTOR_FIELD_LIP",
    "DistanceBounds",
    "ConstantsEstimate",
    "Ball",
    "cc_lower",
    "cc_upper",
    "cc_bounds",
    "cc_upper_quick",
    "cc_upper_value_batch",
    "square_route_upper",
    "holder_fit",
    "angle_fit",
    "distance_pansu_check",
]

# Euclidean Lipschitz constant of unit horizontal fields: the gradient of the
# vertical component of E(x) has norm exactly 2*omega(E).
VECTOR_FIELD_LIP = 2.0


@dataclass(frozen=True)
class DistanceBounds:
    """Bracket for a Carnot-Caratheodory distance with an optional witness."""

    lower: float
    upper: float
    witness: Optional[HorizontalPath] = None

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("bounds must be finite")
        if self.lower < 0 or self.upper < 0:
            raise ValueError("bounds must be nonnegative")
        if self.lower > self.upper * (1 + 1e-12) + 1e-15:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        if self.witness is not None:
            length = horizontal_length(self.witness)
            scale = max(1.0, self.upper)
            if abs(length - self.upper) > 1e-10 * scale:
                raise ValueError("witness length does not certify the upper bound")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True)
class ConstantsEstimate:
    """Fitted comparison constants, tagged with the region that produced them.

    ``c_holder`` compares the distance with the Euclidean one on a compact
    set, ``c_angle`` controls the divergence of curves with close directions,
    ``c_modify`` the direction error of the line modification, ``c_vector``
    the Euclidean Lipschitz constant of unit horizontal fields.
    """

    c_holder: float = 1.0
    c_angle: float = 1.0
    c_modify: float = 1.0
    c_vector: float = VECTOR_FIELD_LIP
    region: str = ""
    samples: int = 0

    def __post_init__(self):
        for name in ("c_holder", "c_angle", "c_modify", "c_vector"):
            if getattr(self, name) < 1.0:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class Ball:
    """Euclidean ball region descriptor used by the sampling estimators."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def n(self) -> int:
        return group_dim(self.center)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        dim = self.center.shape[-1]
        v = rng.standard_normal((size, dim))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        radii = self.radius * rng.random(size) ** (1.0 / dim)
        return self.center + radii[:, None] * v

    def describe(self) -> str:
        return f"ball(r={self.radius:g}, n={self.n})"


def cc_lower(x: np.ndarray, y: np.ndarray) -> float:
    """Certified lower bound max(|p(x)-p(y)|, sqrt(|height of x^-1 y|))."""
    z = group_mul(group_inv(np.asarray(x, float)), np.asarray(y, float))
    return float(max(np.linalg.norm(project(z)), math.sqrt(abs(float(vertical(z))))))


def cc_lower_batch(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    z = group_mul(group_inv(x), y)
    return np.maximum(np.linalg.norm(project(z), axis=-1), np.sqrt(np.abs(vertical(z))))


def _chain_area_coeff(theta: np.ndarray, m: int) -> np.ndarray:
    # enclosed area of the inscribed chain over a unit chord, bulge theta
    s = np.sin(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        coeff = (m * np.sin(2.0 * theta / m) - np.sin(2.0 * theta)) / (8.0 * s * s)
    small = theta < 1e-6
    if np.any(small):
        coeff = np.where(small, theta * (1.0 - 1.0 / (m * m)) / 6.0, coeff)
    return coeff


def _solve_bulge(area_over_d2: np.ndarray, m: int, iters: int = 90) -> np.ndarray:
    """Solve chain_area_coeff(theta) = area_over_d2 on (0, pi) by bisection."""
    lo = np.zeros_like(area_over_d2)
    hi = np.full_like(area_over_d2, math.pi - 1e-12)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        too_small = _chain_area_coeff(mid, m) < area_over_d2
        lo = np.where(too_small, mid, lo)
        hi = np.where(too_small, hi, mid)
    return 0.5 * (lo + hi)


def _arc_chain_2d(D: float, theta: float, m: int) -> np.ndarray:
    """Vertices of the inscribed arc chain from (0,0) to (D,0), bulge up.

    Written relative to the chord so small bulges do not cancel against a
    distant circle center.
    """
    if theta <= 0.0:
        return np.array([[0.0, 0.0], [D, 0.0]])
    alphas = np.linspace(-theta, theta, m + 1)
    s = math.sin(theta)
    xs = 0.5 * D * (1.0 + np.sin(alphas) / s)
    ys = (D / s) * np.sin(0.5 * (alphas + theta)) * np.sin(0.5 * (theta - alphas))
    pts = np.stack([xs, ys], axis=1)
    pts[0] = [0.0, 0.0]
    pts[-1] = [D, 0.0]
    return pts


def _circle_chain_2d(area: float, m: int) -> np.ndarray:
    """Closed m-gon through the origin enclosing ``area`` counterclockwise."""
    rho = math.sqrt(abs(area) / (0.5 * m * math.sin(2.0 * math.pi / m)))
    sgn = 1.0 if area >= 0 else -1.0
    angles = math.pi + sgn * np.arange(m + 1) * (2.0 * math.pi / m)
    pts = np.array([rho, 0.0]) + rho * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    pts[0] = [0.0, 0.0]
    pts[-1] = [0.0, 0.0]
    return pts


def _ccw_area(chain: np.ndarray) -> float:
    x, y = chain[:, 0], chain[:, 1]
    return 0.5 * float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1]))


def _embed_chain(chain: np.ndarray, w: np.ndarray, n: int) -> np.ndarray:
    """Embed a 2d chain into the symplectic plane spanned by w/|w| and J(w/|w|)."""
    D = np.linalg.norm(w)
    if D == 0.0:
        e1 = np.zeros(2 * n)
        e1[0] = 1.0
        w_hat = e1
    else:
        w_hat = w / D
    j_w = np.concatenate([-w_hat[n:], w_hat[:n]])
    return chain[:, :1] * w_hat + chain[:, 1:] * j_w


def _chain_to_path(chain2d: np.ndarray, w: np.ndarray, n: int, x: np.ndarray) -> HorizontalPath:
    planar_rel = _embed_chain(chain2d, w, n)
    steps = np.linalg.norm(np.diff(planar_rel, axis=0), axis=1)
    total = float(np.sum(steps))
    if total == 0.0:
        knots = np.array([0.0, 1.0])
    else:
        knots = np.concatenate([[0.0], np.cumsum(steps)])
        knots[-1] = total
    rel = HorizontalPath(knots, planar_rel, 0.0)
    return rel.left_translate(x)


def _arc_witness(z: np.ndarray, n: int, x: np.ndarray) -> HorizontalPath:
    """Witness whose projection is an inscribed circular arc closing on z."""
    w = project(z)
    D = float(np.linalg.norm(w))
    c = float(vertical(z))
    target_ccw = -c / 4.0
    if D == 0.0:
        chain = _circle_chain_2d(target_ccw, 1024) if c != 0.0 else np.zeros((2, 2))
        return _chain_to_path(chain, w, n, x)
    if c == 0.0:
        return _chain_to_path(np.array([[0.0, 0.0], [D, 0.0]]), w, n, x)
    ratio = np.array(abs(target_ccw) / (D * D))
    if float(ratio) > 1e10:
        # bulge saturates in float; go straight to the projection, then close
        # the height with a full circle (out-and-back chord encloses nothing)
        circle = _circle_chain_2d(target_ccw, 1024) + np.array([D, 0.0])
        chain = np.vstack([[[0.0, 0.0]], circle])
        return _chain_to_path(chain, w, n, x)
    theta0 = float(_solve_bulge(ratio, 64))
    m = int(np.clip(math.ceil(theta0 / 0.02), 16, 1024))
    theta = float(_solve_bulge(ratio, m))
    chain = _arc_chain_2d(D, theta, m)
    if (target_ccw < 0.0) == (_ccw_area(chain) > 0.0):
        chain[:, 1] *= -1.0
    return _chain_to_path(chain, w, n, x)


def cc_upper(x: np.ndarray, y: np.ndarray):
    """Certified upper bound with its witness curve.

    Takes the shorter of the two-leg route and the exactly-closing circular
    arc (the full circle when the projections coincide) and returns
    ``(length, witness)`` where ``length`` is the measured length of the
    returned path.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = group_dim(x)
    z = group_mul(group_inv(x), y)
    D = float(np.linalg.norm(project(z)))
    c = float(vertical(z))
    if D == 0.0 and c == 0.0:
        trivial = HorizontalPath(np.array([0.0, 1.0]), np.stack([project(x)] * 2), float(vertical(x)))
        return 0.0, trivial
    candidates = [_arc_witness(z, n, x)]
    if D > 0.0:
        candidates.append(gamma_y(z).left_translate(x))
    best = min(candidates, key=horizontal_length)
    return horizontal_length(best), best


def cc_bounds(x: np.ndarray, y: np.ndarray) -> DistanceBounds:
    """Distance bracket with witness; the core comparison primitive."""
    upper, witness = cc_upper(x, y)
    lower = cc_lower(x, y)
    return DistanceBounds(min(lower, upper), upper, witness)


def cc_upper_value_batch(z: np.ndarray, m: int = 256) -> np.ndarray:
    """Vectorized witness-free upper bound of d(z, 0).

    Same inscribed-arc family as :func:`cc_upper` at a fixed chain
    resolution, taking the best of the closing arc, the two-leg route and
    the move-then-circle composite.  Lengths come from the closed-form
    inscribed-chain formulas, so no polyline is materialized.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    D = np.linalg.norm(project(z), axis=-1)
    c = np.abs(vertical(z))
    out = np.empty(len(z))
    # perimeter of the area-|c|/4 polygon through the origin
    sin_m = math.sin(2.0 * math.pi / 1024)
    rho = np.sqrt((c / 4.0) / (0.5 * 1024 * sin_m))
    circle_len = 2.0 * 1024 * rho * math.sin(math.pi / 1024)
    flat = c == 0.0
    vertical_only = (D == 0.0) & ~flat
    saturated = (D > 0.0) & ~flat & (c / 4.0 > 1e10 * D * D)
    generic = ~(flat | vertical_only | saturated)
    out[flat] = D[flat]
    out[vertical_only] = circle_len[vertical_only]
    out[saturated] = D[saturated] + circle_len[saturated]
    if np.any(generic):
        Dg, cg = D[generic], c[generic]
        theta = _solve_bulge(cg / (4.0 * Dg * Dg), m)
        arc = Dg * m * np.sin(theta / m) / np.sin(theta)
        legs = Dg * np.sqrt(1.0 + (cg * cg) / (Dg**4))
        out[generic] = np.minimum(np.minimum(arc, legs), Dg + circle_len[generic])
    return out


def cc_upper_quick(z: np.ndarray) -> np.ndarray:
    """Closed-form upper bound of d(z, 0); vectorized, no witness.

    min of the two-leg route length and a straight move to kill the
    projection followed by the optimal vertical circle.
    """
    z = np.asarray(z, dtype=float)
    D = np.linalg.norm(project(z), axis=-1)
    c = np.abs(vertical(z))
    with np.errstate(divide="ignore", invalid="ignore"):
        legs = D * np.sqrt(1.0 + (c * c) / (D * D * D * D))
    legs = np.where(D > 0.0, legs, np.inf)
    split_route = D + np.sqrt(math.pi * c)
    return np.where(c == 0.0, D, np.minimum(legs, split_route))


def square_route_upper(c: float) -> float:
    """Cross-check route for a purely vertical target: a square of area |c|/4."""
    return 2.0 * math.sqrt(abs(c))


def holder_fit(region: Ball, samples: int, seed: int) -> ConstantsEstimate:
    """Smallest constant making both Euclidean comparison inequalities hold.

    Uses the conservative side of each bracket: |x-y|/C <= lower and
    upper <= C |x-y|^(1/2) over all sampled pairs.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples for a constant fit")
    rng = np.random.default_rng(seed)
    xs = region.sample(rng, samples)
    ys = region.sample(rng, samples)
    e = np.linalg.norm(xs - ys, axis=1)
    keep = e > 0.0
    lo = cc_lower_batch(xs[keep], ys[keep])
    up = cc_upper_value_batch(group_mul(group_inv(xs[keep]), ys[keep]))
    c_fit = max(
        1.0,
        float(np.max(e[keep][lo > 0.0] / lo[lo > 0.0])) if np.any(lo > 0.0) else 1.0,
        float(np.max(up / np.sqrt(e[keep]))),
    )
    return ConstantsEstimate(c_holder=c_fit, region=region.describe(), samples=samples)


def angle_fit(
    speed_bound: float,
    trials: int,
    seed: int,
    n: int = 1,
    t_span: float = 1.0,
    grid: int = 33,
) -> ConstantsEstimate:
    """Fit the divergence constant for curves leaving a common point.

    Generates pairs (g, h) with g(0) = h(0), speeds <= speed_bound and
    projected derivatives within A of each other, and fits the smallest
    C >= 1 with d(g(t), h(t)) <= C sqrt(A) |t| over the sample, measuring
    d by its certified upper bound.
    """
    if speed_bound < 1.0:
        raise ValueError("speed bound below 1 leaves no unit directions")
    rng = np.random.default_rng(seed)
    ts = np.linspace(-t_span, t_span, grid)
    ts = ts[ts != 0.0]
    c_fit = 1.0

    def ratio_for(dir_g: np.ndarray, dir_h: np.ndarray, A: float) -> float:
        # straight pair: worst observed case is two lines at angle A
        ga = ts[:, None] * horizontal_point(dir_g)
        ha = ts[:, None] * horizontal_point(dir_h)
        ups = cc_upper_value_batch(group_mul(group_inv(ga), ha))
        return float(np.max(ups / (math.sqrt(A) * np.abs(ts))))

    for _ in range(trials):
        A = 10.0 ** rng.uniform(-4, 0)
        h_dir = rng.standard_normal(2 * n)
        h_dir /= np.linalg.norm(h_dir)
        pert = rng.standard_normal(2 * n)
        pert -= (pert @ h_dir) * h_dir
        norm = np.linalg.norm(pert)
        if norm == 0.0:
            continue
        g_dir = h_dir + A * pert / norm
        g_dir /= np.linalg.norm(g_dir)
        offset = float(np.linalg.norm(g_dir - h_dir))
        if offset == 0.0:
            continue
        c_fit = max(c_fit, ratio_for(g_dir, h_dir, min(offset, 1.0)))
    return ConstantsEstimate(c_angle=c_fit, region=f"speed<={speed_bound:g}, n={n}", samples=trials)


@dataclass
class DistancePansuReport:
    """Per-sample first-order expansion check of d near a horizontal point."""

    inequality_margins: np.ndarray
    residuals: np.ndarray
    scales: np.ndarray
    passed: bool = field(default=False)


def distance_pansu_check(u_dir: np.ndarray, z_samples: np.ndarray, tol: float = 1e-9) -> DistancePansuReport:
    """Check d(u z) >= d(u) + <z, u> and that the expansion residual decays.

    ``u_dir`` must be a unit horizontal direction; the checked point is
    u = u_dir embedded at height zero so d(u) = 1.  Residuals are measured
    conservatively from the distance brackets and normalized by the lower
    bracket of d(z).
    """
    u_dir = require_unit(np.asarray(u_dir, dtype=float))
    z_samples = np.atleast_2d(np.asarray(z_samples, dtype=float))
    if z_samples.shape[0] == 0:
        raise ValueError("empty sample set")
    u = horizontal_point(u_dir)
    margins = np.empty(len(z_samples))
    residuals = np.empty(len(z_samples))
    scales = np.empty(len(z_samples))
    origin = np.zeros_like(u)
    for i, z in enumerate(z_samples):
        uz = group_mul(u, z)
        ip = float(np.dot(project(z), u_dir))
        lo = cc_lower(origin, uz)
        up, _ = cc_upper(origin, uz)
        margins[i] = lo - (1.0 + ip)
        dz_lo = cc_lower(origin, z)
        dz_up, _ = cc_upper(origin, z)
        worst = max(up - (1.0 + ip), (1.0 + ip) - lo, 0.0)
        residuals[i] = worst / max(dz_lo, 1e-300)
        scales[i] = dz_up
    passed = bool(np.all(margins >= -tol))
    return DistancePansuReport(margins, residuals, scales, passed)
