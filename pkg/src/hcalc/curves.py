"""Horizontal curves as exactly-lifted planar polylines.

A path stores knot parameters, the projected positions at the knots (linear
in between) and the height at the first knot.  The height elsewhere is not
stored: on a straight projected segment the lift identity

    c'(t) = 2 sum_i (g_i'(t) g_{n+i}(t) - g_{n+i}'(t) g_i(t))

has a constant integrand, so the height increment of each segment is the
closed form 2(<da, b_j> - <db, a_j>) and horizontality is exact by
construction rather than approximate.

Besides plain lifting this module builds the two special constructions used
everywhere downstream: the two-leg curve joining 0 to an arbitrary point
with controlled speed and direction (``gamma_y``), and the modification of
a horizontal line so that it detours through a prescribed nearby point
while keeping its speed within 1 + eta*delta (``modify_line``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .group import (
    group_dim,
    group_inv,
    group_mul,
    horizontal_point,
    project,
    require_unit,
)

__all__ = [
    "HorizontalPath",
    "lift_planar",
    "horizontal_length",
    "lipschitz_constant",
    "gamma_y",
    "ModifyLineParams",
    "modify_line",
    "modify_line_probe",
    "line_path",
    "delta_cap",
    "MODIFY_DELTA_DIVISOR",
]

# Proven admissibility threshold for the line modification: delta < eta / 1632.
MODIFY_DELTA_DIVISOR = 1632.0


def delta_cap(eta: float) -> float:
    """Largest admissible detour parameter for a given speed slack eta."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    return min(eta / MODIFY_DELTA_DIVISOR, 0.5)


@dataclass(frozen=True)
class HorizontalPath:
    """Piecewise-linear projected path with its exact height lift.

    ``knots`` are strictly increasing parameters, ``planar`` the projected
    positions at the knots (shape ``(len(knots), 2n)``), ``c0`` the height at
    ``knots[0]``.  ``rational`` optionally carries the same data as exact
    fractions when the path was built from rational inputs.
    """

    knots: np.ndarray
    planar: np.ndarray
    c0: float
    rational: Optional[tuple] = None  # (knots, planar rows, c0) as Fractions

    def __post_init__(self):
        knots = np.atleast_1d(np.asarray(self.knots, dtype=float))
        planar = np.asarray(self.planar, dtype=float)
        if planar.ndim != 2 or planar.shape[0] != knots.shape[0]:
            raise ValueError("planar must have one row per knot")
        if knots.shape[0] < 2:
            raise ValueError("a path needs at least two knots")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if not (np.all(np.isfinite(knots)) and np.all(np.isfinite(planar))):
            raise ValueError("path data must be finite")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "planar", planar)
        object.__setattr__(self, "c0", float(self.c0))
        n = planar.shape[1] // 2
        if planar.shape[1] != 2 * n or n < 1:
            raise ValueError("planar rows must have even length >= 2")
        da = np.diff(planar[:, :n], axis=0)
        db = np.diff(planar[:, n:], axis=0)
        dc = 2.0 * (np.sum(da * planar[:-1, n:], axis=1) - np.sum(db * planar[:-1, :n], axis=1))
        heights = self.c0 + np.concatenate([[0.0], np.cumsum(dc)])
        object.__setattr__(self, "_heights", heights)

    @property
    def n(self) -> int:
        return self.planar.shape[1] // 2

    @property
    def t_min(self) -> float:
        return float(self.knots[0])

    @property
    def t_max(self) -> float:
        return float(self.knots[-1])

    @property
    def heights(self) -> np.ndarray:
        """Exact lifted height at each knot."""
        return self._heights

    def eval(self, t) -> np.ndarray:
        """Point on the path at parameter t (clamped to the domain)."""
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, self.knots[0], self.knots[-1])
        j = np.clip(np.searchsorted(self.knots, tc, side="right") - 1, 0, len(self.knots) - 2)
        span = self.knots[j + 1] - self.knots[j]
        u = (tc - self.knots[j]) / span
        p = self.planar[j] + u[..., None] * (self.planar[j + 1] - self.planar[j])
        c = self._heights[j] + u * (self._heights[j + 1] - self._heights[j])
        out = np.empty(t.shape + (2 * self.n + 1,))
        out[..., :-1] = p
        out[..., -1] = c
        return out

    def __call__(self, t) -> np.ndarray:
        return self.eval(t)

    def derivative(self, t):
        """Derivative vector at t and whether t sits on a knot.

        At a knot the right-hand derivative is returned (left-hand at the
        final knot); the flag marks that the two-sided derivative may fail.
        """
        t = float(t)
        if not (self.knots[0] <= t <= self.knots[-1]):
            raise ValueError("parameter outside the path domain")
        j = int(np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, len(self.knots) - 2))
        span = self.knots[j + 1] - self.knots[j]
        v = (self.planar[j + 1] - self.planar[j]) / span
        dc = (self._heights[j + 1] - self._heights[j]) / span
        at_knot = bool(np.any(np.isclose(self.knots, t, rtol=0.0, atol=1e-14)))
        return np.concatenate([v, [dc]]), at_knot

    def segment_speeds(self) -> np.ndarray:
        """Projected speed of each linear segment."""
        chord = np.linalg.norm(np.diff(self.planar, axis=0), axis=1)
        return chord / np.diff(self.knots)

    def start(self) -> np.ndarray:
        return self.eval(self.knots[0])

    def end(self) -> np.ndarray:
        return self.eval(self.knots[-1])

    def left_translate(self, g: np.ndarray) -> "HorizontalPath":
        """Path t -> g * path(t).  Preserves lengths, speeds and horizontality."""
        g = np.asarray(g, dtype=float)
        if group_dim(g) != self.n:
            raise ValueError("dimension mismatch in translation")
        new_c0 = group_mul(g, self.start())[-1]
        return HorizontalPath(self.knots, self.planar + project(g), new_c0)

    def reparametrized(self, scale: float, shift: float) -> "HorizontalPath":
        """Affine parameter change t -> scale * t + shift with scale > 0."""
        if scale <= 0:
            raise ValueError("scale must be positive")
        return HorizontalPath(scale * self.knots + shift, self.planar, self.c0)

    def to_json(self) -> dict:
        return {"knots": self.knots.tolist(), "planar": self.planar.tolist(), "c0": self.c0}

    @classmethod
    def from_json(cls, data: dict) -> "HorizontalPath":
        return cls(np.asarray(data["knots"]), np.asarray(data["planar"]), data["c0"])


def lift_planar(planar: np.ndarray, base: np.ndarray, knots=None) -> HorizontalPath:
    """Lift a planar polyline to the horizontal curve starting at ``base``.

    ``base`` must project onto the first vertex; the height along the lift
    follows the segmentwise closed form of the lift identity.
    """
    planar = np.asarray(planar, dtype=float)
    base = np.asarray(base, dtype=float)
    if planar.ndim != 2 or planar.shape[0] < 2:
        raise ValueError("need a polyline with at least two vertices")
    if planar.shape[1] + 1 != base.shape[-1]:
        raise ValueError("dimension mismatch between polyline and base point")
    if not np.allclose(base[:-1], planar[0], rtol=0.0, atol=1e-9 * max(1.0, float(np.max(np.abs(planar))))):
        raise ValueError("base point does not project onto the first vertex")
    if knots is None:
        # parametrize by chord length; merge zero-length steps
        steps = np.linalg.norm(np.diff(planar, axis=0), axis=1)
        steps = np.where(steps == 0.0, np.max(steps) * 1e-9 if np.max(steps) > 0 else 1.0, steps)
        knots = np.concatenate([[0.0], np.cumsum(steps)])
    else:
        knots = np.asarray(knots, dtype=float)
    return HorizontalPath(knots, planar, float(base[-1]))


def horizontal_length(path: HorizontalPath) -> float:
    """Horizontal length, i.e. Euclidean length of the projected polyline."""
    return float(np.sum(np.linalg.norm(np.diff(path.planar, axis=0), axis=1)))


def lipschitz_constant(path: HorizontalPath) -> float:
    """Lipschitz constant with respect to the Carnot-Caratheodory distance.

    Equals the maximal projected segment speed.
    """
    return float(np.max(path.segment_speeds()))


def line_path(x: np.ndarray, direction: np.ndarray, t0: float, t1: float) -> HorizontalPath:
    """The horizontal line t -> x + t * E(x) restricted to [t0, t1]."""
    x = np.asarray(x, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if t1 <= t0:
        raise ValueError("need t0 < t1")
    p = project(x)
    planar = np.stack([p + t0 * direction, p + t1 * direction])
    c0 = group_mul(x, t0 * horizontal_point(direction))[-1]
    return HorizontalPath(np.array([t0, t1]), planar, c0)


# -- exact-fraction helpers -------------------------------------------------
#
# The knot data of gamma_y and modify_line is rational whenever the inputs
# are: no square roots enter the knot positions.  These helpers mirror the
# float code on tuples of Fractions so covers can recover the exact lines a
# constructed curve travels along.


def _fr_point(seq) -> tuple:
    return tuple(Fraction(v) for v in seq)


def _fr_mul(x: tuple, y: tuple) -> tuple:
    n = (len(x) - 1) // 2
    a, b, c = x[:n], x[n : 2 * n], x[-1]
    a2, b2, c2 = y[:n], y[n : 2 * n], y[-1]
    cross = sum(a[i] * b2[i] for i in range(n)) - sum(b[i] * a2[i] for i in range(n))
    return tuple(a[i] + a2[i] for i in range(n)) + tuple(b[i] + b2[i] for i in range(n)) + (c + c2 - 2 * cross,)


def _fr_inv(x: tuple) -> tuple:
    return tuple(-v for v in x)


def _fr_dilate(r: Fraction, x: tuple) -> tuple:
    head = tuple(r * v for v in x[:-1])
    return head + (r * r * x[-1],)


def _fr_gamma_knots(y: tuple):
    """Exact planar knot rows (0, midpoint, p(y)) of the two-leg curve."""
    n = (len(y) - 1) // 2
    a, b, c = y[:n], y[n : 2 * n], y[-1]
    L2 = sum(v * v for v in a) + sum(v * v for v in b)
    if L2 == 0:
        raise ValueError("gamma_y is undefined for points with zero projection")
    half = Fraction(1, 2)
    mid = tuple(half * (a[i] - b[i] * c / L2) for i in range(n)) + tuple(
        half * (b[i] + a[i] * c / L2) for i in range(n)
    )
    zero = tuple(Fraction(0) for _ in range(2 * n))
    return [zero, mid, tuple(a) + tuple(b)]


def gamma_y(y, rational: bool = False) -> HorizontalPath:
    """Two-leg horizontal curve on [0, 1] joining 0 to y, for p(y) != 0.

    The projected midpoint is (a - b c / L^2, b + a c / L^2) / 2 with
    L = |p(y)|, which makes the lifted height land exactly on c at t = 1.
    Its speed never exceeds L (1 + c^2/L^4 + 4 c^2/L^2)^(1/2) and each leg's
    derivative stays within (c/L)(1 + 4 L^2)^(1/2) of (a, b, 0).

    With ``rational=True`` the inputs must be exactly representable and the
    returned path carries its knot data as fractions.
    """
    if rational:
        yf = _fr_point(y)
        rows = _fr_gamma_knots(yf)
        knots = (Fraction(0), Fraction(1, 2), Fraction(1))
        planar = np.array([[float(v) for v in row] for row in rows])
        path = HorizontalPath(
            np.array([0.0, 0.5, 1.0]), planar, 0.0, rational=(knots, tuple(rows), Fraction(0))
        )
        return path
    y = np.asarray(y, dtype=float)
    n = group_dim(y)
    a, b, c = y[:n], y[n : 2 * n], y[-1]
    L2 = float(a @ a + b @ b)
    if L2 == 0.0:
        raise ValueError("gamma_y is undefined for points with zero projection")
    mid = 0.5 * np.concatenate([a - b * c / L2, b + a * c / L2])
    planar = np.stack([np.zeros(2 * n), mid, np.concatenate([a, b])])
    return HorizontalPath(np.array([0.0, 0.5, 1.0]), planar, 0.0)


@dataclass(frozen=True)
class ModifyLineParams:
    """Inputs of the line modification.

    The detour target is x * delta_r(u); ``delta`` controls how far the
    detour spreads along the line (half-width s = r / delta) and must stay
    below ``delta_cap(eta)`` for the speed bound 1 + eta*delta to be
    guaranteed.  ``cc_bound_of_u`` is a certified upper bound on d(u, 0),
    which must not exceed 1.
    """

    x: np.ndarray
    u: np.ndarray
    direction: np.ndarray
    r: float
    delta: float
    eta: float
    cc_bound_of_u: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))
        require_unit(self.direction)
        if not (0.0 < self.r < self.delta):
            raise ValueError("need 0 < r < delta")
        if not (self.delta < delta_cap(self.eta)):
            raise ValueError(f"delta must be below {delta_cap(self.eta):.3g} = delta_cap(eta)")
        if self.cc_bound_of_u > 1.0 + 1e-12:
            raise ValueError("u must come with a certified distance bound <= 1")

    @property
    def s(self) -> float:
        return self.r / self.delta

    @property
    def zeta(self) -> float:
        return float(self.r * np.dot(project(self.u), self.direction))


def _fr_modify_knot_data(x, u, direction, r, delta, span):
    """Exact knot parameters and planar rows of the modified line."""
    xf, uf = _fr_point(x), _fr_point(u)
    df = tuple(Fraction(v) for v in direction)
    rf, deltaf, spanf = Fraction(r), Fraction(delta), Fraction(span)
    n = len(df) // 2
    sf = rf / deltaf
    zetaf = rf * sum(uf[i] * df[i] for i in range(2 * n))

    def hpt(scale):
        return tuple(scale * d for d in df) + (Fraction(0),)

    target = _fr_mul(hpt(sf), _fr_dilate(rf, uf))  # (s E(0)) * delta_r(u)
    rows1 = _fr_gamma_knots(target)  # relative to x * (-s E(0))
    back = _fr_mul(_fr_dilate(rf, _fr_inv(uf)), hpt(sf))  # delta_r(u)^-1 * (s E(0))
    rows2 = _fr_gamma_knots(back)  # relative to x * delta_r(u)

    base_left = _fr_mul(xf, hpt(-sf))
    base_mid = _fr_mul(xf, _fr_dilate(rf, uf))
    p = lambda pt: pt[: 2 * n]

    def shift(rows, base):
        return [tuple(p(base)[i] + row[i] for i in range(2 * n)) for row in rows]

    rows1 = shift(rows1, base_left)
    rows2 = shift(rows2, base_mid)
    far_left = tuple(xf[i] - spanf * df[i] for i in range(2 * n))
    far_right = tuple(xf[i] + spanf * df[i] for i in range(2 * n))
    knots = (
        -spanf,
        -sf,
        (zetaf - sf) / 2,
        zetaf,
        (zetaf + sf) / 2,
        sf,
        spanf,
    )
    rows = [far_left, rows1[0], rows1[1], rows1[2], rows2[1], rows2[2], far_right]
    c0 = _fr_mul(xf, hpt(-spanf))[-1]
    return knots, rows, c0, sf, zetaf


def modify_line(params: ModifyLineParams, span: Optional[float] = None, rational: bool = False):
    """Modify the line t -> x + t E(x) to pass through x * delta_r(u).

    Returns ``(path, zeta)`` where the path agrees with the line for
    |t| >= s = r/delta, equals x * delta_r(u) at parameter
    zeta = r <u, E(0)>, has speed at most 1 + eta*delta and projected
    derivative within O(delta) of p(E) away from the knots.  The detour is
    assembled from two translated, reparametrized two-leg curves, one for
    each side of the target.

    ``span`` extends the straight tails to [-span, span] (default 2s).
    With ``rational=True`` all inputs must be exactly representable and the
    exact knot data is attached to the returned path.
    """
    s, zeta = params.s, params.zeta
    if span is None:
        span = 2.0 * s
    if span <= s:
        raise ValueError("span must exceed s")

    if rational:
        knots, rows, c0, sf, zetaf = _fr_modify_knot_data(
            params.x, params.u, params.direction, params.r, params.delta, span
        )
        path = HorizontalPath(
            np.array([float(t) for t in knots]),
            np.array([[float(v) for v in row] for row in rows]),
            float(c0),
            rational=(knots, tuple(rows), c0),
        )
        return path, float(zetaf)
    return _assemble_modified_line(params.x, params.u, params.direction, params.r, s, zeta, span)


def _assemble_modified_line(x, u, E, r, s, zeta, span):
    from .group import dilate as _dilate  # local alias keeps call sites short

    e0 = horizontal_point(E)
    target = group_mul(s * e0, _dilate(r, u))
    back = group_mul(_dilate(r, group_inv(u)), s * e0)
    if min(np.linalg.norm(project(target)), np.linalg.norm(project(back))) == 0.0:
        raise ValueError("degenerate modification: detour chord has zero projection")
    g1 = gamma_y(target)
    g2 = gamma_y(back)
    base_left = project(group_mul(x, -s * e0))
    base_mid = project(group_mul(x, _dilate(r, u)))
    px = project(x)
    rows = np.stack(
        [
            px - span * E,
            base_left + g1.planar[0],
            base_left + g1.planar[1],
            base_left + g1.planar[2],
            base_mid + g2.planar[1],
            base_mid + g2.planar[2],
            px + span * E,
        ]
    )
    knots = np.array([-span, -s, (zeta - s) / 2.0, zeta, (zeta + s) / 2.0, s, span])
    c0 = group_mul(x, -span * e0)[-1]
    return HorizontalPath(knots, rows, c0), zeta


def modify_line_probe(x, u, direction, r, delta, span=None):
    """Diagnostics-only modification with NO admissibility guarantee.

    Same construction as :func:`modify_line` but without the cap on
    ``delta``, so harnesses can measure how far past the proven threshold
    the speed and direction posts keep holding empirically.  Never use the
    result where the guaranteed bounds matter.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    direction = require_unit(np.asarray(direction, dtype=float))
    if not (0.0 < r < delta):
        raise ValueError("need 0 < r < delta")
    s = r / delta
    zeta = float(r * np.dot(project(u), direction))
    if span is None:
        span = 2.0 * s
    return _assemble_modified_line(x, u, direction, r, s, zeta, span)


def concat(paths: Sequence[HorizontalPath]) -> HorizontalPath:
    """Concatenate parameter-contiguous paths whose endpoints agree."""
    if not paths:
        raise ValueError("nothing to concatenate")
    knots = [paths[0].knots]
    rows = [paths[0].planar]
    for prev, nxt in zip(paths, paths[1:]):
        if abs(prev.t_max - nxt.t_min) > 1e-12:
            raise ValueError("paths are not parameter-contiguous")
        if not np.allclose(prev.end(), nxt.start(), rtol=0.0, atol=1e-9):
            raise ValueError("paths do not join continuously")
        knots.append(nxt.knots[1:])
        rows.append(nxt.planar[1:])
    return HorizontalPath(np.concatenate(knots), np.vstack(rows), paths[0].c0)
