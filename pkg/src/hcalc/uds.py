"""Truncated tube-cover model of the set of rational horizontal lines.

The ambient construction is a countable intersection of open sets, each a
union of metric tubes around all horizontal lines through rational data.
Here everything is finite and explicit: a deterministic enumeration of
lines (rational base point, primitive integer direction), clipped to a
box, with per-line tube radii r_{k,i} = c_k / 2^(i+1) where the level
constant c_k is solved so that an analytic bound on the total tube volume
is at most 2^-k.  Deeper levels use smaller radii, so membership is
monotone in the level.

Bases and directions are exact fractions; geometry queries convert to
floats, except that points given as fractions are tested for incidence
exactly, so points lying on an enumerated line are members at every level
regardless of how small the radii get.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .curves import HorizontalPath
from .metric import cc_upper_quick
from .group import group_inv, group_mul

__all__ = [
    "RationalLine",
    "stereographic_unit",
    "unit_preimage",
    "rationalize_direction",
    "enumerate_lines",
    "Box",
    "Cover",
    "lines_of_path",
    "wilson_interval",
]


def _canonical_direction(h: Sequence[int]) -> tuple:
    g = 0
    for v in h:
        g = math.gcd(g, abs(int(v)))
    if g == 0:
        raise ValueError("direction must be nonzero")
    h = tuple(int(v) // g for v in h)
    for v in h:
        if v != 0:
            return h if v > 0 else tuple(-w for w in h)
    raise ValueError("direction must be nonzero")


@dataclass(frozen=True)
class RationalLine:
    """Horizontal line through an exact rational base with rational direction.

    ``direction`` is stored as a primitive integer vector (content 1, first
    nonzero entry positive); the line is t -> base + t * E(base) where E is
    the horizontal field with these frame coefficients.  The base is stored
    with its projection orthogonal to the direction, which makes the pair a
    canonical key for the line as a point set.
    """

    base: tuple
    direction: tuple

    def __post_init__(self):
        direction = _canonical_direction(self.direction)
        base = tuple(Fraction(v) for v in self.base)
        if len(base) != len(direction) + 1:
            raise ValueError("base must have length 2n+1 for a 2n direction")
        n = len(direction) // 2
        vec = self._vector(base, direction, n)
        h2 = sum(v * v for v in direction)
        t_star = -sum(base[i] * direction[i] for i in range(2 * n)) / h2
        base = tuple(base[i] + t_star * vec[i] for i in range(2 * n + 1))
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", direction)

    @staticmethod
    def _vector(base: tuple, direction: tuple, n: int) -> tuple:
        a, b = base[:n], base[n : 2 * n]
        v_c = 2 * (
            sum(Fraction(direction[i]) * b[i] for i in range(n))
            - sum(Fraction(direction[n + i]) * a[i] for i in range(n))
        )
        return tuple(Fraction(d) for d in direction) + (v_c,)

    @property
    def n(self) -> int:
        return len(self.direction) // 2

    def vector(self) -> tuple:
        """Exact direction vector of the line in R^{2n+1} (constant along it)."""
        return self._vector(self.base, self.direction, self.n)

    def base_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.base])

    def vector_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.vector()])

    def point_at(self, t: Fraction) -> tuple:
        vec = self.vector()
        return tuple(self.base[i] + t * vec[i] for i in range(len(self.base)))

    def incidence_parameter(self, point: Sequence) -> Optional[Fraction]:
        """Exact parameter t with base + t*vector == point, or None."""
        pt = tuple(Fraction(v) for v in point)
        if len(pt) != len(self.base):
            return None
        vec = self.vector()
        t = None
        for i in range(len(vec)):
            if vec[i] != 0:
                t = (pt[i] - self.base[i]) / vec[i]
                break
        if t is None:
            return None
        return t if all(self.base[i] + t * vec[i] == pt[i] for i in range(len(vec))) else None


def stereographic_unit(q: Sequence) -> tuple:
    """Exact rational unit vector in R^m from a rational point in R^{m-1}."""
    q = tuple(Fraction(v) for v in q)
    s = sum(v * v for v in q)
    return tuple(2 * v / (s + 1) for v in q) + ((s - 1) / (s + 1),)


def unit_preimage(e: np.ndarray) -> np.ndarray:
    """Float stereographic preimage of a unit vector with e[-1] != 1."""
    e = np.asarray(e, dtype=float)
    return e[:-1] / (1.0 - e[-1])


def rationalize_direction(direction: np.ndarray, tol: float) -> tuple:
    """Exact rational unit direction within ``tol`` of a float unit direction.

    Round-trips through the stereographic chart, growing the denominator
    budget until the image is close enough.  Directions that are already
    exactly rational-unit are returned unchanged.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    e = np.asarray(direction, dtype=float)
    exact = tuple(Fraction(float(v)).limit_denominator(10**9) for v in e)
    if sum(v * v for v in exact) == 1 and all(abs(float(v) - w) <= 1e-15 for v, w in zip(exact, e)):
        return exact
    flip = e[-1] > 0  # keep the chart away from its pole
    target = -e if flip else e
    q = unit_preimage(target)
    for denom in (10, 100, 10**4, 10**6, 10**9, 10**12):
        qr = tuple(Fraction(float(v)).limit_denominator(denom) for v in q)
        cand = stereographic_unit(qr)
        img = np.array([float(v) for v in cand])
        if np.linalg.norm(img - target) <= tol:
            return tuple(-v for v in cand) if flip else cand
    raise ValueError("could not rationalize the direction to the requested tolerance")


def _fractions_up_to(height: int) -> list:
    vals = {Fraction(0)}
    for q in range(1, height + 1):
        for p in range(1, height + 1):
            vals.add(Fraction(p, q))
            vals.add(Fraction(-p, q))
    return sorted(vals)


def _complexity(v: Fraction) -> int:
    return max(abs(v.numerator), v.denominator)


def enumerate_lines(height: int, n: int = 1) -> Iterator[RationalLine]:
    """Deterministic enumeration of rational horizontal lines.

    Lines are produced in increasing complexity levels: at level l every
    line representable with base numerators/denominators and integer
    direction entries bounded by l (and not representable at level l-1)
    appears, sorted by (direction, base).  Consume lazily; the count grows
    combinatorially with the level.
    """
    if height < 1:
        raise ValueError("height must be >= 1")
    seen = set()
    for level in range(1, height + 1):
        fracs = [v for v in _fractions_up_to(level)]
        dirs = set()
        for h in product(range(-level, level + 1), repeat=2 * n):
            if any(h):
                dirs.add(_canonical_direction(h))
        batch = []
        for d in sorted(dirs):
            if max(abs(v) for v in d) > level:
                continue
            for base in product(fracs, repeat=2 * n + 1):
                if max(max(_complexity(v) for v in base), max(abs(v) for v in d)) != level:
                    continue
                line = RationalLine(base, d)
                key = (line.direction, line.base)
                if key not in seen:
                    seen.add(key)
                    batch.append(line)
        batch.sort(key=lambda l: (l.direction, l.base))
        yield from batch


@dataclass(frozen=True)
class Box:
    """Axis-aligned box region, the clip region of covers and MC sampling."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise ValueError("need lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, half_width: float, n: int) -> "Box":
        dim = 2 * n + 1
        return cls(-half_width * np.ones(dim), half_width * np.ones(dim))

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(size, len(self.lo)))

    def clip_line(self, base: np.ndarray, vec: np.ndarray):
        """Parameter interval where the line stays inside the box, or None."""
        t0, t1 = -np.inf, np.inf
        for b, v, lo, hi in zip(base, vec, self.lo, self.hi):
            if v == 0.0:
                if not (lo <= b <= hi):
                    return None
                continue
            a, b2 = (lo - b) / v, (hi - b) / v
            t0, t1 = max(t0, min(a, b2)), min(t1, max(a, b2))
        if not (np.isfinite(t0) and np.isfinite(t1)) or t0 >= t1:
            return None
        return float(t0), float(t1)


def wilson_interval(hits: int, n: int, z: float = 1.959963984540054) -> tuple:
    """95% Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("need at least one sample")
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _unit_ball_volume_bound(n: int) -> float:
    # metric unit ball sits inside {|p| <= 1} x {|c| <= 1}
    return 2.0 * math.pi**n / math.factorial(n)


class Cover:
    """Nested tube covers around a finite enumeration of rational lines.

    ``radii_constants[k-1]`` is the level-k constant c_k; line i at level k
    has tube radius c_k / 2^(i+1).  The constants are solved against an
    analytic volume bound (covering each tube by metric balls), so the
    total level-k tube volume is at most 2^-k by construction.
    """

    def __init__(self, lines: Sequence[RationalLine], depth: int, clip: Box, safety: float = 0.99,
                 meta: Optional[dict] = None):
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if not lines:
            raise ValueError("need at least one line")
        self.clip = clip
        self.depth = depth
        self.meta = dict(meta or {})
        self.n = lines[0].n
        kept, spans = [], []
        for line in lines:
            if line.n != self.n:
                raise ValueError("mixed dimensions in line enumeration")
            span = clip.clip_line(line.base_float(), line.vector_float())
            if span is not None:
                kept.append(line)
                spans.append(span)
        if not kept:
            raise ValueError("no line meets the clip box")
        self.lines = tuple(kept)
        self.spans = np.asarray(spans)
        speeds = np.array([np.linalg.norm(l.vector_float()[:-1]) for l in self.lines])
        self.lengths = (self.spans[:, 1] - self.spans[:, 0]) * speeds
        self.radii_constants = []
        prev = math.inf
        for k in range(1, depth + 1):
            c = self._solve_constant(2.0**-k * safety)
            c = min(c, prev)
            while self.volume_bound(c) > 2.0**-k:
                c *= 0.999
            self.radii_constants.append(c)
            prev = c
        self._bases = np.stack([l.base_float() for l in self.lines])
        self._vecs = np.stack([l.vector_float() for l in self.lines])

    def volume_bound(self, c: float) -> float:
        """Analytic upper bound of the total tube volume for constant c."""
        q = 2 * self.n + 2
        v_ball = _unit_ball_volume_bound(self.n)
        radii = c / 2.0 ** (np.arange(len(self.lines)) + 1)
        with np.errstate(divide="ignore"):
            counts = np.where(radii > 0, self.lengths / radii + 1.0, np.inf)
        terms = np.where(radii > 0, counts * (1.5 * radii) ** q * v_ball, 0.0)
        return float(np.sum(terms))

    def _solve_constant(self, target: float) -> float:
        lo, hi = 1e-300, 1e9
        for _ in range(300):
            mid = math.sqrt(lo * hi)
            if self.volume_bound(mid) > target:
                hi = mid
            else:
                lo = mid
        return lo

    def radius(self, level: int, index: int) -> float:
        self._check_level(level)
        return self.radii_constants[level - 1] / 2.0 ** (index + 1)

    def radii(self, level: int) -> np.ndarray:
        self._check_level(level)
        return self.radii_constants[level - 1] / 2.0 ** (np.arange(len(self.lines)) + 1)

    def _check_level(self, level: int):
        if not (1 <= level <= self.depth):
            raise ValueError(f"level {level} exceeds constructed depth {self.depth}")

    # -- distance machinery ------------------------------------------------

    def _planar_lower(self, pts: np.ndarray) -> np.ndarray:
        """Exact planar point-to-segment distances, a distance lower bound."""
        p = pts[:, None, :-1] - self._bases[None, :, :-1]
        h = self._vecs[:, :-1]
        h2 = np.sum(h * h, axis=1)
        t = np.sum(p * h[None, :, :], axis=2) / h2[None, :]
        t = np.clip(t, self.spans[None, :, 0], self.spans[None, :, 1])
        near = self._bases[None, :, :-1] + t[:, :, None] * h[None, :, :]
        return np.linalg.norm(pts[:, None, :-1] - near, axis=2)

    def _refine_pairs(self, pts: np.ndarray, pi: np.ndarray, li: np.ndarray, grid: int = 33, golden: int = 60) -> np.ndarray:
        """Minimize the quick distance bound over the segment, per pair.

        All flagged (point, line) pairs advance through the grid scan and
        golden-section refinement together, as array operations.
        """
        p = pts[pi]
        bases, vecs = self._bases[li], self._vecs[li]
        t0s, t1s = self.spans[li, 0], self.spans[li, 1]

        def val(ts):
            line_pts = bases + ts[:, None] * vecs
            return cc_upper_quick(group_mul(group_inv(line_pts), p))

        us = np.linspace(0.0, 1.0, grid)
        vals = np.stack([val(t0s + u * (t1s - t0s)) for u in us])
        j = np.argmin(vals, axis=0)
        best = vals[j, np.arange(len(pi))]
        a = t0s + us[np.maximum(j - 1, 0)] * (t1s - t0s)
        b = t0s + us[np.minimum(j + 1, grid - 1)] * (t1s - t0s)
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        c = b - gr * (b - a)
        d = a + gr * (b - a)
        fc, fd = val(c), val(d)
        for _ in range(golden):
            left = fc < fd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            c = b - gr * (b - a)
            d = a + gr * (b - a)
            fc, fd = val(c), val(d)
        return np.minimum(best, np.minimum(fc, fd))

    def upper_distances(self, pts: np.ndarray, needed: np.ndarray) -> np.ndarray:
        """Per (point, line) upper distance; refined only where the planar
        lower bound does not already exceed the per-line ``needed`` radius."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        lower = self._planar_lower(pts)
        out = np.full(lower.shape, np.inf)
        pi, li = np.where(lower <= np.asarray(needed)[None, :])
        if len(pi):
            out[pi, li] = self._refine_pairs(pts, pi, li)
        return out

    # -- queries -------------------------------------------------------------

    def contains(self, x, level: int) -> bool:
        """Point lies in every tube union up to ``level`` (certified side).

        Accepts a float array or a sequence of fractions; exact inputs that
        lie on an enumerated line are members at every level.
        """
        self._check_level(level)
        if not isinstance(x, np.ndarray) and any(isinstance(v, Fraction) for v in x):
            for i, line in enumerate(self.lines):
                t = line.incidence_parameter(x)
                if t is not None and self.spans[i, 0] - 1e-12 <= float(t) <= self.spans[i, 1] + 1e-12:
                    return True
            x = np.array([float(v) for v in x])
        return bool(self.contains_batch(np.asarray(x, dtype=float)[None, :], level)[0])

    def contains_batch(self, pts: np.ndarray, level: int) -> np.ndarray:
        self._check_level(level)
        d = self.upper_distances(pts, needed=self.radii(1))
        member = np.ones(len(pts), dtype=bool)
        for k in range(1, level + 1):
            member &= np.any(d <= self.radii(k)[None, :], axis=1)
        return member

    def cover_measure_mc(self, level: int, region: Box, n_samples: int, seed: int):
        """Monte-Carlo volume of the level-``level`` tube union inside region.

        Returns (volume estimate, (ci_lo, ci_hi)) with a 95% binomial
        confidence interval, in absolute volume units.
        """
        if n_samples < 1000:
            raise ValueError("need at least 1000 samples")
        self._check_level(level)
        rng = np.random.default_rng(seed)
        hits = 0
        chunk = 20000
        done = 0
        while done < n_samples:
            take = min(chunk, n_samples - done)
            pts = region.sample(rng, take)
            hits += int(np.sum(self.contains_batch(pts, level)))
            done += take
        lo, hi = wilson_interval(hits, n_samples)
        vol = region.volume
        return (hits / n_samples) * vol, (lo * vol, hi * vol)

    def curve_in_cover(self, path: HorizontalPath, level: int, samples: int = 64) -> bool:
        """All sampled points of the path are members at ``level``.

        Paths carrying exact rational knot data are sampled at rational
        parameters and tested by exact incidence, so curves assembled from
        enumerated lines pass at every constructed level.
        """
        self._check_level(level)
        if path.rational is not None:
            knots_f, rows, c0 = path.rational
            heights = [c0]
            n = self.n
            for j in range(len(rows) - 1):
                da = [rows[j + 1][i] - rows[j][i] for i in range(n)]
                db = [rows[j + 1][n + i] - rows[j][n + i] for i in range(n)]
                dc = 2 * (
                    sum(da[i] * rows[j][n + i] for i in range(n))
                    - sum(db[i] * rows[j][i] for i in range(n))
                )
                heights.append(heights[-1] + dc)
            per_seg = max(2, samples // (len(rows) - 1))
            for j in range(len(rows) - 1):
                for step in range(per_seg + 1):
                    u = Fraction(step, per_seg)
                    pt = tuple(rows[j][i] + u * (rows[j + 1][i] - rows[j][i]) for i in range(2 * n))
                    ht = heights[j] + u * (heights[j + 1] - heights[j])
                    if not self.contains(pt + (ht,), level):
                        return False
            return True
        ts = np.unique(np.concatenate([path.knots, np.linspace(path.t_min, path.t_max, samples)]))
        return bool(np.all(self.contains_batch(path.eval(ts), level)))

    def manifest(self) -> dict:
        return {
            "n": self.n,
            "depth": self.depth,
            "line_count": len(self.lines),
            "clip_lo": self.clip.lo.tolist(),
            "clip_hi": self.clip.hi.tolist(),
            "radii_constants": [float(c) for c in self.radii_constants],
            "volume_targets": [2.0**-k for k in range(1, self.depth + 1)],
            "volume_bounds": [self.volume_bound(c) for c in self.radii_constants],
            "tube_model": "metric neighborhoods of clipped line segments",
            # construction is deterministic: no randomness enters the build
            "seed": None,
            **self.meta,
        }

    def save_manifest(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.manifest(), fh, indent=2, sort_keys=True)

    @classmethod
    def build(
        cls,
        n: int = 1,
        height: int = 8,
        depth: int = 12,
        clip_half_width: float = 10.0,
        max_lines: int = 256,
        extra_lines: Iterable[RationalLine] = (),
    ) -> "Cover":
        """Cover over the first ``max_lines`` enumerated lines plus extras.

        ``extra_lines`` are prepended (they receive the largest tube radii),
        deduplicated against the enumeration.
        """
        lines = list(extra_lines)
        n_extra = len(lines)
        seen = {(l.direction, l.base) for l in lines}
        target = max(max_lines, len(lines))
        for line in enumerate_lines(height, n):
            if len(lines) >= target:
                break
            key = (line.direction, line.base)
            if key not in seen:
                seen.add(key)
                lines.append(line)
        meta = {"height": height, "max_lines": max_lines, "extra_lines": n_extra}
        return cls(lines, depth, Box.cube(clip_half_width, n), meta=meta)


def lines_of_path(path: HorizontalPath) -> list:
    """Exact rational lines supporting each segment of a rational path."""
    if path.rational is None:
        raise ValueError("path carries no exact rational knot data")
    _, rows, c0 = path.rational
    n = len(rows[0]) // 2
    heights = [c0]
    for j in range(len(rows) - 1):
        da = [rows[j + 1][i] - rows[j][i] for i in range(n)]
        db = [rows[j + 1][n + i] - rows[j][n + i] for i in range(n)]
        dc = 2 * (
            sum(da[i] * rows[j][n + i] for i in range(n))
            - sum(db[i] * rows[j][i] for i in range(n))
        )
        heights.append(heights[-1] + dc)
    out = []
    for j in range(len(rows) - 1):
        diff = [rows[j + 1][i] - rows[j][i] for i in range(2 * n)]
        if all(v == 0 for v in diff):
            continue
        denom_lcm = 1
        for v in diff:
            denom_lcm = denom_lcm * v.denominator // math.gcd(denom_lcm, v.denominator)
        ints = [int(v * denom_lcm) for v in diff]
        base = tuple(rows[j]) + (heights[j],)
        out.append(RationalLine(base, tuple(ints)))
    return out
