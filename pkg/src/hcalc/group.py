"""Exact arithmetic of the Heisenberg group H^n.

A point of H^n is a flat float array ``[a_1..a_n, b_1..b_n, c]`` of length
2n+1; a horizontal vector is an array ``[h_1..h_2n]`` of coefficients over
the ordered frame of left-invariant fields (X_1..X_n, Y_1..Y_n).  Every
operation broadcasts over leading axes, so a batch of points is simply an
array of shape ``(m, 2n+1)`` and batches never need Python loops.

The group law is

    (a, b, c) * (a', b', c') = (a + a', b + b', c + c' - 2(<a, b'> - <b, a'>))

with identity 0 and inverse -x.  Dilations scale the first 2n coordinates
linearly and the last quadratically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "UNIT_TOL",
    "point",
    "group_dim",
    "hdim",
    "split",
    "project",
    "vertical",
    "group_mul",
    "group_inv",
    "dilate",
    "vector_at",
    "horizontal_point",
    "omega",
    "unit_direction",
    "koranyi_norm",
    "koranyi_dist",
    "HLinearMap",
    "random_points",
    "random_directions",
]

# Absolute tolerance below which a direction counts as unit-normalized.
UNIT_TOL = 1e-12


def point(a, b, c) -> np.ndarray:
    """Assemble a point from the pair of n-vectors ``a``, ``b`` and height ``c``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"a and b must have equal length, got {a.shape} and {b.shape}")
    return np.concatenate([a, b, [float(c)]])


def group_dim(x: np.ndarray) -> int:
    """n for a point array of trailing length 2n+1."""
    m = np.asarray(x).shape[-1]
    if m < 3 or m % 2 == 0:
        raise ValueError(f"point arrays need odd trailing length >= 3, got {m}")
    return (m - 1) // 2


def hdim(h: np.ndarray) -> int:
    """n for a horizontal-vector array of trailing length 2n."""
    m = np.asarray(h).shape[-1]
    if m < 2 or m % 2 == 1:
        raise ValueError(f"horizontal vectors need even trailing length >= 2, got {m}")
    return m // 2


def split(x: np.ndarray):
    """Views (a, b, c) of a point array."""
    x = np.asarray(x, dtype=float)
    n = group_dim(x)
    return x[..., :n], x[..., n : 2 * n], x[..., 2 * n]


def project(x: np.ndarray) -> np.ndarray:
    """Projection onto the first 2n coordinates (a group homomorphism to R^2n)."""
    x = np.asarray(x, dtype=float)
    group_dim(x)
    return x[..., :-1]


def vertical(x: np.ndarray) -> np.ndarray:
    """The last coordinate."""
    return np.asarray(x, dtype=float)[..., -1]


def group_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Group product x * y.  Broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    n = group_dim(x)
    a, b = x[..., :n], x[..., n : 2 * n]
    a2, b2 = y[..., :n], y[..., n : 2 * n]
    out = np.broadcast_arrays(x, y)[0].copy()
    out[..., : 2 * n] = x[..., : 2 * n] + y[..., : 2 * n]
    cross = np.sum(a * b2, axis=-1) - np.sum(b * a2, axis=-1)
    # fused single-pass combination keeps the oracle deterministic
    out[..., -1] = x[..., -1] + y[..., -1] - 2.0 * cross
    return out


def group_inv(x: np.ndarray) -> np.ndarray:
    """Group inverse, which is plain negation."""
    return -np.asarray(x, dtype=float)


def dilate(r, x: np.ndarray) -> np.ndarray:
    """Anisotropic dilation: first 2n coordinates scale by r, the last by r^2."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("dilation factor must be positive")
    x = np.asarray(x, dtype=float)
    n = group_dim(x)
    out = np.empty(np.broadcast_shapes(r.shape, x[..., 0].shape) + (2 * n + 1,))
    out[..., : 2 * n] = r[..., None] * x[..., : 2 * n]
    out[..., -1] = r * r * x[..., -1]
    return out


def vector_at(h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Value of the horizontal field with frame coefficients h at the point x.

    The first 2n components equal h independently of x; the vertical
    component is 2 * sum_i (h_i b_i - h_{n+i} a_i).
    """
    h = np.asarray(h, dtype=float)
    x = np.asarray(x, dtype=float)
    n = hdim(h)
    if x.shape[-1] != 2 * n + 1:
        raise ValueError(f"dimension mismatch: direction n={n}, point length {x.shape[-1]}")
    a, b = x[..., :n], x[..., n : 2 * n]
    vert = 2.0 * (np.sum(h[..., :n] * b, axis=-1) - np.sum(h[..., n:] * a, axis=-1))
    shape = np.broadcast_shapes(h[..., 0].shape, x[..., 0].shape) + (2 * n + 1,)
    out = np.empty(shape)
    out[..., : 2 * n] = h
    out[..., -1] = vert
    return out


def horizontal_point(h: np.ndarray) -> np.ndarray:
    """Embed frame coefficients h as the point E(0) = (h, 0)."""
    h = np.asarray(h, dtype=float)
    out = np.zeros(h.shape[:-1] + (h.shape[-1] + 1,))
    out[..., :-1] = h
    return out


def omega(h: np.ndarray) -> np.ndarray:
    """Norm of a horizontal vector (Euclidean norm of its frame coefficients)."""
    return np.linalg.norm(np.asarray(h, dtype=float), axis=-1)


def unit_direction(h: np.ndarray) -> np.ndarray:
    """Normalize frame coefficients to a unit horizontal direction."""
    h = np.asarray(h, dtype=float)
    w = omega(h)
    if np.any(w == 0):
        raise ValueError("cannot normalize the zero horizontal vector")
    return h / w[..., None]


def require_unit(h: np.ndarray, tol: float = UNIT_TOL) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if np.any(np.abs(omega(h) - 1.0) > tol):
        raise ValueError("direction is not unit-normalized")
    return h


def koranyi_norm(x: np.ndarray) -> np.ndarray:
    """Homogeneous gauge (|p(x)|^4 + c^2)^(1/4)."""
    x = np.asarray(x, dtype=float)
    p2 = np.sum(x[..., :-1] ** 2, axis=-1)
    return (p2 * p2 + x[..., -1] ** 2) ** 0.25


def koranyi_dist(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Left-invariant gauge distance ||x^-1 y||."""
    return koranyi_norm(group_mul(group_inv(x), y))


@dataclass(frozen=True)
class HLinearMap:
    """Scalar group homomorphism x -> lip * <p(x), p(dir)>, homogeneous under dilations.

    ``direction`` must be unit; ``lip`` is its Lipschitz constant with respect
    to the Carnot-Caratheodory distance (exactly lip, attained along the
    direction itself).
    """

    lip: float
    direction: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if self.lip < 0:
            raise ValueError("lip must be nonnegative")
        if abs(omega(d) - 1.0) > UNIT_TOL:
            raise ValueError("direction must be unit-normalized")
        object.__setattr__(self, "direction", d)

    @classmethod
    def from_coeffs(cls, w: np.ndarray) -> "HLinearMap":
        """Build from an arbitrary coefficient vector w: x -> <p(x), w>."""
        w = np.asarray(w, dtype=float)
        s = float(np.linalg.norm(w))
        if s == 0.0:
            d = np.zeros_like(w)
            d[0] = 1.0
            return cls(0.0, d)
        return cls(s, w / s)

    @property
    def coeffs(self) -> np.ndarray:
        return self.lip * self.direction

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.direction.shape[-1] + 1:
            raise ValueError("dimension mismatch between map and point")
        return self.lip * np.sum(x[..., :-1] * self.direction, axis=-1)


def hlinear_eval(L: HLinearMap, x: np.ndarray) -> np.ndarray:
    """Evaluate an H-linear map at x (function form of ``L(x)``)."""
    return L(x)


def random_points(rng: np.random.Generator, size: int, n: int, scale: float = 1.0) -> np.ndarray:
    """Gaussian cloud of points, used by the verification suites."""
    return scale * rng.standard_normal((size, 2 * n + 1))


def random_directions(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    """Uniform unit horizontal directions."""
    h = rng.standard_normal((size, 2 * n))
    return h / np.linalg.norm(h, axis=-1, keepdims=True)
