"""Convex body catalog built on support functions.

Every shape exposes its support function ``p_m(w) = max_x <x - m, w>``
about a reference point ``m``.  The pedal surface ``w -> p_m(w) w + m``
and the solid region it bounds (the pedal body, star-shaped about ``m``)
are derived from it; all downstream curvature methods consume only this
interface.  Evaluations are pure functions of immutable shape data and
vectorize over ``(N, 3)`` direction arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import NonPositiveSupport, OddExponent, UnboundedBody

__all__ = [
    "unit_direction",
    "direction_net_26",
    "fibonacci_directions",
    "ConvexBody",
    "Sphere",
    "Ellipsoid",
    "Box",
    "Superellipsoid",
    "Polytope",
    "MinkowskiSum",
    "Translate",
    "min_support",
]

_UNIT_TOL = 1e-9
_SUPPORT_CAP = 1e12


def unit_direction(v) -> np.ndarray:
    """Normalize ``v`` to a unit direction; rejects zero and non-finite input."""
    w = np.asarray(v, dtype=float).reshape(3)
    n = float(np.linalg.norm(w))
    if not math.isfinite(n) or n == 0.0:
        raise ValueError(f"cannot normalize direction {v!r}")
    return w / n


def direction_net_26() -> np.ndarray:
    """Coarse net: the 6 axis, 12 edge-diagonal and 8 corner-diagonal directions."""
    dirs = []
    for x in (-1, 0, 1):
        for y in (-1, 0, 1):
            for z in (-1, 0, 1):
                if x == y == z == 0:
                    continue
                v = np.array([x, y, z], dtype=float)
                dirs.append(v / np.linalg.norm(v))
    return np.array(dirs)


def fibonacci_directions(count: int) -> np.ndarray:
    """Near-uniform spiral net of ``count`` unit directions."""
    i = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / count
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * (math.pi * (3.0 - math.sqrt(5.0)))
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def _as_direction_batch(w):
    """Return ``(W, scalar)`` with W of shape (N, 3); validates unit norm."""
    W = np.asarray(w, dtype=float)
    scalar = W.ndim == 1
    W = np.atleast_2d(W)
    if W.ndim != 2 or W.shape[1] != 3:
        raise ValueError(f"expected directions of shape (3,) or (N, 3), got {W.shape}")
    norms = np.einsum("ij,ij->i", W, W)
    if np.any(np.abs(norms - 1.0) > 3.0 * _UNIT_TOL):
        bad = int(np.argmax(np.abs(norms - 1.0)))
        raise ValueError(
            f"direction {W[bad]} is not unit length; use unit_direction() first"
        )
    return W, scalar


def _as_point(m) -> np.ndarray:
    return np.asarray(m, dtype=float).reshape(3)


class ConvexBody:
    """Base class: a bounded convex shape with a distinguished center.

    Subclasses implement ``support_world`` (support about the coordinate
    origin) plus a few geometric bounds.  Everything else — pedal points,
    pedal-body membership, bounding boxes — derives from the support
    function alone.
    """

    @property
    def center(self) -> np.ndarray:
        raise NotImplementedError

    def support_world(self, w: np.ndarray) -> np.ndarray:
        """max over body points x of <x, w> for unit rows w, shape (N,)."""
        raise NotImplementedError

    # -- support-function interface ------------------------------------

    def support(self, w, m=None):
        """Support value p_m(w) about the reference point m (default: center).

        Raises NonPositiveSupport when the value is <= 0, which signals
        that m is not interior to the body along w.
        """
        W, scalar = _as_direction_batch(w)
        mm = self.center if m is None else _as_point(m)
        vals = self.support_world(W) - W @ mm
        if not np.all(vals > 0.0):
            bad = int(np.argmin(vals))
            raise NonPositiveSupport(
                f"support {vals[bad]:.6g} <= 0 along {W[bad]} for {self} about m={mm}"
            )
        return float(vals[0]) if scalar else vals

    def pedal_point(self, w, m=None):
        """Point of the pedal surface: p_m(w) * w + m."""
        W, scalar = _as_direction_batch(w)
        mm = self.center if m is None else _as_point(m)
        p = self.support(W, mm)
        pts = p[:, None] * W + mm
        return pts[0] if scalar else pts

    def contains_pedal(self, y, m=None):
        """True iff y lies strictly inside the pedal body about m.

        The pedal body is star-shaped about m, so the radial comparison
        ||y - m|| < p_m((y - m)/||y - m||) is exact; y == m returns True.
        """
        Y = np.asarray(y, dtype=float)
        scalar = Y.ndim == 1
        Y = np.atleast_2d(Y)
        mm = self.center if m is None else _as_point(m)
        d = Y - mm
        r = np.linalg.norm(d, axis=1)
        out = np.ones(len(Y), dtype=bool)
        nz = r > 0.0
        if np.any(nz):
            u = d[nz] / r[nz, None]
            p = self.support_world(u) - u @ mm
            out[nz] = r[nz] < p
        return bool(out[0]) if scalar else out

    def bounding_box(self, m=None):
        """Axis-aligned box (lo, hi) guaranteed to contain the pedal body."""
        mm = self.center if m is None else _as_point(m)
        half = self.pedal_axis_halfwidths(mm)
        return mm - half, mm + half

    # -- geometric bounds ------------------------------------------------

    def circumradius_about(self, m) -> float:
        """Upper bound for max over body points of ||x - m||, hence for p_m."""
        raise NotImplementedError

    def pedal_axis_halfwidths(self, m) -> np.ndarray:
        """Per-axis upper bounds for max_w p_m(w) |w_i|.

        The generic bound is the circumradius; centered axis-aligned kinds
        override with tighter closed forms to keep the Monte Carlo
        acceptance rate up.
        """
        return np.full(3, self.circumradius_about(m))

    @property
    def octant_symmetric(self) -> bool:
        """Whether the support about the body's own center is invariant
        under sign flips of each coordinate (enables octant quadrature)."""
        return False

    # -- construction helpers ---------------------------------------------

    def _check_interior_net(self):
        """Eager coarse-net positivity check for the default center."""
        p = self.support(direction_net_26())
        if not np.all(np.isfinite(p)) or float(np.max(p)) > _SUPPORT_CAP:
            raise UnboundedBody(f"support exceeds sanity cap for {self}")


@dataclass(frozen=True, eq=False)
class Sphere(ConvexBody):
    radius: float
    center_point: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "center_point", _as_point(self.center_point))
        if not self.radius > 0.0:
            raise ValueError("sphere radius must be positive")
        self._check_interior_net()

    @property
    def center(self):
        return self.center_point

    def support_world(self, w):
        return w @ self.center_point + self.radius

    def circumradius_about(self, m):
        return float(np.linalg.norm(self.center_point - _as_point(m))) + self.radius

    def pedal_axis_halfwidths(self, m):
        if np.array_equal(_as_point(m), self.center_point):
            return np.full(3, self.radius)
        return super().pedal_axis_halfwidths(m)

    @property
    def octant_symmetric(self):
        return True

    def __str__(self):
        return f"sphere(r={self.radius:g})"


@dataclass(frozen=True, eq=False)
class Ellipsoid(ConvexBody):
    semi_axes: tuple
    center_point: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        a = np.asarray(self.semi_axes, dtype=float).reshape(3)
        object.__setattr__(self, "semi_axes", a)
        object.__setattr__(self, "center_point", _as_point(self.center_point))
        if not np.all(a > 0.0):
            raise ValueError("ellipsoid semi-axes must be positive")
        self._check_interior_net()

    @property
    def center(self):
        return self.center_point

    def support_world(self, w):
        return w @ self.center_point + np.sqrt((w * w) @ (self.semi_axes**2))

    def circumradius_about(self, m):
        off = float(np.linalg.norm(self.center_point - _as_point(m)))
        return off + float(np.max(self.semi_axes))

    def pedal_axis_halfwidths(self, m):
        if not np.array_equal(_as_point(m), self.center_point):
            return super().pedal_axis_halfwidths(m)
        # max_w ||diag(a) w|| |w_i|: put mass t on axis i and 1-t on the
        # largest other axis; maximize ((a_i^2 - A^2) t + A^2) t on [0, 1].
        a2 = self.semi_axes**2
        out = np.empty(3)
        for i in range(3):
            A2 = float(np.max(np.delete(a2, i)))
            c2, c1 = float(a2[i]) - A2, A2
            best = max(c2 + c1, 0.0)  # t = 1
            if c2 < 0.0:
                t = min(1.0, max(0.0, -c1 / (2.0 * c2)))
                best = max(best, (c2 * t + c1) * t)
            out[i] = math.sqrt(best)
        return out

    @property
    def octant_symmetric(self):
        return True

    def __str__(self):
        a, b, c = self.semi_axes
        return f"ellipsoid({a:g},{b:g},{c:g})"


@dataclass(frozen=True, eq=False)
class Box(ConvexBody):
    half_extents: tuple
    center_point: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        h = np.asarray(self.half_extents, dtype=float).reshape(3)
        object.__setattr__(self, "half_extents", h)
        object.__setattr__(self, "center_point", _as_point(self.center_point))
        if not np.all(h > 0.0):
            raise ValueError("box half-extents must be positive")
        self._check_interior_net()

    @property
    def center(self):
        return self.center_point

    def support_world(self, w):
        return w @ self.center_point + np.abs(w) @ self.half_extents

    def circumradius_about(self, m):
        off = np.abs(self.center_point - _as_point(m))
        return float(np.linalg.norm(off + self.half_extents))

    def pedal_axis_halfwidths(self, m):
        if not np.array_equal(_as_point(m), self.center_point):
            return super().pedal_axis_halfwidths(m)
        # max_w (h . |w|) |w_i| = (h_i + ||h||) / 2 (largest eigenvalue of
        # the symmetrized rank-two form (h e_i^T + e_i h^T)/2).
        nh = float(np.linalg.norm(self.half_extents))
        return (self.half_extents + nh) / 2.0

    @property
    def octant_symmetric(self):
        return True

    def __str__(self):
        a, b, c = self.half_extents
        return f"box({a:g},{b:g},{c:g})"


@dataclass(frozen=True, eq=False)
class Superellipsoid(ConvexBody):
    """Solid bounded by |x/m|^n + |y/m|^n + |z/m|^n = 1 with even n >= 2.

    The support function about the center is the dual-norm value
    m * ||w||_q with q = n/(n-1); for n = 2 this is the sphere and as
    n grows the shape tends to the cube of half-side m.
    """

    exponent: int
    half_side: float = 1.0
    center_point: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        n = self.exponent
        if int(n) != n or n < 2 or int(n) % 2 != 0:
            raise OddExponent(f"superellipsoid exponent must be even >= 2, got {n}")
        object.__setattr__(self, "exponent", int(n))
        object.__setattr__(self, "half_side", float(self.half_side))
        object.__setattr__(self, "center_point", _as_point(self.center_point))
        if not self.half_side > 0.0:
            raise ValueError("superellipsoid half-side must be positive")
        self._check_interior_net()

    @property
    def dual_exponent(self) -> float:
        return self.exponent / (self.exponent - 1.0)

    @property
    def center(self):
        return self.center_point

    def support_world(self, w):
        q = self.dual_exponent
        val = np.sum(np.abs(w) ** q, axis=-1) ** (1.0 / q)
        return w @ self.center_point + self.half_side * val

    def circumradius_about(self, m):
        off = float(np.linalg.norm(self.center_point - _as_point(m)))
        corner = self.half_side * 3.0 ** (0.5 - 1.0 / self.exponent)
        return off + corner

    def pedal_axis_halfwidths(self, m):
        if not np.array_equal(_as_point(m), self.center_point):
            return super().pedal_axis_halfwidths(m)
        # ||w||_q <= ||w||_1 for q >= 1, so the box bound dominates.
        bound = self.half_side * (1.0 + math.sqrt(3.0)) / 2.0
        return np.minimum(np.full(3, bound), self.circumradius_about(m))

    @property
    def octant_symmetric(self):
        return True

    def __str__(self):
        return f"superellipsoid(n={self.exponent},m={self.half_side:g})"


@dataclass(frozen=True, eq=False)
class Polytope(ConvexBody):
    """Convex hull of a finite vertex list; support is the vertex maximum."""

    vertices: np.ndarray
    center_point: tuple | None = None
    _octant_flag: bool = field(init=False, default=False)

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 3 or len(V) < 4:
            raise ValueError("polytope needs at least 4 vertices of shape (V, 3)")
        object.__setattr__(self, "vertices", V)
        c = V.mean(axis=0) if self.center_point is None else _as_point(self.center_point)
        object.__setattr__(self, "center_point", c)
        object.__setattr__(self, "_octant_flag", self._detect_octant_symmetry())
        self._check_interior_net()

    @property
    def center(self):
        return self.center_point

    def support_world(self, w):
        return (w @ self.vertices.T).max(axis=-1)

    def circumradius_about(self, m):
        return float(np.max(np.linalg.norm(self.vertices - _as_point(m), axis=1)))

    def pedal_axis_halfwidths(self, m):
        # p(w) w_i = <v*, w> w_i for the active vertex, bounded per vertex by
        # (|v_i| + ||v||)/2 with v taken relative to m.
        V = self.vertices - _as_point(m)
        nv = np.linalg.norm(V, axis=1)
        return np.max((np.abs(V) + nv[:, None]) / 2.0, axis=0)

    def _detect_octant_symmetry(self) -> bool:
        """True when the centered vertex set is closed under per-axis sign
        flips and a single vertex dominates each open octant (so the
        support restricted to an octant is a single linear function)."""
        V = self.vertices - self.vertices.mean(axis=0)
        scale = max(float(np.max(np.abs(V))), 1e-300)
        tol = 1e-9 * scale
        keys = {tuple(np.round(v / scale, 9)) for v in V}
        for axis in range(3):
            flipped = V.copy()
            flipped[:, axis] *= -1.0
            if {tuple(np.round(v / scale, 9)) for v in flipped} != keys:
                return False
        for sx in (-1.0, 1.0):
            for sy in (-1.0, 1.0):
                for sz in (-1.0, 1.0):
                    sig = np.array([sx, sy, sz])
                    diag = sig / math.sqrt(3.0)
                    star = V[int(np.argmax(V @ diag))]
                    # v* dominates the octant iff sig*(v - v*) <= 0 for all v
                    if np.any(sig * (V - star) > tol):
                        return False
        return True

    @property
    def octant_symmetric(self):
        return self._octant_flag

    def __str__(self):
        return f"polytope({len(self.vertices)} vertices)"


@dataclass(frozen=True, eq=False)
class MinkowskiSum(ConvexBody):
    """Minkowski sum of two bodies; supports add exactly by construction."""

    first: ConvexBody
    second: ConvexBody

    def __post_init__(self):
        self._check_interior_net()

    @property
    def center(self):
        return self.first.center + self.second.center

    def support_world(self, w):
        return self.first.support_world(w) + self.second.support_world(w)

    def circumradius_about(self, m):
        r1 = self.first.circumradius_about(self.first.center)
        r2 = self.second.circumradius_about(self.second.center)
        off = float(np.linalg.norm(self.center - _as_point(m)))
        return r1 + r2 + off

    @property
    def octant_symmetric(self):
        return self.first.octant_symmetric and self.second.octant_symmetric

    def __str__(self):
        return f"minkowski_sum({self.first},{self.second})"


@dataclass(frozen=True, eq=False)
class Translate(ConvexBody):
    """Body shifted by a fixed offset; support gains the linear term <t, w>."""

    body: ConvexBody
    offset: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "offset", _as_point(self.offset))
        self._check_interior_net()

    @property
    def center(self):
        return self.body.center + self.offset

    def support_world(self, w):
        return self.body.support_world(w) + w @ self.offset

    def circumradius_about(self, m):
        return self.body.circumradius_about(_as_point(m) - self.offset)

    @property
    def octant_symmetric(self):
        return self.body.octant_symmetric

    def __str__(self):
        return f"translate({self.body},{tuple(self.offset)})"


def _refine_direction_min(body: ConvexBody, m: np.ndarray, w0: np.ndarray) -> float:
    """Polish the directional minimum of p_m around w0 on the sphere."""
    t1 = np.cross(w0, [1.0, 0.0, 0.0])
    if np.linalg.norm(t1) < 1e-6:
        t1 = np.cross(w0, [0.0, 1.0, 0.0])
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(w0, t1)

    def objective(ab):
        w = w0 + ab[0] * t1 + ab[1] * t2
        w /= np.linalg.norm(w)
        return body.support_world(w[None, :])[0] - float(w @ m)

    res = minimize(objective, np.zeros(2), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400})
    return float(res.fun)

def min_support(body: ConvexBody, m=None, net_size: int = 2562) -> float:
    """Minimum of p_m over all directions: a spiral net plus local polish.

    This is the inradius of the pedal body about m; it bounds admissible
    excision radii for singular Monte Carlo kernels.
    """
    mm = body.center if m is None else _as_point(m)
    net = np.vstack([fibonacci_directions(net_size), direction_net_26()])
    vals = body.support_world(net) - net @ mm
    i = int(np.argmin(vals))
    refined = _refine_direction_min(body, mm, net[i])
    out = min(float(vals[i]), refined)
    if out <= 0.0:
        raise NonPositiveSupport(
            f"reference point {mm} is not interior to {body}"
        )
    return out
