"""Sphere and radial quadrature plus seeded Monte Carlo volume integration.

The deterministic engine is a Gauss-Legendre x uniform-azimuth product
rule on the unit sphere.  The polar variable is the substitution
``s = sin(polar angle)``, which absorbs the latitude weight and makes the
polar integral a plain Gauss-Legendre integral over [-1, 1]; the rule
therefore integrates linear fields to roundoff (every constant vector
field integrates to zero) and sums its weights to 4*pi exactly.

Monte Carlo volume integrals use uniform rejection sampling inside a
bounding box of the pedal body, with singular kernels handled by excising
a small ball around the reference point and adding the excised
contribution analytically.  Estimates are bit-for-bit reproducible for a
fixed seed and sample count, independent of the worker count: samples are
drawn in fixed-size chunks with per-chunk substreams and combined in
chunk order with exact summation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betainc, roots_legendre

from .bodies import ConvexBody, min_support
from .errors import (
    ExcisionTooLarge,
    InvalidOrder,
    NonFiniteIntegrand,
    ZeroAcceptance,
)

__all__ = [
    "DEFAULT_SEED",
    "SphereQuadrature",
    "McEstimate",
    "AdaptiveResult",
    "sphere_rule",
    "integrate_sphere",
    "integrate_radial_volume",
    "monte_carlo_volume_integral",
    "integrate_even_sphere",
    "integrate_sphere_doubling",
    "gauss_legendre_cell",
]

DEFAULT_SEED = 123456789

_FOUR_PI = 4.0 * math.pi
_CHUNK = 1 << 19


@lru_cache(maxsize=64)
def _gl(order: int):
    x, w = roots_legendre(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_cell(a: float, b: float, order: int, map_order: int = 0):
    """Gauss-Legendre nodes and weights on (a, b).

    With ``map_order`` k > 0 the nodes are pushed toward the endpoints by
    the polynomial smoothstep x = I_t(k, k) (regularized incomplete beta),
    whose derivative vanishes to order k-1 at both ends; this restores
    fast convergence for integrands with endpoint derivative blowups.
    """
    if order < 1:
        raise InvalidOrder(f"order must be >= 1, got {order}")
    x, w = _gl(order)
    t = (x + 1.0) / 2.0
    if map_order > 0:
        k = map_order
        u = betainc(k, k, t)
        du = t ** (k - 1) * (1.0 - t) ** (k - 1) / _beta(k, k)
        nodes = a + (b - a) * u
        weights = w * (b - a) * du / 2.0
    else:
        nodes = a + (b - a) * t
        weights = w * (b - a) / 2.0
    return nodes, weights


@lru_cache(maxsize=32)
def _beta(p: int, q: int) -> float:
    return math.gamma(p) * math.gamma(q) / math.gamma(p + q)


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Node/weight set on the unit sphere.

    Weights are in steradians and sum to 4*pi; ``exactness`` is the
    largest polynomial degree integrated exactly (up to roundoff).
    """

    nodes: np.ndarray
    weights: np.ndarray
    exactness: int
    polar_order: int
    azimuth_count: int

    def __post_init__(self):
        if np.any(self.weights <= 0.0):
            raise InvalidOrder("quadrature weights must be positive")
        total = float(np.sum(self.weights))
        if abs(total - _FOUR_PI) > 1e-12 * _FOUR_PI:
            raise InvalidOrder(f"weights sum to {total}, expected 4*pi")
        moments = self.weights @ self.nodes
        checks = [moments[2]]
        if self.azimuth_count >= 2:
            checks += [moments[0], moments[1]]
        if max(abs(c) for c in checks) > 1e-12:
            raise InvalidOrder("constant vector fields do not integrate to zero")
        if self.exactness >= 2:
            z2 = float(self.weights @ self.nodes[:, 2] ** 2)
            if abs(z2 - _FOUR_PI / 3.0) > 1e-12 * _FOUR_PI / 3.0:
                raise InvalidOrder("second moment check failed")

    def __len__(self):
        return len(self.weights)


def sphere_rule(polar_order: int, azimuth_count: int) -> SphereQuadrature:
    """Product rule: Gauss-Legendre in s = sin(latitude), uniform in azimuth.

    Azimuth nodes sit at the K midpoints (k + 1/2) * 2*pi / K, so they
    never fall on the coordinate planes.  Exactness degree is
    min(2*polar_order - 1, azimuth_count - 1).
    """
    if polar_order < 1 or azimuth_count < 1:
        raise InvalidOrder(
            f"orders must be >= 1, got ({polar_order}, {azimuth_count})"
        )
    s, ws = _gl(polar_order)
    phi = (np.arange(azimuth_count) + 0.5) * (2.0 * math.pi / azimuth_count)
    rho = np.sqrt(np.maximum(0.0, 1.0 - s * s))
    cq, sq = np.cos(phi), np.sin(phi)
    nodes = np.empty((polar_order * azimuth_count, 3))
    nodes[:, 0] = np.outer(rho, cq).ravel()
    nodes[:, 1] = np.outer(rho, sq).ravel()
    nodes[:, 2] = np.repeat(s, azimuth_count)
    weights = np.repeat(ws * (2.0 * math.pi / azimuth_count), azimuth_count)
    return SphereQuadrature(
        nodes=nodes,
        weights=weights,
        exactness=min(2 * polar_order - 1, azimuth_count - 1),
        polar_order=polar_order,
        azimuth_count=azimuth_count,
    )


def _vectorized(f, probe):
    """Wrap f so it maps (N, 3) -> (N,), probing with two nodes."""
    try:
        out = np.asarray(f(probe), dtype=float)
        if out.shape == (len(probe),):
            return f
    except Exception:
        pass
    return lambda pts: np.array([f(p) for p in pts], dtype=float)


def _check_finite(values, nodes):
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NonFiniteIntegrand(
            f"integrand returned {values[i]} at node {nodes[i]}"
        )


def integrate_sphere(f, rule: SphereQuadrature) -> float:
    """Sum of weight * f(node) with exact (fsum) accumulation."""
    fv = _vectorized(f, rule.nodes[:2])
    products = np.empty(len(rule))
    for a in range(0, len(rule), _CHUNK):
        chunk = rule.nodes[a : a + _CHUNK]
        vals = np.asarray(fv(chunk), dtype=float)
        _check_finite(vals, chunk)
        products[a : a + _CHUNK] = vals * rule.weights[a : a + _CHUNK]
    return math.fsum(products)


def integrate_radial_volume(
    g,
    body: ConvexBody,
    m=None,
    rule: SphereQuadrature | None = None,
    radial_order: int = 32,
) -> float:
    """Volume integral of g over the pedal body, by sphere x radial rule.

    The pedal body is star-shaped about m, so the integral reduces to
    an outer sphere rule and an inner Gauss-Legendre rule on
    [0, p_m(w)] per direction of the radial integrand g(m + rho*w) rho^2.
    """
    if rule is None:
        rule = sphere_rule(128, 256)
    if radial_order < 1:
        raise InvalidOrder(f"radial_order must be >= 1, got {radial_order}")
    mm = np.asarray(body.center if m is None else m, dtype=float).reshape(3)
    t, v = _gl(radial_order)
    t01 = (t + 1.0) / 2.0
    v01 = v / 2.0
    gv = _vectorized(g, mm + np.array([[1e-3, 0, 0], [0, 1e-3, 0]]))
    inner = np.empty(len(rule))
    block = max(1, _CHUNK // radial_order)
    for a in range(0, len(rule), block):
        W = rule.nodes[a : a + block]
        p = np.asarray(body.support(W, mm), dtype=float)
        radii = p[:, None] * t01[None, :]
        pts = mm + radii[:, :, None] * W[:, None, :]
        flat = pts.reshape(-1, 3)
        vals = np.asarray(gv(flat), dtype=float)
        _check_finite(vals, flat)
        vals = vals.reshape(len(W), radial_order)
        inner[a : a + block] = p * np.sum(v01 * vals * radii**2, axis=1)
    return math.fsum(inner * rule.weights)


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo result with its one-sigma standard error."""

    estimate: float
    standard_error: float
    samples_used: int
    seed: int

    def __post_init__(self):
        if self.standard_error < 0.0 or self.samples_used <= 0:
            raise ValueError("invalid Monte Carlo estimate fields")


def monte_carlo_volume_integral(
    g,
    body: ConvexBody,
    m=None,
    samples: int = 1_000_000,
    seed: int = DEFAULT_SEED,
    excision_radius: float = 0.0,
    ball_correction: float = 0.0,
    workers: int = 1,
    chunk_size: int = 1 << 18,
) -> McEstimate:
    """Uniform rejection sampling of g over the pedal body about m.

    Points inside the pedal body and farther than ``excision_radius``
    from m contribute g; the caller supplies the excised ball's exact
    contribution as ``ball_correction`` (for g = 1/||y - m||^2 it is
    4*pi*excision_radius).  excision_radius = 0 is allowed, but the
    finite-variance guarantee is void for singular kernels.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if excision_radius < 0.0:
        raise ValueError("excision radius must be >= 0")
    mm = np.asarray(body.center if m is None else m, dtype=float).reshape(3)
    if excision_radius > 0.0:
        inradius = min_support(body, mm)
        if excision_radius >= inradius:
            raise ExcisionTooLarge(
                f"excision radius {excision_radius:g} >= pedal inradius "
                f"{inradius:g} of {body}"
            )
    lo, hi = body.bounding_box(mm)
    volume = float(np.prod(hi - lo))

    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def run_chunk(args):
        size, stream = args
        rng = np.random.default_rng(stream)
        pts = rng.uniform(lo, hi, size=(size, 3))
        d = pts - mm
        r = np.linalg.norm(d, axis=1)
        inside = np.zeros(size, dtype=bool)
        nz = r > 0.0
        if np.any(nz):
            u = d[nz] / r[nz, None]
            inside[nz] = r[nz] < (body.support_world(u) - u @ mm)
        accept = inside & (r > excision_radius)
        vals = np.asarray(g(pts[accept]), dtype=float) if np.any(accept) else np.empty(0)
        _check_finite(vals, pts[accept])
        return (
            float(np.sum(vals)),
            float(np.sum(vals * vals)),
            int(np.count_nonzero(inside)),
        )

    tasks = list(zip(sizes, streams))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_chunk, tasks))
    else:
        results = [run_chunk(t) for t in tasks]

    s1 = math.fsum(r[0] for r in results)
    s2 = math.fsum(r[1] for r in results)
    n_inside = sum(r[2] for r in results)
    if n_inside == 0:
        raise ZeroAcceptance(
            f"no sample of {samples} landed inside the pedal body of {body}"
        )
    mean = s1 / samples
    var = max(0.0, (s2 - samples * mean * mean) / max(1, samples - 1))
    return McEstimate(
        estimate=volume * mean + ball_correction,
        standard_error=volume * math.sqrt(var / samples),
        samples_used=samples,
        seed=seed,
    )


@dataclass(frozen=True)
class AdaptiveResult:
    """Value of an adaptively refined quadrature plus its settings."""

    value: float
    polar_order: int
    azimuth_count: int
    last_change: float

    def __float__(self):
        return self.value


def _octant_sum(f, order: int) -> float:
    """Gauss-Legendre x Gauss-Legendre sum over the open positive octant,
    in latitude/azimuth variables with the cos(latitude) area factor."""
    theta, wt = gauss_legendre_cell(0.0, math.pi / 2.0, order)
    phi, wp = gauss_legendre_cell(0.0, math.pi / 2.0, order)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    nodes = np.empty((order * order, 3))
    nodes[:, 0] = np.outer(ct, cp).ravel()
    nodes[:, 1] = np.outer(ct, sp).ravel()
    nodes[:, 2] = np.repeat(st, order)
    weights = np.outer(wt * ct, wp).ravel()
    vals = np.asarray(f(nodes), dtype=float)
    _check_finite(vals, nodes)
    return math.fsum(vals * weights)


def integrate_even_sphere(
    f,
    rel_tol: float = 1e-9,
    start_order: int = 16,
    max_order: int = 512,
) -> AdaptiveResult:
    """Integrate an octant-even function over the sphere, adaptively.

    The integrand must be invariant under sign flips of each coordinate;
    the octant integral is computed with a doubled Gauss-Legendre order
    until two successive refinements differ by less than rel_tol
    relatively, capped at max_order.
    """
    order = start_order
    value = 8.0 * _octant_sum(f, order)
    change = math.inf
    while order < max_order:
        order *= 2
        new = 8.0 * _octant_sum(f, order)
        change = abs(new - value)
        value = new
        if change <= rel_tol * max(abs(value), 1e-300):
            break
    return AdaptiveResult(value, order, order, change)


def _banded_sphere_sum(f, polar_order: int, azimuth_count: int) -> float:
    """Full-sphere product-rule sum evaluated one latitude band at a time,
    so very large rules never materialize a node array."""
    s, ws = _gl(polar_order)
    phi = (np.arange(azimuth_count) + 0.5) * (2.0 * math.pi / azimuth_count)
    cq, sq = np.cos(phi), np.sin(phi)
    w_az = 2.0 * math.pi / azimuth_count
    band_sums = np.empty(polar_order)
    nodes = np.empty((azimuth_count, 3))
    for j in range(polar_order):
        rho = math.sqrt(max(0.0, 1.0 - s[j] * s[j]))
        nodes[:, 0] = rho * cq
        nodes[:, 1] = rho * sq
        nodes[:, 2] = s[j]
        vals = np.asarray(f(nodes), dtype=float)
        _check_finite(vals, nodes)
        band_sums[j] = ws[j] * w_az * float(np.sum(vals))
    return math.fsum(band_sums)


def integrate_sphere_doubling(
    f,
    rel_tol: float = 1e-8,
    start_polar: int = 64,
    max_polar: int = 4096,
) -> AdaptiveResult:
    """Full-sphere integral with doubled product-rule orders until two
    successive refinements agree to rel_tol relatively (azimuth count is
    kept at twice the polar order)."""
    polar = start_polar
    value = _banded_sphere_sum(f, polar, 2 * polar)
    change = math.inf
    while polar < max_polar:
        polar *= 2
        new = _banded_sphere_sum(f, polar, 2 * polar)
        change = abs(new - value)
        value = new
        if change <= rel_tol * max(abs(value), 1e-300):
            break
    return AdaptiveResult(value, polar, 2 * polar, change)
