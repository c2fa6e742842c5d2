"""Smooth closed boundary curves, periodic quadrature and point classification.

Every curve is parametrised counter-clockwise over t in [0, 2pi); the outward
normal is the tangent rotated clockwise, so the unit circle has normal
(cos t, sin t) and signed curvature +1.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.signal import resample
from scipy.spatial.distance import pdist

from .errors import DomainSpecError, QuadratureError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
KITE_A = 0.65
KITE_B = 1.5
MIN_QUADRATURE_NODES = 16

Derivatives = Tuple[NDArray, NDArray, NDArray]


def _stack(x: NDArray, y: NDArray) -> NDArray:
    return np.stack([x, y], axis=-1)


def _disk(t: NDArray) -> Derivatives:
    c, s = np.cos(t), np.sin(t)
    return _stack(c, s), _stack(-s, c), _stack(-c, -s)


def _ellipse(t: NDArray, a: float, b: float) -> Derivatives:
    c, s = np.cos(t), np.sin(t)
    return _stack(a * c, b * s), _stack(-a * s, b * c), _stack(-a * c, -b * s)


def _kite(t: NDArray) -> Derivatives:
    c, s = np.cos(t), np.sin(t)
    c2, s2 = np.cos(2 * t), np.sin(2 * t)
    x = _stack(c + KITE_A * c2 - KITE_A, KITE_B * s)
    dx = _stack(-s - 2 * KITE_A * s2, KITE_B * c)
    ddx = _stack(-c - 4 * KITE_A * c2, -KITE_B * s)
    return x, dx, ddx


def _star(t: NDArray, eps: float, m: float) -> Derivatives:
    c, s = np.cos(t), np.sin(t)
    r = 1.0 + eps * np.cos(m * t)
    dr = -eps * m * np.sin(m * t)
    ddr = -eps * m * m * np.cos(m * t)
    x = _stack(r * c, r * s)
    dx = _stack(dr * c - r * s, dr * s + r * c)
    ddx = _stack(ddr * c - 2 * dr * s - r * c, ddr * s + 2 * dr * c - r * s)
    return x, dx, ddx


_PARAMETRIZATIONS: Dict[str, Callable[..., Derivatives]] = {
    "disk": _disk,
    "ellipse": _ellipse,
    "kite": _kite,
    "star": _star,
}


@dataclass(frozen=True)
class CurveSample:
    """Differential geometry of a curve at a batch of parameters."""

    t: NDArray
    points: NDArray
    tangents: NDArray
    normals: NDArray
    speed: NDArray
    curvature: NDArray


@dataclass(frozen=True)
class BoundaryCurve:
    kind: str
    params: Tuple[float, ...] = ()

    def derivatives(self, t: ArrayLike) -> Derivatives:
        """Point, first and second derivative maps at parameters ``t``."""
        t = np.asarray(t, dtype=float)
        return _PARAMETRIZATIONS[self.kind](t, *self.params)

    def point(self, t: ArrayLike) -> NDArray:
        return self.derivatives(t)[0]

    def sample(self, t: ArrayLike) -> CurveSample:
        t = np.asarray(t, dtype=float)
        x, dx, ddx = self.derivatives(t)
        speed = np.hypot(dx[..., 0], dx[..., 1])
        tangents = dx / speed[..., None]
        normals = _stack(tangents[..., 1], -tangents[..., 0])
        cross = dx[..., 0] * ddx[..., 1] - dx[..., 1] * ddx[..., 0]
        return CurveSample(
            t=t,
            points=x,
            tangents=tangents,
            normals=normals,
            speed=speed,
            curvature=cross / speed**3,
        )

    @property
    def descriptor(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}:" + ",".join(f"{p:g}" for p in self.params)

    @cached_property
    def _dense(self) -> CurveSample:
        return self.sample(np.linspace(0.0, TWO_PI, 1024, endpoint=False))

    def diameter(self) -> float:
        return float(pdist(self._dense.points).max())

    def arclength(self, n: int = 1024) -> float:
        """Perimeter by the n-point trapezoid rule, spectrally accurate for these curves."""
        speed = self.sample(TWO_PI * np.arange(n) / n).speed
        return float(speed.sum() * TWO_PI / n)

    def bounding_box(self) -> Tuple[float, float, float, float]:
        pts = self._dense.points
        return (
            float(pts[:, 0].min()),
            float(pts[:, 0].max()),
            float(pts[:, 1].min()),
            float(pts[:, 1].max()),
        )


def curve_from_spec(spec: str) -> BoundaryCurve:
    """Parse a domain descriptor into a BoundaryCurve.

    Args:
        spec: One of ``disk``, ``ellipse:a,b``, ``kite`` or ``star:eps,m``.

    Returns:
        The corresponding curve.
    """
    name, _, rest = spec.strip().partition(":")
    name = name.lower()
    try:
        params = tuple(float(v) for v in rest.split(",")) if rest else ()
    except ValueError as e:
        raise DomainSpecError(f"cannot parse parameters in '{spec}'") from e

    if name in ("disk", "kite"):
        if params:
            raise DomainSpecError(f"'{name}' takes no parameters")
        return BoundaryCurve(name)
    if name == "ellipse":
        if len(params) != 2:
            raise DomainSpecError("ellipse needs two semi-axes: ellipse:a,b")
        a, b = params
        if a <= 0 or b <= 0:
            raise DomainSpecError(f"ellipse axes must be positive (got {a}, {b})")
        return BoundaryCurve("ellipse", (a, b))
    if name == "star":
        if len(params) != 2:
            raise DomainSpecError("star needs amplitude and lobe count: star:eps,m")
        eps, m = params
        if m < 1 or m != int(m):
            raise DomainSpecError(f"star lobe count must be a positive integer (got {m})")
        if not 0 < eps < 1.0 / m**2:
            raise DomainSpecError(
                f"star amplitude must satisfy 0 < eps < 1/m^2 = {1.0 / m**2:g} (got {eps})"
            )
        return BoundaryCurve("star", (eps, float(int(m))))
    raise DomainSpecError(f"unknown domain '{spec}'")


@dataclass(frozen=True)
class GeometryPoint:
    point: NDArray
    normal: NDArray
    speed: float
    curvature: float


def geometry_at(curve: BoundaryCurve, t: float) -> GeometryPoint:
    s = curve.sample(np.array([t]))
    return GeometryPoint(
        point=s.points[0],
        normal=s.normals[0],
        speed=float(s.speed[0]),
        curvature=float(s.curvature[0]),
    )


@dataclass(frozen=True)
class QuadratureGrid:
    """Equispaced parameter nodes with arclength trapezoid weights."""

    curve: BoundaryCurve
    n: int
    t: NDArray
    points: NDArray
    normals: NDArray
    tangents: NDArray
    speed: NDArray
    curvature: NDArray
    weights: NDArray

    @property
    def spacing(self) -> float:
        """Largest arclength distance between neighbouring nodes."""
        return float(self.speed.max() * TWO_PI / self.n)

    @property
    def length(self) -> float:
        return float(self.weights.sum())

    def upsample(self, factor: int) -> "QuadratureGrid":
        return build_quadrature(self.curve, self.n * factor)

    def integrate(self, values: ArrayLike) -> float:
        return float(np.dot(self.weights, np.asarray(values)))


def build_quadrature(curve: BoundaryCurve, n: int) -> QuadratureGrid:
    if n % 2 or n < MIN_QUADRATURE_NODES:
        raise QuadratureError(
            f"node count must be even and ≥ {MIN_QUADRATURE_NODES} (got {n})"
        )
    t = TWO_PI * np.arange(n) / n
    s = curve.sample(t)
    grid = QuadratureGrid(
        curve=curve,
        n=n,
        t=t,
        points=s.points,
        normals=s.normals,
        tangents=s.tangents,
        speed=s.speed,
        curvature=s.curvature,
        weights=s.speed * TWO_PI / n,
    )
    logger.debug("quadrature %s N=%d length=%.15g", curve.descriptor, n, grid.length)
    return grid


# --- periodic spectral calculus ---------------------------------------------


def resample_periodic(values: ArrayLike, m: int) -> NDArray:
    """Trigonometric interpolation of equispaced periodic samples onto ``m`` nodes."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] == m:
        return values.copy()
    return resample(values, m, axis=0)


def spectral_derivative(values: ArrayLike, order: int = 1) -> NDArray:
    """Derivative in t of the trigonometric interpolant, sampled at the nodes."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    coeffs = np.fft.rfft(values, axis=0)
    k = np.arange(coeffs.shape[0])
    factor = (1j * k) ** order
    if order % 2:
        factor[-1] = 0.0
    coeffs = coeffs * factor.reshape((-1,) + (1,) * (values.ndim - 1))
    return np.fft.irfft(coeffs, n=n, axis=0)


def tangential_derivative(grid: QuadratureGrid, values: ArrayLike) -> NDArray:
    return spectral_derivative(values) / grid.speed


def tangential_laplacian(grid: QuadratureGrid, values: ArrayLike) -> NDArray:
    return spectral_derivative(tangential_derivative(grid, values)) / grid.speed


class TrigInterpolant:
    """Trigonometric interpolant of nodal values on t_j = 2 pi j / N."""

    def __init__(self, values: ArrayLike):
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        if n % 2:
            raise QuadratureError(f"interpolation needs an even node count (got {n})")
        coeffs = np.fft.rfft(values) / n
        coeffs[1:-1] *= 2.0
        self.n = n
        self.k = np.arange(coeffs.size)
        self.coeffs = coeffs

    def __call__(self, t: ArrayLike, derivative: int = 0) -> NDArray:
        t = np.asarray(t, dtype=float)
        a = self.coeffs * (1j * self.k) ** derivative
        phase = np.exp(1j * np.multiply.outer(t, self.k))
        return np.real(phase @ a)


# --- point classification ---------------------------------------------------


class Location(enum.IntEnum):
    OUTSIDE = 0
    INSIDE = 1
    COLLAR = 2


def _classify_chunk(
    dense: CurveSample, points: NDArray, curve: BoundaryCurve
) -> Tuple[NDArray, NDArray]:
    diff = dense.points[None, :, :] - points[:, None, :]
    angles = np.arctan2(diff[..., 1], diff[..., 0])
    turns = np.diff(np.concatenate([angles, angles[:, :1]], axis=1), axis=1)
    turns = (turns + np.pi) % TWO_PI - np.pi
    winding = turns.sum(axis=1) / TWO_PI

    dist2 = np.einsum("pmi,pmi->pm", diff, diff)
    nearest = dist2.argmin(axis=1)
    sampled = np.sqrt(dist2[np.arange(len(points)), nearest])

    t = dense.t[nearest]
    x, dx, ddx = curve.derivatives(t)
    r = x - points
    g = np.einsum("pi,pi->p", r, dx)
    dg = np.einsum("pi,pi->p", dx, dx) + np.einsum("pi,pi->p", r, ddx)
    # dg vanishes at centres of curvature (the disk centre); keep the sample there
    step = np.divide(g, dg, out=np.zeros_like(g), where=np.abs(dg) > 1e-12)
    refined = np.linalg.norm(curve.point(t - step) - points, axis=1)
    return np.abs(winding) > 0.5, np.fmin(sampled, refined)


def classify_points(
    curve: BoundaryCurve, points: ArrayLike, delta: float, samples: int = 1024
) -> Tuple[NDArray, NDArray]:
    """Winding-number location and distance to the curve for many points.

    Returns:
        (labels, distances): Location codes and distances to the boundary.
    """
    if delta < 0:
        raise ValueError(f"collar width must be non-negative (got {delta})")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dense = curve.sample(np.linspace(0.0, TWO_PI, samples, endpoint=False))
    chunk = max(1, 2_000_000 // samples)
    inside = np.empty(len(points), dtype=bool)
    distance = np.empty(len(points))
    for start in range(0, len(points), chunk):
        sl = slice(start, start + chunk)
        inside[sl], distance[sl] = _classify_chunk(dense, points[sl], curve)
    labels = np.where(inside, Location.INSIDE, Location.OUTSIDE).astype(np.int8)
    labels[distance < delta] = Location.COLLAR
    return labels, distance


def point_location(curve: BoundaryCurve, p: ArrayLike, delta: float) -> Location:
    labels, _ = classify_points(curve, np.asarray(p, dtype=float)[None, :], delta)
    return Location(int(labels[0]))


@dataclass(frozen=True)
class InteriorGrid:
    """Square lattice over the bounding box with inside/outside/collar flags.

    Node (j, i) sits at (x[i], y[j]); arrays are indexed [row j, column i].
    """

    curve: BoundaryCurve
    x: NDArray
    y: NDArray
    h: float
    delta: float
    labels: NDArray
    distance: NDArray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.labels.shape

    @property
    def active(self) -> NDArray:
        return self.labels == Location.INSIDE

    @property
    def node_area(self) -> float:
        return self.h * self.h

    def points(self) -> NDArray:
        xx, yy = np.meshgrid(self.x, self.y)
        return np.stack([xx, yy], axis=-1)

    def active_points(self) -> NDArray:
        return self.points()[self.active]


def build_interior_grid(
    curve: BoundaryCurve, resolution: int, delta: float
) -> InteriorGrid:
    if resolution < 3:
        raise ValueError(f"grid resolution must be ≥ 3 (got {resolution})")
    xmin, xmax, ymin, ymax = curve.bounding_box()
    h = max(xmax - xmin, ymax - ymin) / (resolution - 1)
    nx = int(round((xmax - xmin) / h)) + 1
    ny = int(round((ymax - ymin) / h)) + 1
    x = 0.5 * (xmin + xmax) + h * (np.arange(nx) - 0.5 * (nx - 1))
    y = 0.5 * (ymin + ymax) + h * (np.arange(ny) - 0.5 * (ny - 1))
    xx, yy = np.meshgrid(x, y)
    labels, distance = classify_points(
        curve, np.column_stack([xx.ravel(), yy.ravel()]), delta
    )
    logger.info(
        "interior grid %s %dx%d h=%.4g delta=%.4g active=%d",
        curve.descriptor,
        nx,
        ny,
        h,
        delta,
        int((labels == Location.INSIDE).sum()),
    )
    return InteriorGrid(
        curve=curve,
        x=x,
        y=y,
        h=h,
        delta=delta,
        labels=labels.reshape(ny, nx),
        distance=distance.reshape(ny, nx),
    )
