"""Iris boundaries, ray sampling, rasterization and the two perturbations.

Boundaries are either ellipses or simple polygons. All coordinates are in
pixels with the origin at the top-left image corner; pixel ``(x, y)`` covers
the unit square ``[x, x+1) x [y, y+1)`` and its center is ``(x+0.5, y+0.5)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import InvalidBoundary, NoIntersection, NonPositiveScale, PupilExceedsLimbic

# rays closer than this to their origin do not count as hits
_RAY_EPS = 1e-9
_MEAN_RADIUS_RAYS = 720


class Point2D(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Ellipse:
    cx: float
    cy: float
    a: float
    b: float
    rotation: float = 0.0

    def __post_init__(self):
        for name in ("cx", "cy", "a", "b", "rotation"):
            object.__setattr__(self, name, float(getattr(self, name)))
        vals = (self.cx, self.cy, self.a, self.b, self.rotation)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidBoundary(f"non-finite ellipse parameters {vals}")
        if self.a <= 0 or self.b <= 0:
            raise InvalidBoundary(f"ellipse axes must be positive, got a={self.a}, b={self.b}")

    @property
    def center(self):
        return Point2D(self.cx, self.cy)


@dataclass(frozen=True)
class Polygon:
    vertices: tuple  # ((x, y), ...), implicitly closed

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise InvalidBoundary(f"polygon needs at least 3 vertices, got {len(verts)}")
        arr = np.asarray(verts)
        if not np.all(np.isfinite(arr)):
            raise InvalidBoundary("non-finite polygon vertex")
        if _shoelace(arr) == 0:
            raise InvalidBoundary("polygon encloses zero area")
        if not _is_simple(arr):
            raise InvalidBoundary("polygon is self-intersecting")

    @property
    def array(self):
        return np.asarray(self.vertices, dtype=float)


Boundary = Union[Ellipse, Polygon]


def circle(cx, cy, r):
    return Ellipse(cx, cy, r, r, 0.0)


@dataclass(frozen=True)
class EyeAnnotation:
    """Segmentation parameters of one image: two boundaries and the normalization center."""

    image_id: str
    pupil: Boundary
    limbic: Boundary
    center: Point2D

    def __post_init__(self):
        object.__setattr__(self, "center", Point2D(float(self.center[0]), float(self.center[1])))

    def with_changes(self, **kw):
        fields = dict(image_id=self.image_id, pupil=self.pupil, limbic=self.limbic, center=self.center)
        fields.update(kw)
        return EyeAnnotation(**fields)


@dataclass
class SegmentationMask:
    width: int
    height: int
    bits: np.ndarray  # (height, width) bool, True = iris

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.shape != (self.height, self.width):
            raise InvalidBoundary(
                f"mask shape {self.bits.shape} does not match {self.height}x{self.width}")

    @property
    def count(self):
        return int(self.bits.sum())


def check_annotation(ann):
    """Raise PupilExceedsLimbic unless the pupil encloses less area than the limbic boundary."""
    pa, la = boundary_area(ann.pupil), boundary_area(ann.limbic)
    if not pa < la:
        raise PupilExceedsLimbic(
            f"{ann.image_id}: pupil area {pa:.3f} is not below limbic area {la:.3f}")


# ---------------------------------------------------------------------------
# polygon helpers

def _shoelace(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _is_simple(v):
    n = len(v)
    p0 = v
    p1 = np.roll(v, -1, axis=0)
    for i in range(n):
        # edges adjacent to i share a vertex and are skipped
        js = [j for j in range(n) if j != i and j != (i + 1) % n and (j + 1) % n != i]
        if not js:
            continue
        js = np.asarray(js)
        a, b = p0[i], p1[i]
        c, d = p0[js], p1[js]
        d1 = _cross(b[0] - a[0], b[1] - a[1], c[:, 0] - a[0], c[:, 1] - a[1])
        d2 = _cross(b[0] - a[0], b[1] - a[1], d[:, 0] - a[0], d[:, 1] - a[1])
        d3 = _cross(d[:, 0] - c[:, 0], d[:, 1] - c[:, 1], a[0] - c[:, 0], a[1] - c[:, 1])
        d4 = _cross(d[:, 0] - c[:, 0], d[:, 1] - c[:, 1], b[0] - c[:, 0], b[1] - c[:, 1])
        proper = (d1 * d2 < 0) & (d3 * d4 < 0)
        if np.any(proper):
            return False
    return True


def _polygon_centroid(v):
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    c = x * yn - xn * y
    area = 0.5 * c.sum()
    return Point2D(float(((x + xn) * c).sum() / (6 * area)),
                   float(((y + yn) * c).sum() / (6 * area)))


# ---------------------------------------------------------------------------
# measurements

def boundary_area(b):
    if isinstance(b, Ellipse):
        return math.pi * b.a * b.b
    return abs(_shoelace(b.array))


def centroid(b):
    if isinstance(b, Ellipse):
        return b.center
    return _polygon_centroid(b.array)


def ray_lengths(b, center, thetas):
    """Distance along each ray ``center + t*(cos θ, sin θ)`` to the nearest positive hit.

    Vectorized over ``thetas``; misses are NaN.
    """
    thetas = np.asarray(thetas, dtype=float)
    ux, uy = np.cos(thetas), np.sin(thetas)
    cx, cy = float(center[0]), float(center[1])
    if isinstance(b, Ellipse):
        cr, sr = math.cos(b.rotation), math.sin(b.rotation)
        dx, dy = cx - b.cx, cy - b.cy
        qx, qy = dx * cr + dy * sr, -dx * sr + dy * cr
        vx, vy = ux * cr + uy * sr, -ux * sr + uy * cr
        ia, ib = 1.0 / (b.a * b.a), 1.0 / (b.b * b.b)
        A = vx * vx * ia + vy * vy * ib
        B = 2.0 * (qx * vx * ia + qy * vy * ib)
        C = qx * qx * ia + qy * qy * ib - 1.0
        disc = B * B - 4.0 * A * C
        ok = disc >= 0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        t1 = (-B - sq) / (2.0 * A)
        t2 = (-B + sq) / (2.0 * A)
        t = np.where(t1 > _RAY_EPS, t1, np.where(t2 > _RAY_EPS, t2, np.nan))
        return np.where(ok, t, np.nan)

    v = b.array
    p0 = v
    e = np.roll(v, -1, axis=0) - v
    ox = p0[:, 0][None, :] - cx
    oy = p0[:, 1][None, :] - cy
    ex, ey = e[:, 0][None, :], e[:, 1][None, :]
    uxx, uyy = ux[:, None], uy[:, None]
    den = _cross(uxx, uyy, ex, ey)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross(ox, oy, ex, ey) / den
        s = _cross(ox, oy, uxx, uyy) / den
    hit = (den != 0) & (s >= 0) & (s <= 1) & (t > _RAY_EPS)
    t = np.where(hit, t, np.inf)
    best = t.min(axis=1)
    return np.where(np.isfinite(best), best, np.nan)


def sample_boundary(b, center, theta):
    """Intersection of the ray from ``center`` at angle ``theta`` with ``b``."""
    t = float(ray_lengths(b, center, np.array([theta]))[0])
    if math.isnan(t):
        raise NoIntersection(f"ray at theta={theta:.6f} from {tuple(center)} misses the boundary")
    return Point2D(center[0] + t * math.cos(theta), center[1] + t * math.sin(theta))


def mean_radius(b):
    """Mean ray length from the boundary's centroid (the radius, for a circle)."""
    if isinstance(b, Ellipse) and b.a == b.b:
        return b.a
    thetas = 2 * np.pi * np.arange(_MEAN_RADIUS_RAYS) / _MEAN_RADIUS_RAYS
    return float(np.nanmean(ray_lengths(b, centroid(b), thetas)))


# ---------------------------------------------------------------------------
# perturbations

def scale_boundary_area(b, s):
    """Scale ``b`` about its centroid so that its area is multiplied by ``s``."""
    if not s > 0:
        raise NonPositiveScale(f"area scale must be positive, got {s}")
    if s == 1:
        return b
    k = math.sqrt(s)
    if isinstance(b, Ellipse):
        return Ellipse(b.cx, b.cy, b.a * k, b.b * k, b.rotation)
    c = np.asarray(centroid(b))
    v = c + (b.array - c) * k
    return Polygon(tuple(map(tuple, v)))


def translate_center(center, limbic, t):
    """Shift ``center`` along x by ``t`` times the limbic radius."""
    if t == 0:
        return Point2D(*center)
    return Point2D(center[0] + t * mean_radius(limbic), center[1])


# ---------------------------------------------------------------------------
# rasterization

def contains(b, x, y):
    """Strict point-in-region test, vectorized over ``x``/``y`` arrays."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(b, Ellipse):
        cr, sr = math.cos(b.rotation), math.sin(b.rotation)
        dx, dy = x - b.cx, y - b.cy
        qx, qy = dx * cr + dy * sr, -dx * sr + dy * cr
        return (qx / b.a) ** 2 + (qy / b.b) ** 2 < 1.0
    v = b.array
    inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
    n = len(v)
    for i in range(n):
        xi, yi = v[i]
        xj, yj = v[(i + 1) % n]
        straddle = (yi > y) != (yj > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = (xj - xi) * (y - yi) / (yj - yi) + xi
        inside ^= straddle & (x < xcross)
    return inside


def pixel_centers(width, height):
    ys, xs = np.mgrid[0:height, 0:width]
    return xs + 0.5, ys + 0.5


def rasterize_iris_mask(annotation, width, height):
    """Iris mask: pixel centers strictly inside the limbic and not strictly inside the pupil."""
    if width <= 0 or height <= 0:
        raise InvalidBoundary(f"mask dimensions must be positive, got {width}x{height}")
    x, y = pixel_centers(width, height)
    bits = contains(annotation.limbic, x, y) & ~contains(annotation.pupil, x, y)
    return SegmentationMask(width, height, bits)
