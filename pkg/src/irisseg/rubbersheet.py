"""Rubbersheet normalization of the iris annulus to a fixed polar grid.

Both boundaries are parameterized by rays cast from the annotation's
normalization center, so moving the center changes which image points each
texture column samples. Rays that miss a boundary (possible once the center
has been pushed outside it) fall back to the center itself and the affected
samples are flagged as degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensions
from .geom import Point2D, ray_lengths

DEFAULT_WIDTH = 512
DEFAULT_HEIGHT = 64

# annulus columns narrower than this (pixels) are degenerate
_MIN_SPAN = 1e-9


@dataclass
class NormalizedTexture:
    values: np.ndarray  # (H, W) gray levels in [0, 1]; row = radius, column = angle
    flags: np.ndarray  # (H, W) bool, True = degenerate or out-of-image sample

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def height(self):
        return self.values.shape[0]


def angles(width):
    return 2 * np.pi * np.arange(width) / width


def radii(height):
    return (np.arange(height) + 0.5) / height


def boundary_points(annotation, thetas):
    """Pupillary and limbic points along rays from the annotation center.

    Returns ``(px, py, lx, ly, missed)`` arrays over ``thetas``.
    """
    cx, cy = annotation.center
    thetas = np.asarray(thetas, dtype=float)
    ux, uy = np.cos(thetas), np.sin(thetas)
    rp = ray_lengths(annotation.pupil, annotation.center, thetas)
    rl = ray_lengths(annotation.limbic, annotation.center, thetas)
    missed = np.isnan(rp) | np.isnan(rl)
    rp = np.nan_to_num(rp, nan=0.0)
    rl = np.nan_to_num(rl, nan=0.0)
    return cx + rp * ux, cy + rp * uy, cx + rl * ux, cy + rl * uy, missed


def rubbersheet_point(annotation, theta, r):
    """``(1 - r) * P(theta) + r * L(theta)``."""
    px, py, lx, ly, _ = boundary_points(annotation, [theta])
    return Point2D(float((1 - r) * px[0] + r * lx[0]), float((1 - r) * py[0] + r * ly[0]))


def _as_unit_gray(image):
    img = np.asarray(image)
    if img.ndim != 2 or img.size == 0:
        raise InvalidDimensions(f"expected a non-empty 2-D image, got shape {img.shape}")
    if np.issubdtype(img.dtype, np.integer):
        return img.astype(np.float64) / 255.0
    return img.astype(np.float64)


def bilinear(img, x, y):
    """Sample ``img`` at continuous pixel coordinates (pixel centers at +0.5).

    Returns ``(values, outside)``; outside samples are clamped to the border.
    """
    h, w = img.shape
    u = x - 0.5
    v = y - 0.5
    outside = (u < 0) | (u > w - 1) | (v < 0) | (v > h - 1)
    u = np.clip(u, 0, w - 1)
    v = np.clip(v, 0, h - 1)
    x0 = np.clip(np.floor(u).astype(np.intp), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(v).astype(np.intp), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = u - x0
    fy = v - y0
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bottom = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    return top * (1 - fy) + bottom * fy, outside


def normalize(image, annotation, width=DEFAULT_WIDTH, height=DEFAULT_HEIGHT):
    if width < 16 or height < 4:
        raise InvalidDimensions(f"texture must be at least 16x4, got {width}x{height}")
    img = _as_unit_gray(image)
    px, py, lx, ly, missed = boundary_points(annotation, angles(width))
    r = radii(height)[:, None]
    xs = (1 - r) * px[None, :] + r * lx[None, :]
    ys = (1 - r) * py[None, :] + r * ly[None, :]
    values, outside = bilinear(img, xs, ys)
    span = np.hypot(lx - px, ly - py)
    degenerate = missed | (span < _MIN_SPAN)
    flags = outside | degenerate[None, :]
    return NormalizedTexture(np.clip(values, 0.0, 1.0), flags)


def texture_to_gray8(texture):
    """Quantize a texture to 8 bits (x255, rounded half up) for debugging dumps."""
    return np.floor(texture.values * 255 + 0.5).astype(np.uint8)
