"""Deterministic synthetic eye images with exact ground-truth boundaries.

Every eye owns a band-limited random texture defined in polar coordinates
(angle, normalized pupil-to-limbus radius). An image of that eye renders the
texture into the annulus between slightly jittered elliptical boundaries,
rotated by a small random angle and corrupted by Gaussian noise. Because the
texture is attached to the same ray-cast polar frame the rubbersheet model
uses, normalization approximately inverts rendering.

Gray levels follow NIR appearance: dark pupil, mid-gray iris, bright sclera.
All randomness derives from ``SeedSequence([seed, ...])`` keyed by eye and
image index, so output does not depend on generation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datasets.pgm import GrayImage
from .datasets.store import Dataset
from .errors import InvalidConfig
from .geom import Ellipse, EyeAnnotation, Point2D, contains, pixel_centers, ray_lengths

PUPIL_LEVEL = 0.08
SCLERA_LEVEL = 0.82
IRIS_MEAN = 0.45
IRIS_CONTRAST = 0.12

_TEXTURE_COMPONENTS = 48
_MAX_ANGULAR_FREQ = 32
_MAX_RADIAL_HALF_CYCLES = 5.0


@dataclass(frozen=True)
class SynthConfig:
    num_eyes: int = 20
    images_per_eye: int = 5
    image_size: int = 160
    seed: int = 42
    noise_sigma: float = 8.0  # gray levels
    rotation_jitter: float = 0.07  # radians, below the 7-column shift range
    boundary_jitter: float = 0.03  # fraction of radius
    texture_variation: float = 0.8  # std of the image-specific texture relative to the eye's

    def validate(self):
        if self.num_eyes < 2 or self.images_per_eye < 2:
            raise InvalidConfig("need at least 2 eyes and 2 images per eye")
        if self.image_size < 64:
            raise InvalidConfig("image_size must be at least 64")
        if self.noise_sigma < 0 or self.rotation_jitter < 0:
            raise InvalidConfig("noise and rotation jitter must be non-negative")
        if not 0 <= self.boundary_jitter <= 0.03:
            raise InvalidConfig("boundary_jitter must lie in [0, 0.03]")
        if self.texture_variation < 0:
            raise InvalidConfig("texture_variation must be non-negative")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfig("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class PolarField:
    """Unit-variance sum of separable cosines, periodic in angle."""

    angular_freq: np.ndarray
    radial_freq: np.ndarray
    amplitude: np.ndarray
    angular_phase: np.ndarray
    radial_phase: np.ndarray

    @classmethod
    def random(cls, rng, k=_TEXTURE_COMPONENTS):
        return cls(angular_freq=rng.integers(2, _MAX_ANGULAR_FREQ + 1, k).astype(float),
                   radial_freq=rng.uniform(0, _MAX_RADIAL_HALF_CYCLES, k),
                   amplitude=rng.normal(0, 1, k),
                   angular_phase=rng.uniform(0, 2 * np.pi, k),
                   radial_phase=rng.uniform(0, 2 * np.pi, k))

    def __call__(self, theta, rho):
        theta = np.asarray(theta)[..., None]
        rho = np.asarray(rho)[..., None]
        f = (self.amplitude
             * np.cos(self.angular_freq * theta + self.angular_phase)
             * np.cos(np.pi * self.radial_freq * rho + self.radial_phase)).sum(axis=-1)
        return f / math.sqrt(float((self.amplitude ** 2).sum()) / 4)


@dataclass(frozen=True)
class EyeModel:
    center: tuple
    pupil_offset: tuple  # pupil center relative to the limbic center
    pupil_axes: tuple
    limbic_axes: tuple
    pupil_rotation: float
    limbic_rotation: float
    field: PolarField


def iris_texture(eye_field, image_field, variation, theta, rho):
    """Iris gray level in [0, 1] at canonical angle ``theta`` and radius ``rho``."""
    f = eye_field(theta, rho)
    if variation > 0:
        f = (f + variation * image_field(theta, rho)) / math.sqrt(1 + variation ** 2)
    return np.clip(IRIS_MEAN + IRIS_CONTRAST * f, 0.0, 1.0)


def _rng(*key):
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


def make_eye(config, eye):
    rng = _rng(config.seed, 0, eye)
    s = config.image_size
    rl = rng.uniform(0.34, 0.38) * s
    rp = rng.uniform(0.11, 0.15) * s
    return EyeModel(
        center=tuple(s / 2 + rng.uniform(-3, 3, 2)),
        pupil_offset=tuple(rng.uniform(-0.04, 0.04, 2) * rl),
        pupil_axes=(rp, rp * rng.uniform(0.92, 1.0)),
        limbic_axes=(rl, rl * rng.uniform(0.94, 1.0)),
        pupil_rotation=rng.uniform(0, np.pi),
        limbic_rotation=rng.uniform(0, np.pi),
        field=PolarField.random(rng),
    )


def image_annotation(config, eye_model, eye, index):
    """Boundaries of one acquisition and the per-image rotation applied to the texture."""
    rng = _rng(config.seed, 1, eye, index)
    j = config.boundary_jitter
    rot = rng.uniform(-config.rotation_jitter, config.rotation_jitter)
    shift = rng.uniform(-2, 2, 2)
    pupil_scale = 1 + rng.uniform(-j, j)
    limbic_scale = 1 + rng.uniform(-j, j)
    cr, sr = math.cos(rot), math.sin(rot)
    ox, oy = eye_model.pupil_offset
    lcx, lcy = eye_model.center[0] + shift[0], eye_model.center[1] + shift[1]
    pcx, pcy = lcx + cr * ox - sr * oy, lcy + sr * ox + cr * oy
    pupil = Ellipse(pcx, pcy, eye_model.pupil_axes[0] * pupil_scale,
                    eye_model.pupil_axes[1] * pupil_scale, eye_model.pupil_rotation + rot)
    limbic = Ellipse(lcx, lcy, eye_model.limbic_axes[0] * limbic_scale,
                     eye_model.limbic_axes[1] * limbic_scale, eye_model.limbic_rotation + rot)
    image_id = f"e{eye:03d}_{index:02d}"
    return EyeAnnotation(image_id, pupil, limbic, Point2D(pcx, pcy)), rot


def render(config, eye_model, annotation, rotation, rng):
    """Render one image; returns ``(pixels uint8, iris support mask)``."""
    s = config.image_size
    x, y = pixel_centers(s, s)
    cx, cy = annotation.center
    theta = np.arctan2(y - cy, x - cx).ravel()
    dist = np.hypot(x - cx, y - cy).ravel()
    in_limbic = contains(annotation.limbic, x, y).ravel()
    in_pupil = contains(annotation.pupil, x, y).ravel()
    support = in_limbic & ~in_pupil

    values = np.full(s * s, SCLERA_LEVEL)
    values[in_pupil] = PUPIL_LEVEL
    t = theta[support]
    rp = ray_lengths(annotation.pupil, annotation.center, t)
    rl = ray_lengths(annotation.limbic, annotation.center, t)
    rho = np.clip((dist[support] - rp) / (rl - rp), 0.0, 1.0)
    image_field = PolarField.random(rng)
    values[support] = iris_texture(eye_model.field, image_field, config.texture_variation,
                                   t - rotation, rho)

    gray = values.reshape(s, s) * 255 + rng.normal(0, config.noise_sigma, (s, s))
    pixels = np.clip(np.floor(gray + 0.5), 0, 255).astype(np.uint8)
    return pixels, support.reshape(s, s)


def generate_with_masks(config=SynthConfig()):
    config.validate()
    images, annotations, eye_ids, masks = [], [], [], []
    for eye in range(config.num_eyes):
        model = make_eye(config, eye)
        for index in range(config.images_per_eye):
            ann, rot = image_annotation(config, model, eye, index)
            pixels, support = render(config, model, ann, rot, _rng(config.seed, 2, eye, index))
            images.append(GrayImage(pixels))
            annotations.append(ann)
            eye_ids.append(f"e{eye:03d}")
            masks.append(support)
    ds = Dataset(images, annotations, eye_ids, {"generator": "synthgen", "config": config})
    return ds, masks


def generate(config=SynthConfig()):
    return generate_with_masks(config)[0]


def enumerate_pairs(dataset):
    """All unordered index pairs ``(i, j)``, ``i < j``, split into genuine and imposter."""
    ids = list(dataset.eye_ids) if hasattr(dataset, "eye_ids") else list(dataset)
    genuine, imposter = [], []
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            (genuine if ids[i] == ids[j] else imposter).append((i, j))
    return genuine, imposter
