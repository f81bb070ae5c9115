"""Binary (P5) PGM reading and writing, 8-bit only."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ..errors import MalformedHeader, TruncatedData, UnsupportedMaxval

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


@dataclass
class GrayImage:
    pixels: np.ndarray  # (height, width) uint8
    maxval: int = 255

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.ndim != 2:
            raise ValueError(f"expected a 2-D pixel array, got shape {self.pixels.shape}")

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.pixels if dtype is None else self.pixels.astype(dtype)


def read_pgm(data):
    data = bytes(data)
    pos = 0
    fields = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise MalformedHeader("incomplete PGM header")
        fields.append(m.group(1))
        pos = m.end()
    magic, w, h, maxval = fields
    if magic != b"P5":
        raise MalformedHeader(f"not a binary PGM (magic {magic!r})")
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise MalformedHeader("non-numeric PGM header field") from None
    if w <= 0 or h <= 0:
        raise MalformedHeader(f"invalid dimensions {w}x{h}")
    if not 0 < maxval < 65536:
        raise MalformedHeader(f"invalid maxval {maxval}")
    if maxval > 255:
        raise UnsupportedMaxval(f"maxval {maxval} needs 16-bit samples, only 8-bit is supported")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise MalformedHeader("missing whitespace after maxval")
    pos += 1
    raster = data[pos:pos + w * h]
    if len(raster) < w * h:
        raise TruncatedData(f"expected {w * h} pixel bytes, got {len(raster)}")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(h, w).copy()
    return GrayImage(pixels, maxval)


def write_pgm(image):
    img = image if isinstance(image, GrayImage) else GrayImage(image)
    header = b"P5\n%d %d\n%d\n" % (img.width, img.height, img.maxval)
    return header + np.ascontiguousarray(img.pixels).tobytes()


def load_pgm(path):
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(path, image):
    with open(path, "wb") as fh:
        fh.write(write_pgm(image))
