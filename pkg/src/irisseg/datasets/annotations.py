"""Line-oriented annotation files.

One record per line, comma-separated::

    image_id,<pupil>,<limbic>[,point(<x> <y>)]

where a boundary is ``circle(cx cy r)``, ``ellipse(cx cy a b rotation)`` or
``polygon(x y;x y;...)``. Blank lines and lines starting with ``#`` are
ignored. Without an explicit center the pupil centroid is used.
"""

from __future__ import annotations

import re

from ..errors import InvalidBoundary, InvariantViolation, ParseError
from ..geom import Ellipse, EyeAnnotation, Point2D, Polygon, boundary_area, centroid

HEADER = "# image_id,pupil,limbic,center"

_DESCRIPTOR = re.compile(r"^\s*([a-z]+)\(([^()]*)\)\s*$")


def _numbers(text, lineno):
    try:
        return [float(t) for t in text.split()]
    except ValueError:
        raise ParseError(f"bad number in {text!r}", lineno) from None


def parse_boundary(text, lineno=None):
    m = _DESCRIPTOR.match(text)
    if not m:
        raise ParseError(f"malformed boundary descriptor {text!r}", lineno)
    kind, body = m.groups()
    try:
        if kind == "circle":
            v = _numbers(body, lineno)
            if len(v) != 3:
                raise ParseError("circle takes cx cy r", lineno)
            return Ellipse(v[0], v[1], v[2], v[2], 0.0)
        if kind == "ellipse":
            v = _numbers(body, lineno)
            if len(v) != 5:
                raise ParseError("ellipse takes cx cy a b rotation", lineno)
            return Ellipse(*v)
        if kind == "polygon":
            verts = []
            for item in body.split(";"):
                v = _numbers(item, lineno)
                if len(v) != 2:
                    raise ParseError(f"polygon vertex {item!r} must be 'x y'", lineno)
                verts.append(tuple(v))
            return Polygon(tuple(verts))
    except InvalidBoundary as exc:
        raise ParseError(str(exc), lineno) from None
    raise ParseError(f"unknown boundary kind {kind!r}", lineno)


def parse_point(text, lineno=None):
    m = _DESCRIPTOR.match(text)
    if not m or m.group(1) != "point":
        raise ParseError(f"malformed center {text!r}", lineno)
    v = _numbers(m.group(2), lineno)
    if len(v) != 2:
        raise ParseError("point takes x y", lineno)
    return Point2D(*v)


def format_boundary(b):
    if isinstance(b, Ellipse):
        if b.a == b.b and b.rotation == 0:
            return f"circle({b.cx!r} {b.cy!r} {b.a!r})"
        return f"ellipse({b.cx!r} {b.cy!r} {b.a!r} {b.b!r} {b.rotation!r})"
    return "polygon(" + ";".join(f"{x!r} {y!r}" for x, y in b.vertices) + ")"


def format_annotation(ann):
    c = ann.center
    return (f"{ann.image_id},{format_boundary(ann.pupil)},{format_boundary(ann.limbic)},"
            f"point({float(c[0])!r} {float(c[1])!r})")


def parse_annotation(line, lineno=None):
    parts = [p.strip() for p in line.split(",")]
    if len(parts) not in (3, 4):
        raise ParseError(f"expected 3 or 4 fields, got {len(parts)}", lineno)
    image_id = parts[0]
    if not image_id:
        raise ParseError("empty image id", lineno)
    pupil = parse_boundary(parts[1], lineno)
    limbic = parse_boundary(parts[2], lineno)
    center = parse_point(parts[3], lineno) if len(parts) == 4 else centroid(pupil)
    ann = EyeAnnotation(image_id, pupil, limbic, Point2D(*center))
    if not boundary_area(pupil) < boundary_area(limbic):
        raise InvariantViolation(f"record {image_id!r} (line {lineno}): pupil is not smaller than limbic boundary")
    return ann


def loads_annotations(text):
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        out.append(parse_annotation(line, lineno))
    return out


def dumps_annotations(annotations):
    return "\n".join([HEADER] + [format_annotation(a) for a in annotations]) + "\n"


def read_annotations(path):
    with open(path, encoding="utf-8") as fh:
        return loads_annotations(fh.read())


def write_annotations(path, annotations):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_annotations(annotations))
