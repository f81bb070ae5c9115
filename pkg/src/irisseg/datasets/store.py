"""In-memory datasets and their on-disk layout.

A dataset directory contains::

    images/<image_id>.pgm
    annotations.csv
    identities.csv
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from ..errors import InvariantViolation, ParseError
from .annotations import read_annotations, write_annotations
from .pgm import load_pgm, save_pgm
from .scores import read_identities, write_identities


@dataclass
class Dataset:
    images: list  # GrayImage per annotation
    annotations: list  # EyeAnnotation
    eye_ids: list  # identity label per image
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not len(self.images) == len(self.annotations) == len(self.eye_ids):
            raise InvariantViolation("images, annotations and identities differ in length")

    def __len__(self):
        return len(self.annotations)

    @property
    def image_ids(self):
        return [a.image_id for a in self.annotations]

    def index_of(self, image_id):
        return self.image_ids.index(image_id)

    def replace_annotations(self, annotations, **provenance):
        prov = dict(self.provenance)
        prov.update(provenance)
        return Dataset(self.images, list(annotations), self.eye_ids, prov)


def save_dataset(directory, dataset):
    os.makedirs(os.path.join(directory, "images"), exist_ok=True)
    for img, ann in zip(dataset.images, dataset.annotations):
        save_pgm(os.path.join(directory, "images", f"{ann.image_id}.pgm"), img)
    write_annotations(os.path.join(directory, "annotations.csv"), dataset.annotations)
    write_identities(os.path.join(directory, "identities.csv"), dataset.image_ids, dataset.eye_ids)


def load_dataset(directory, annotations_path=None):
    anns = read_annotations(annotations_path or os.path.join(directory, "annotations.csv"))
    ids = read_identities(os.path.join(directory, "identities.csv"))
    missing = [a.image_id for a in anns if a.image_id not in ids]
    if missing:
        raise ParseError(f"no identity label for {missing[0]!r}")
    images = [load_pgm(os.path.join(directory, "images", f"{a.image_id}.pgm")) for a in anns]
    return Dataset(images, anns, [ids[a.image_id] for a in anns])
