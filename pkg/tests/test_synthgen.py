import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irisseg import geom, segmetrics, synthgen
from irisseg.errors import InvalidConfig
from irisseg.synthgen import SynthConfig

SMALL = SynthConfig(num_eyes=3, images_per_eye=2, image_size=96)


def test_deterministic():
    a = synthgen.generate(SMALL)
    b = synthgen.generate(SMALL)
    assert a.annotations == b.annotations
    assert all(np.array_equal(x.pixels, y.pixels) for x, y in zip(a.images, b.images))
    c = synthgen.generate(SynthConfig(num_eyes=3, images_per_eye=2, image_size=96, seed=43))
    assert not np.array_equal(a.images[0].pixels, c.images[0].pixels)


def test_eye_is_independent_of_dataset_size():
    a = synthgen.generate(SMALL)
    b = synthgen.generate(SynthConfig(num_eyes=4, images_per_eye=3, image_size=96))
    assert a.annotations[0] == b.annotations[0]
    assert np.array_equal(a.images[0].pixels, b.images[0].pixels)


def test_layout_and_labels():
    ds = synthgen.generate(SMALL)
    assert ds.image_ids == ["e000_00", "e000_01", "e001_00", "e001_01", "e002_00", "e002_01"]
    assert ds.eye_ids == ["e000", "e000", "e001", "e001", "e002", "e002"]
    assert ds.provenance["config"] == SMALL


def test_annotations_are_valid_and_inside_image(default_dataset):
    for ann in default_dataset.annotations:
        geom.check_annotation(ann)
        assert geom.contains(ann.pupil, *ann.center)
        lim = ann.limbic
        assert lim.cx - lim.a > 0 and lim.cx + lim.a < 160


def test_ground_truth_masks_match_rasterization(default_synth):
    ds, masks = default_synth
    for ann, mask in zip(ds.annotations[:10], masks[:10]):
        c = segmetrics.confusion(geom.rasterize_iris_mask(ann, 160, 160), mask)
        assert c.fp == 0 and c.fn == 0


def test_gray_levels(default_synth):
    ds, masks = default_synth
    img = ds.images[0].pixels.astype(float)
    pupil = geom.contains(ds.annotations[0].pupil, *geom.pixel_centers(160, 160))
    sclera = ~pupil & ~masks[0]
    assert img[pupil].mean() == pytest.approx(255 * synthgen.PUPIL_LEVEL, abs=3)
    assert img[sclera].mean() == pytest.approx(255 * synthgen.SCLERA_LEVEL, abs=3)
    assert img[pupil].mean() < img[masks[0]].mean() < img[sclera].mean()


def test_pair_enumeration():
    g, i = synthgen.enumerate_pairs(["e0"] * 2)
    assert (len(g), len(i)) == (1, 0)
    ds = synthgen.generate(SynthConfig(num_eyes=5, images_per_eye=4, image_size=64))
    g, i = synthgen.enumerate_pairs(ds)
    assert (len(g), len(i)) == (30, 160)


@given(eyes=st.integers(1, 12), per=st.integers(1, 6))
def test_pair_counts(eyes, per):
    ids = [f"e{e}" for e in range(eyes) for _ in range(per)]
    g, i = synthgen.enumerate_pairs(ids)
    n = eyes * per
    assert len(g) == eyes * math.comb(per, 2)
    assert len(g) + len(i) == math.comb(n, 2)
    assert all(a < b for a, b in g + i)


@pytest.mark.parametrize("bad", [
    dict(num_eyes=1), dict(images_per_eye=1), dict(image_size=32), dict(noise_sigma=-1),
    dict(boundary_jitter=0.05), dict(texture_variation=-0.1), dict(seed=-1),
])
def test_invalid_config(bad):
    with pytest.raises(InvalidConfig):
        synthgen.generate(SynthConfig(**bad))


def test_polar_field_unit_variance():
    f = synthgen.PolarField.random(np.random.default_rng(1))
    t, r = np.meshgrid(np.linspace(0, 2 * np.pi, 400, endpoint=False), np.linspace(0, 1, 100))
    v = f(t, r)
    assert v.std() == pytest.approx(1, rel=0.35)
    assert f(t + 2 * np.pi, r) == pytest.approx(v, abs=1e-9)
