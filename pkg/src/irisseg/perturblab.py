"""Perturbation experiments on the segmentation parameters.

Each sweep point perturbs the annotations of every image in the same way,
re-runs normalization, encoding and all-pairs matching, and summarizes the
resulting ROC. Cross-scale runs instead compare codes produced at two
different scales of the same boundary.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import encoder, rubbersheet
from .encoder import DEFAULT_MAX_SHIFT, EncoderParams
from .errors import EmptyPopulation, InvalidConfig, InvalidScaleSet, PupilExceedsLimbic, UnknownImageId
from .evalstats import GENUINE, IMPOSTER, Comparison, RocSummary, ScoreSet, roc_summary
from .geom import check_annotation, scale_boundary_area, translate_center
from .synthgen import enumerate_pairs

log = logging.getLogger(__name__)

LIMBIC_SCALE = "limbicScale"
PUPIL_SCALE = "pupilScale"
CENTER_TRANSLATE = "centerTranslate"
CROSS_SCALE = "crossScale"
KINDS = (LIMBIC_SCALE, PUPIL_SCALE, CENTER_TRANSLATE, CROSS_SCALE)


def default_scales():
    return [round(float(s), 10) for s in np.arange(0.5, 1.1 + 1e-9, 0.05)]


def default_offsets():
    return [round(float(t), 10) for t in np.arange(-0.5, 0.5 + 1e-9, 0.1)]


@dataclass(frozen=True)
class PipelineConfig:
    width: int = rubbersheet.DEFAULT_WIDTH
    height: int = rubbersheet.DEFAULT_HEIGHT
    encoder: EncoderParams = EncoderParams()
    max_shift: int = DEFAULT_MAX_SHIFT
    far: float = 1e-4
    jobs: int = 1


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str
    values: tuple
    cross_scale_delta: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfig(f"unknown perturbation kind {self.kind!r}")
        if self.kind == CENTER_TRANSLATE:
            if any(not -1 <= v <= 1 for v in self.values):
                raise InvalidConfig("center offsets must lie in [-1, 1]")
        elif any(v <= 0 for v in self.values):
            raise InvalidConfig("scale values must be positive")


@dataclass
class SweepResult:
    kind: str
    points: dict  # parameter value -> RocSummary
    baseline: object  # RocSummary at the identity parameter
    rejected: dict = field(default_factory=dict)  # parameter value -> rejected image ids
    pairs: dict = field(default_factory=dict)  # parameter value -> number of comparisons
    partners: dict = field(default_factory=dict)  # cross-scale: base scale -> gallery scale

    def series_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["parameter", "eer", "auc", "frr_at_far", "pairs", "rejected"])
        for v in sorted(self.points):
            s = self.points[v]
            w.writerow([repr(v), repr(s.eer), repr(s.auc), repr(s.frr_at_far),
                        self.pairs.get(v, ""), len(self.rejected.get(v, ()))])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# pipeline

def _encode_one(args):
    image, ann, cfg = args
    tex = rubbersheet.normalize(image, ann, cfg.width, cfg.height)
    return encoder.encode(tex, cfg.encoder)


def encode_all(images, annotations, cfg=PipelineConfig()):
    """Codes for every image; ``None`` where the annotation is rejected."""
    valid = []
    for ann in annotations:
        try:
            check_annotation(ann)
            valid.append(True)
        except PupilExceedsLimbic as exc:
            log.info("rejected %s", exc)
            valid.append(False)
    jobs = [(img, ann, cfg) for img, ann, ok in zip(images, annotations, valid) if ok]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            done = list(pool.map(_encode_one, jobs, chunksize=8))
    else:
        done = [_encode_one(j) for j in jobs]
    it = iter(done)
    return [next(it) if ok else None for ok in valid]


def compare(dataset, probe_codes, gallery_codes, cfg=PipelineConfig()):
    """All unordered pairs ``i < j``: probe code of ``i`` against gallery code of ``j``."""
    ok = [i for i in range(len(dataset))
          if probe_codes[i] is not None and gallery_codes[i] is not None]
    dist, _ = encoder.match_matrix([probe_codes[i] for i in ok],
                                   [gallery_codes[i] for i in ok], cfg.max_shift)
    pos = {i: k for k, i in enumerate(ok)}
    ids = dataset.image_ids
    out = []
    genuine, imposter = enumerate_pairs(dataset)
    for label, pairs in ((GENUINE, genuine), (IMPOSTER, imposter)):
        for i, j in pairs:
            if i in pos and j in pos:
                out.append(Comparison(ids[i], ids[j], label, float(dist[pos[i], pos[j]])))
    out.sort(key=lambda c: (c.id_a, c.id_b))
    return out


def _summarize(comparisons, far):
    try:
        return roc_summary(ScoreSet.from_comparisons(comparisons), far)
    except EmptyPopulation as exc:
        # every image (or every genuine pair) was rejected at this sweep point
        log.warning("no usable comparisons: %s", exc)
        nan = float("nan")
        return RocSummary(nan, nan, nan, far)


def evaluate(dataset, cfg=PipelineConfig(), annotations=None):
    """Normalize, encode and match every pair; returns ``(comparisons, RocSummary)``.

    If rejections leave a population empty the summary holds NaN measures.
    """
    anns = dataset.annotations if annotations is None else annotations
    codes = encode_all(dataset.images, anns, cfg)
    comps = compare(dataset, codes, codes, cfg)
    return comps, _summarize(comps, cfg.far)


# ---------------------------------------------------------------------------
# perturbations

def scaled_annotations(annotations, boundary, s):
    if boundary == "limbic":
        return [a.with_changes(limbic=scale_boundary_area(a.limbic, s)) for a in annotations]
    if boundary == "pupillary":
        return [a.with_changes(pupil=scale_boundary_area(a.pupil, s)) for a in annotations]
    raise InvalidConfig(f"boundary must be 'limbic' or 'pupillary', got {boundary!r}")


def translated_annotations(annotations, t):
    return [a.with_changes(center=translate_center(a.center, a.limbic, t)) for a in annotations]


def _rejected(annotations):
    out = []
    for a in annotations:
        try:
            check_annotation(a)
        except PupilExceedsLimbic:
            out.append(a.image_id)
    return out


def _sweep(dataset, kind, values, identity, perturb, cfg):
    values = [float(v) for v in values]
    if identity not in values:
        raise InvalidScaleSet(f"parameter set must contain the identity value {identity}")
    result = SweepResult(kind, {}, None)
    for v in values:
        anns = perturb(dataset.annotations, v)
        comps, summary = evaluate(dataset, cfg, anns)
        result.points[v] = summary
        result.pairs[v] = len(comps)
        result.rejected[v] = _rejected(anns)
        log.info("%s %s: EER %.4f", kind, v, summary.eer)
    result.baseline = result.points[identity]
    return result


def run_scale_sweep(dataset, boundary, scales=None, cfg=PipelineConfig()):
    scales = default_scales() if scales is None else scales
    kind = LIMBIC_SCALE if boundary == "limbic" else PUPIL_SCALE
    return _sweep(dataset, kind, scales, 1.0,
                  lambda anns, s: scaled_annotations(anns, boundary, s), cfg)


def run_center_sweep(dataset, offsets=None, cfg=PipelineConfig()):
    offsets = default_offsets() if offsets is None else offsets
    PerturbationSpec(CENTER_TRANSLATE, tuple(offsets))
    return _sweep(dataset, CENTER_TRANSLATE, offsets, 0.0, translated_annotations, cfg)


def partner_scale(s, delta):
    """Gallery scale for base scale ``s``: one step of ``|delta|`` towards the unscaled version."""
    d = abs(delta)
    return round(s - d if s > 1 else s + d, 10)


def run_cross_scale(dataset, boundary, base_scales=None, delta=0.05, cfg=PipelineConfig()):
    base_scales = default_scales() if base_scales is None else [float(s) for s in base_scales]
    PerturbationSpec(CROSS_SCALE, tuple(base_scales), delta)
    cache = {}

    def codes_at(s):
        if s not in cache:
            cache[s] = encode_all(dataset.images, scaled_annotations(dataset.annotations, boundary, s), cfg)
        return cache[s]

    result = SweepResult(CROSS_SCALE, {}, None)
    for s in base_scales:
        g = partner_scale(s, delta)
        comps = compare(dataset, codes_at(s), codes_at(g), cfg)
        result.points[s] = _summarize(comps, cfg.far)
        result.pairs[s] = len(comps)
        result.partners[s] = g
        result.rejected[s] = sorted(set(_rejected(scaled_annotations(dataset.annotations, boundary, s)))
                                    | set(_rejected(scaled_annotations(dataset.annotations, boundary, g))))
    _, result.baseline = evaluate(dataset, cfg)
    return result


# ---------------------------------------------------------------------------
# segmentation outliers

def inject_outlier_segmentation(dataset, image_ids, scale):
    """Scale the limbic boundary of the listed images only (e.g. a collarette miss-detection)."""
    wanted = set(image_ids)
    unknown = wanted - set(dataset.image_ids)
    if unknown:
        raise UnknownImageId(f"unknown image ids: {sorted(unknown)}")
    if not wanted:
        return dataset
    anns = [a.with_changes(limbic=scale_boundary_area(a.limbic, scale)) if a.image_id in wanted else a
            for a in dataset.annotations]
    injected = dict(dataset.provenance.get("injected", {}))
    injected.update({i: scale for i in sorted(wanted)})
    return dataset.replace_annotations(anns, injected=injected)


@dataclass(frozen=True)
class GroupResponse:
    intra_injected: list
    intra_clean: list
    inter: list

    @property
    def intra_mean(self):
        return float(np.mean(self.intra_injected + self.intra_clean))

    @property
    def inter_mean(self):
        return float(np.mean(self.inter))


def group_responses(dataset, comparisons, eye_id):
    """Split one eye's genuine scores by whether each side carries an injected segmentation."""
    injected = set(dataset.provenance.get("injected", {}))
    eye_images = {i for i, e in zip(dataset.image_ids, dataset.eye_ids) if e == eye_id}
    intra_inj, intra_clean, inter = [], [], []
    for c in comparisons:
        if c.label != GENUINE or c.id_a not in eye_images:
            continue
        a, b = c.id_a in injected, c.id_b in injected
        if a and b:
            intra_inj.append(c.distance)
        elif not a and not b:
            intra_clean.append(c.distance)
        else:
            inter.append(c.distance)
    return GroupResponse(intra_inj, intra_clean, inter)
