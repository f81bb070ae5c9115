"""Pixel-level segmentation accuracy against ground-truth masks.

Database-level measures are means of per-image rates (E1, E2, precision,
recall and the F-measure). Zero denominators yield a zero rate, so a
degenerate prediction is penalized rather than rejected.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptySequence


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class ImageScores:
    counts: ConfusionCounts
    precision: float
    recall: float
    fmeasure: float


@dataclass(frozen=True)
class DatabaseMetrics:
    e1: float
    e2: float
    precision: float
    recall: float
    fmeasure: float
    per_image: tuple = field(default=())

    @property
    def dice(self):
        # Dice/Sorensen coincide with the F1 measure for binary masks
        return self.fmeasure


def _bits(mask):
    return np.asarray(getattr(mask, "bits", mask), dtype=bool)


def confusion(pred, gt):
    p, g = _bits(pred), _bits(gt)
    if p.shape != g.shape:
        raise DimensionMismatch(f"prediction {p.shape} vs ground truth {g.shape}")
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = p.size - tp - fp - fn
    return ConfusionCounts(tp, fp, fn, tn)


def _ratio(num, den):
    return num / den if den else 0.0


def _nonempty(counts):
    counts = list(counts)
    if not counts:
        raise EmptySequence("no images to aggregate")
    return counts


def e1(counts):
    counts = _nonempty(counts)
    return sum((c.fp + c.fn) / c.total for c in counts) / len(counts)


def e2(counts):
    counts = _nonempty(counts)
    n = len(counts)
    type1 = sum(_ratio(c.fp, c.fp + c.tn) for c in counts) / n
    type2 = sum(_ratio(c.fn, c.fn + c.tp) for c in counts) / n
    return 0.5 * type1 + 0.5 * type2


def image_scores(c):
    p = _ratio(c.tp, c.tp + c.fp)
    r = _ratio(c.tp, c.tp + c.fn)
    f = _ratio(2 * r * p, r + p)
    return ImageScores(c, p, r, f)


def precision_recall_f(counts):
    """Mean per-image precision, recall and F-measure.

    The F-measure is the mean of per-image harmonic means, not the harmonic
    mean of the aggregate precision and recall.
    """
    counts = _nonempty(counts)
    scores = [image_scores(c) for c in counts]
    n = len(scores)
    return (sum(s.precision for s in scores) / n,
            sum(s.recall for s in scores) / n,
            sum(s.fmeasure for s in scores) / n)


def database_metrics(counts):
    counts = _nonempty(counts)
    p, r, f = precision_recall_f(counts)
    return DatabaseMetrics(e1(counts), e2(counts), p, r, f,
                           tuple(image_scores(c) for c in counts))


def z_outliers(fvalues, threshold=3.0):
    """Indices whose population z-score exceeds ``threshold`` in magnitude."""
    f = np.asarray(list(fvalues), dtype=float)
    if f.size < 2:
        return set()
    sigma = f.std()
    if sigma == 0:
        return set()
    z = (f - f.mean()) / sigma
    return {int(i) for i in np.flatnonzero(np.abs(z) > threshold)}


def metrics_table(rows):
    """Render ``[(segmentation, DatabaseMetrics), ...]`` as CSV in percent."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["segmentation", "F[%]", "E1[%]", "E2[%]", "P[%]", "R[%]", "outliers"])
    for name, m in rows:
        n_out = len(z_outliers(s.fmeasure for s in m.per_image))
        w.writerow([name, f"{100 * m.fmeasure:.2f}", f"{100 * m.e1:.2f}", f"{100 * m.e2:.2f}",
                    f"{100 * m.precision:.2f}", f"{100 * m.recall:.2f}", n_out])
    return buf.getvalue()
