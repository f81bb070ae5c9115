"""ROC summaries and the significance tests used to compare tool chains.

Scores are dissimilarities (fractional Hamming distances): a comparison is
accepted when its score is at or below the threshold.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import rankdata

from .errors import (ComparisonSetMismatch, DegenerateTable, EmptyPopulation, EmptySequence,
                     LengthMismatch, TooShort)

GENUINE = "genuine"
IMPOSTER = "imposter"

# chi-squared critical value for one degree of freedom at p = 0.01
CHI2_CRITICAL_1PCT = 6.64

_KS_TERMS = 100


@dataclass(frozen=True)
class Comparison:
    id_a: str
    id_b: str
    label: str  # GENUINE or IMPOSTER
    distance: float

    @property
    def key(self):
        return (self.id_a, self.id_b)


@dataclass
class ScoreSet:
    genuine: np.ndarray
    imposter: np.ndarray

    def __post_init__(self):
        self.genuine = np.asarray(self.genuine, dtype=float)
        self.imposter = np.asarray(self.imposter, dtype=float)

    @classmethod
    def from_comparisons(cls, comparisons):
        g = [c.distance for c in comparisons if c.label == GENUINE]
        i = [c.distance for c in comparisons if c.label == IMPOSTER]
        return cls(g, i)


@dataclass(frozen=True)
class RocSummary:
    eer: float
    auc: float
    frr_at_far: float
    far: float


@dataclass(frozen=True)
class McNemarTable:
    a: int  # both correct
    b: int  # only system 2 correct
    c: int  # only system 1 correct
    d: int  # both wrong

    @property
    def n(self):
        return self.a + self.b + self.c + self.d


class McNemarResult(NamedTuple):
    chi_squared: float
    reject_at_1_percent: bool


class KSResult(NamedTuple):
    statistic: float
    pvalue: float


# ---------------------------------------------------------------------------
# ROC

def _require_populations(scores):
    if scores.genuine.size == 0:
        raise EmptyPopulation("no genuine scores")
    if scores.imposter.size == 0:
        raise EmptyPopulation("no imposter scores")


def roc_points(scores):
    """FAR and FRR at every distinct score, preceded by a reject-all threshold of -inf."""
    _require_populations(scores)
    g = np.sort(scores.genuine)
    imp = np.sort(scores.imposter)
    thresholds = np.concatenate([[-np.inf], np.unique(np.concatenate([g, imp]))])
    far = np.searchsorted(imp, thresholds, side="right") / imp.size
    frr = 1.0 - np.searchsorted(g, thresholds, side="right") / g.size
    return thresholds, far, frr


def equal_error_rate(far, frr):
    """Point where the piecewise-linear ROC crosses FAR = FRR."""
    d = far - frr
    k = int(np.argmax(d >= 0))
    if d[k] == 0 or k == 0:
        return float(far[k])
    lam = -d[k - 1] / (d[k] - d[k - 1])
    return float(far[k - 1] + lam * (far[k] - far[k - 1]))


def auc_mann_whitney(scores):
    """P(genuine < imposter) + 0.5 P(genuine == imposter)."""
    _require_populations(scores)
    imp = np.sort(scores.imposter)
    right = np.searchsorted(imp, scores.genuine, side="right")
    left = np.searchsorted(imp, scores.genuine, side="left")
    greater = int((imp.size - right).sum())
    ties = int((right - left).sum())
    return (2 * greater + ties) / (2 * scores.genuine.size * imp.size)


def roc_summary(scores, far=1e-4):
    if not 0 < far < 1:
        raise ValueError(f"operating FAR must be in (0, 1), got {far}")
    thresholds, fars, frrs = roc_points(scores)
    op = int(np.flatnonzero(fars <= far)[-1])
    return RocSummary(eer=equal_error_rate(fars, frrs), auc=auc_mann_whitney(scores),
                      frr_at_far=float(frrs[op]), far=far)


def roc_curve_csv(scores):
    thresholds, far, frr = roc_points(scores)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["threshold", "far", "frr"])
    for t, a, r in zip(thresholds, far, frr):
        w.writerow([repr(float(t)), repr(float(a)), repr(float(r))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov

def kolmogorov_sf(lam):
    """Survival function of the asymptotic Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    k = np.arange(1, _KS_TERMS + 1)
    if lam < 1.0:
        # Jacobi form converges quickly for small arguments
        cdf = math.sqrt(2 * math.pi) / lam * np.exp(-(2 * k - 1) ** 2 * math.pi ** 2 / (8 * lam ** 2)).sum()
        p = 1.0 - cdf
    else:
        p = 2.0 * ((-1.0) ** (k - 1) * np.exp(-2.0 * k ** 2 * lam ** 2)).sum()
    return float(min(max(p, 0.0), 1.0))


def ks_2sample(x, y):
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    if x.size == 0 or y.size == 0:
        raise EmptySequence("both samples must be non-empty")
    points = np.concatenate([x, y])
    fx = np.searchsorted(x, points, side="right") / x.size
    fy = np.searchsorted(y, points, side="right") / y.size
    d = float(np.abs(fx - fy).max())
    ne = x.size * y.size / (x.size + y.size)
    return KSResult(d, kolmogorov_sf(math.sqrt(ne) * d))


# ---------------------------------------------------------------------------
# McNemar

def mcnemar_edwards(table):
    """Continuity-corrected McNemar statistic ``(|b - c| - 1)^2 / (b + c)``."""
    if table.b + table.c == 0:
        raise DegenerateTable("b + c = 0: the systems never disagree")
    chi2 = (abs(table.b - table.c) - 1) ** 2 / (table.b + table.c)
    return McNemarResult(chi2, chi2 > CHI2_CRITICAL_1PCT)


def _correct(c, threshold):
    accepted = c.distance <= threshold
    return accepted if c.label == GENUINE else not accepted


def classify_for_mcnemar(sys1, sys2, threshold1, threshold2):
    """Cross-tabulate per-comparison correctness of two systems on the same comparisons."""
    first = {c.key: c for c in sys1}
    second = {c.key: c for c in sys2}
    if len(first) != len(list(sys1)) or len(second) != len(list(sys2)):
        raise ComparisonSetMismatch("duplicate comparison keys")
    if first.keys() != second.keys():
        raise ComparisonSetMismatch("the systems were scored on different comparison sets")
    a = b = c = d = 0
    for key, c1 in first.items():
        c2 = second[key]
        if c1.label != c2.label:
            raise ComparisonSetMismatch(f"label of {key} differs between systems")
        ok1, ok2 = _correct(c1, threshold1), _correct(c2, threshold2)
        if ok1 and ok2:
            a += 1
        elif ok2:
            b += 1
        elif ok1:
            c += 1
        else:
            d += 1
    return McNemarTable(a, b, c, d)


def eer_threshold(scores):
    """Threshold whose FAR and FRR are closest, used as the EER operating point."""
    thresholds, far, frr = roc_points(scores)
    k = int(np.argmin(np.abs(far - frr)))
    return float(thresholds[k])


# ---------------------------------------------------------------------------
# Spearman

def spearman(x, y):
    """Pearson correlation of average ranks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise LengthMismatch(f"{x.size} vs {y.size} values")
    if x.size < 2:
        raise TooShort("need at least two paired values")
    rx = rankdata(x) - (x.size + 1) / 2
    ry = rankdata(y) - (y.size + 1) / 2
    den = math.sqrt(float((rx * rx).sum() * (ry * ry).sum()))
    if den == 0:
        return float("nan")
    return float((rx * ry).sum() / den)
