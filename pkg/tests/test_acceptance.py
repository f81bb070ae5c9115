"""Acceptance gate: one group of checks per criterion, summarized after the run.

Oracles here are deliberately naive (per-pixel loops, exhaustive shift loops,
pair counting) and share no code with the library beyond its data types.
"""

import math

import numpy as np
import pytest

from irisseg import encoder, evalstats, geom, perturblab, rubbersheet, segmetrics
from irisseg.datasets import load_published, recompute_table3
from irisseg.datasets.published import COMPARISON_COUNTS, MCNEMAR_EXAMPLE, MCNEMAR_EXAMPLE_CHI2
from irisseg.encoder import IrisCode

criterion = pytest.mark.criterion

# frozen on first computation (seed 42, default pipeline)
BASELINE_EER = 0.004466019417475728
BASELINE_AUC = 0.9999431578947369
LIMBIC_SERIES = {
    0.5: (0.014105263157894737, 0.9996521052631578, 0.050000000000000044),
    0.75: (0.015000000000000013, 0.9997321052631579, 0.020000000000000018),
    1.0: (0.004466019417475728, 0.9999431578947369, 0.025000000000000022),
}


# --------------------------------------------------------------------------- 1, 2

@criterion(1, "McNemar reproduction")
def test_mcnemar_reproduction():
    res = evalstats.mcnemar_edwards(evalstats.McNemarTable(0, 22497, 25023, 0))
    assert res.chi_squared == pytest.approx(134.167192761, abs=1e-6)
    assert res.reject_at_1_percent is True
    assert 134.167192761 > evalstats.CHI2_CRITICAL_1PCT == 6.64
    assert evalstats.mcnemar_edwards(MCNEMAR_EXAMPLE).chi_squared == pytest.approx(MCNEMAR_EXAMPLE_CHI2, abs=1e-6)


@criterion(2, "McNemar table consistency")
def test_mcnemar_table_consistency():
    t = MCNEMAR_EXAMPLE
    assert (t.a, t.b, t.c, t.d) == (3430493, 22497, 25023, 2828)
    assert t.n == 3430493 + 22497 + 25023 + 2828 == 3_480_841
    assert sum(COMPARISON_COUNTS["casia4i"]) == 8932 + 3471909 == t.n


# --------------------------------------------------------------------------- 3

VERIFIED_TABLE3 = {
    ("casia4i", "lg", "EER"): 0.829,
    ("casia4i", "lg", "AUC"): 0.829,
    ("casia4i", "qsw", "EER"): 0.829,
    ("iitd", "lg", "EER"): 0.943,
    ("iitd", "qsw", "EER"): 1.000,
    ("notredame", "lg", "EER"): 0.829,
}


@criterion(3, "Table 3 recomputation")
def test_table3_recomputation():
    entries = {(e.database, e.feature, e.measure): e for e in recompute_table3(load_published())}
    assert len(entries) == 3 * 6 * 3
    for key, expected in VERIFIED_TABLE3.items():
        e = entries[key]
        assert not e.tied, key
        assert e.published == expected
        assert abs(e.rho) == pytest.approx(expected, abs=1e-3), key
    # the worked example: casia4i F vs lg EER has rho = -29/35 before orientation
    assert entries[("casia4i", "lg", "EER")].rho == pytest.approx(29 / 35, abs=1e-12)


# --------------------------------------------------------------------------- 4

def _oracle_image(pred, gt):
    tp = fp = fn = tn = 0
    for p, g in zip(pred.ravel().tolist(), gt.ravel().tolist()):
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
        else:
            tn += 1
    n = tp + fp + fn + tn
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0
    fnr = fn / (fn + tp) if fn + tp else 0.0
    return (fp + fn) / n, fpr, fnr, prec, rec, f


@criterion(4, "Metrics oracle suite")
def test_metrics_oracle_random_pairs():
    rng = np.random.default_rng(4)
    for _ in range(1000):
        density = rng.uniform(0, 1, 2)
        pred = rng.random((8, 8)) < density[0]
        gt = rng.random((8, 8)) < density[1]
        m = segmetrics.database_metrics([segmetrics.confusion(pred, gt)])
        err, fpr, fnr, prec, rec, f = _oracle_image(pred, gt)
        assert m.e1 == err
        assert m.e2 == 0.5 * fpr + 0.5 * fnr
        assert (m.precision, m.recall, m.fmeasure) == (prec, rec, f)


@criterion(4, "Metrics oracle suite")
def test_metrics_oracle_database_mean():
    rng = np.random.default_rng(44)
    pairs = [(rng.random((8, 8)) < 0.5, rng.random((8, 8)) < 0.5) for _ in range(50)]
    m = segmetrics.database_metrics([segmetrics.confusion(p, g) for p, g in pairs])
    rows = np.array([_oracle_image(p, g) for p, g in pairs])
    assert m.e1 == pytest.approx(rows[:, 0].mean(), abs=1e-15)
    assert m.e2 == pytest.approx(0.5 * rows[:, 1].mean() + 0.5 * rows[:, 2].mean(), abs=1e-15)
    assert m.fmeasure == pytest.approx(rows[:, 5].mean(), abs=1e-15)


@criterion(4, "Metrics oracle suite")
def test_metrics_hand_case():
    gt = np.zeros((4, 4), bool)
    gt[1:3, 1:3] = True
    pred = np.zeros((4, 4), bool)
    pred[1:3, 2:4] = True
    c = segmetrics.confusion(pred, gt)
    assert (c.tp, c.fp, c.fn, c.tn) == (2, 2, 2, 10)
    assert segmetrics.e1([c]) == 0.25
    assert segmetrics.e2([c]) == pytest.approx(1 / 3, abs=1e-15)
    assert segmetrics.precision_recall_f([c]) == (0.5, 0.5, 0.5)


# --------------------------------------------------------------------------- 5

def _random_boundary(rng, cx, cy, r):
    kind = rng.integers(3)
    if kind == 0:
        return geom.circle(cx, cy, r)
    if kind == 1:
        return geom.Ellipse(cx, cy, r, r * rng.uniform(0.6, 1), rng.uniform(0, np.pi))
    n = int(rng.integers(5, 40))
    t = np.sort(rng.uniform(0, 2 * np.pi, n))
    rad = r * rng.uniform(0.8, 1.2, n)
    return geom.Polygon(tuple(zip(cx + rad * np.cos(t), cy + rad * np.sin(t))))


@criterion(5, "Rubbersheet identities")
def test_rubbersheet_endpoints():
    rng = np.random.default_rng(5)
    for k in range(100):
        cx, cy = rng.uniform(50, 150, 2)
        rp = rng.uniform(10, 30)
        pupil = _random_boundary(rng, cx, cy, rp)
        limbic = _random_boundary(rng, cx + rng.uniform(-3, 3), cy + rng.uniform(-3, 3), rp * rng.uniform(2.2, 3.5))
        center = geom.Point2D(cx + rng.uniform(-2, 2), cy + rng.uniform(-2, 2))
        ann = geom.EyeAnnotation(f"a{k}", pupil, limbic, center)
        for theta in rng.uniform(0, 2 * np.pi, 8):
            p = geom.sample_boundary(pupil, center, theta)
            q = geom.sample_boundary(limbic, center, theta)
            r0 = rubbersheet.rubbersheet_point(ann, theta, 0.0)
            r1 = rubbersheet.rubbersheet_point(ann, theta, 1.0)
            assert math.dist(r0, p) <= 1e-9
            assert math.dist(r1, q) <= 1e-9


@criterion(5, "Rubbersheet identities")
def test_rubbersheet_midpoint():
    ann = geom.EyeAnnotation("c", geom.circle(0, 0, 10), geom.circle(0, 0, 20), geom.Point2D(0, 0))
    x, y = rubbersheet.rubbersheet_point(ann, 0.0, 0.5)
    assert x == pytest.approx(15, abs=1e-12) and y == pytest.approx(0, abs=1e-12)


def _polar_image(dtheta, n=200, c=100.0):
    x, y = geom.pixel_centers(n, n)
    phi = np.arctan2(y - c, x - c) - dtheta
    d = np.hypot(x - c, y - c)
    return 0.5 + 0.15 * np.cos(6 * phi) * np.cos(d / 9) + 0.1 * np.sin(3 * phi + d / 15)


@criterion(5, "Rubbersheet identities")
@pytest.mark.parametrize("shift", [1, 3, 7])
def test_rubbersheet_rotation_shift(shift):
    ann = geom.EyeAnnotation("r", geom.circle(100, 100, 25), geom.circle(100, 100, 80), geom.Point2D(100, 100))
    w = rubbersheet.DEFAULT_WIDTH
    ref = rubbersheet.normalize(_polar_image(0.0), ann).values
    rot = rubbersheet.normalize(_polar_image(2 * np.pi * shift / w), ann).values
    assert np.abs(np.roll(ref, shift, axis=1) - rot).mean() < 0.02


# --------------------------------------------------------------------------- 6

def _oracle_match(a, b, max_shift):
    bands, cols, _ = a.shape
    best = None
    for s in range(-max_shift, max_shift + 1):
        diff = 0
        for i in range(bands):
            for j in range(cols):
                for k in range(2):
                    diff += a[i, j, k] != b[i, (j - s) % cols, k]
        d = diff / a.size
        best = d if best is None else min(best, d)
    return best


@criterion(6, "Matching oracle")
def test_match_against_exhaustive_loop():
    rng = np.random.default_rng(6)
    codes = []
    for _ in range(500):
        bands, cols = int(rng.integers(1, 4)), int(rng.integers(3, 12))
        ms = int(rng.integers(0, 5))
        a = rng.random((bands, cols, 2)) < 0.5
        b = rng.random((bands, cols, 2)) < 0.5
        got = encoder.match(IrisCode(a, "x"), IrisCode(b, "x"), ms)
        assert got.distance == _oracle_match(a, b, ms)
        assert np.count_nonzero(a != np.roll(b, got.best_shift, axis=1)) / a.size == got.distance
        if bands == 2 and cols == 8:
            codes.append(IrisCode(a, "x"))
    # the vectorized all-pairs path agrees with the scalar one
    dist, shifts = encoder.match_matrix(codes, codes, 3)
    for i, a in enumerate(codes):
        for j, b in enumerate(codes):
            m = encoder.match(a, b, 3)
            assert (dist[i, j], shifts[i, j]) == (m.distance, m.best_shift)


@criterion(6, "Matching oracle")
def test_match_recovers_three_column_rotation():
    rng = np.random.default_rng(66)
    a = IrisCode(rng.random((8, 64, 2)) < 0.5, "x")
    b = IrisCode(np.roll(a.bits, 3, axis=1), "x")
    m = encoder.match(a, b, 7)
    assert m.distance == 0.0
    assert m.best_shift == -3
    assert np.array_equal(np.roll(b.bits, m.best_shift, axis=1), a.bits)


@criterion(6, "Matching oracle")
def test_match_non_increasing_in_max_shift():
    rng = np.random.default_rng(666)
    for _ in range(100):
        a = IrisCode(rng.random((2, 16, 2)) < 0.5, "x")
        b = IrisCode(rng.random((2, 16, 2)) < 0.5, "x")
        d = [encoder.match(a, b, s).distance for s in range(9)]
        assert all(x >= y for x, y in zip(d, d[1:]))


# --------------------------------------------------------------------------- 7

def _oracle_auc(g, imp):
    total = 0.0
    for x in g:
        for y in imp:
            total += 1.0 if x < y else 0.5 if x == y else 0.0
    return total / (len(g) * len(imp))


def _oracle_eer(g, imp):
    best = None
    for t in sorted(set(g) | set(imp) | {-math.inf}):
        far = sum(y <= t for y in imp) / len(imp)
        frr = sum(x > t for x in g) / len(g)
        if best is None or abs(far - frr) < best[0]:
            best = (abs(far - frr), (far + frr) / 2)
    return best[1]


@criterion(7, "ROC oracle")
def test_roc_against_oracles():
    rng = np.random.default_rng(7)
    for _ in range(300):
        ng, ni = int(rng.integers(1, 51)), int(rng.integers(1, 51))
        # coarse grid so that ties occur
        g = list(np.round(rng.normal(0.35, 0.1, ng), 2))
        imp = list(np.round(rng.normal(0.45, 0.1, ni), 2))
        s = evalstats.roc_summary(evalstats.ScoreSet(g, imp))
        assert s.auc == _oracle_auc(g, imp)
        assert abs(s.eer - _oracle_eer(g, imp)) <= 1 / min(ng, ni)


@criterion(7, "ROC oracle")
def test_roc_perfect_separation():
    s = evalstats.roc_summary(evalstats.ScoreSet([0.1, 0.2], [0.8, 0.9]), 1e-4)
    assert (s.eer, s.auc, s.frr_at_far) == (0.0, 1.0, 0.0)


# --------------------------------------------------------------------------- 8

@criterion(8, "End-to-end synthetic separation")
def test_end_to_end_separation(default_dataset, baseline):
    comps, summary = baseline
    assert len(default_dataset) == 100
    assert sum(c.label == evalstats.GENUINE for c in comps) == 20 * 10
    assert len(comps) == 100 * 99 // 2
    assert summary.eer < 0.10
    assert summary.eer == BASELINE_EER
    assert summary.auc == BASELINE_AUC


@criterion(8, "End-to-end synthetic separation")
def test_limbic_series_regression(default_dataset):
    r = perturblab.run_scale_sweep(default_dataset, "limbic", [0.5, 0.75, 1.0])
    for s, (eer, auc, op) in LIMBIC_SERIES.items():
        p = r.points[s]
        assert (p.eer, p.auc, p.frr_at_far) == pytest.approx((eer, auc, op), rel=1e-12, abs=1e-15)


# --------------------------------------------------------------------------- 9

@criterion(9, "Perturbation properties")
def test_identity_point_equals_baseline(default_dataset, baseline):
    _, base = baseline
    assert perturblab.run_scale_sweep(default_dataset, "limbic", [1.0]).points[1.0] == base
    assert perturblab.run_scale_sweep(default_dataset, "pupillary", [1.0]).points[1.0] == base
    assert perturblab.run_center_sweep(default_dataset, [0.0]).points[0.0] == base


@criterion(9, "Perturbation properties")
def test_center_translation_degrades(default_dataset, baseline):
    r = perturblab.run_center_sweep(default_dataset, [-0.3, 0.0, 0.3])
    assert r.baseline == baseline[1]
    assert r.points[-0.3].eer >= r.points[0.0].eer
    assert r.points[0.3].eer >= r.points[0.0].eer


@criterion(9, "Perturbation properties")
def test_cross_scale_small_vs_large_delta(default_dataset, baseline):
    _, base = baseline
    small = perturblab.run_cross_scale(default_dataset, "limbic", delta=0.05)
    large = perturblab.run_cross_scale(default_dataset, "limbic", delta=0.2)
    assert small.partners[1.0] == 1.05
    assert abs(small.points[1.0].eer - base.eer) < 0.02
    assert max(p.eer for p in large.points.values()) > max(p.eer for p in small.points.values())


@criterion(9, "Perturbation properties")
def test_outlier_injection_groups(default_dataset):
    eye = "e000"
    ids = [i for i, e in zip(default_dataset.image_ids, default_dataset.eye_ids) if e == eye]
    assert len(ids) == 5
    # limbic boundary pulled in to the collarette (0.8 x radius -> 0.64 x area)
    injected = perturblab.inject_outlier_segmentation(default_dataset, ids[:3], 0.64)
    comps, _ = perturblab.evaluate(injected)
    g = perturblab.group_responses(injected, comps, eye)
    assert (len(g.intra_injected), len(g.intra_clean), len(g.inter)) == (3, 1, 6)
    assert g.inter_mean > g.intra_mean
    assert g.inter_mean > max(np.mean(g.intra_injected), np.mean(g.intra_clean))


# --------------------------------------------------------------------------- 10

@criterion(10, "Area-scaling law")
@pytest.mark.parametrize("s", [0.25, 0.5, 2.0])
@pytest.mark.parametrize("boundary", [
    geom.circle(150, 150, 60),
    geom.Ellipse(150.3, 149.6, 70, 45, 0.4),
    geom.Polygon(((100, 110), (190, 95), (215, 170), (160, 205), (95, 180))),
])
def test_area_scaling(boundary, s):
    n = 300
    x, y = geom.pixel_centers(n, n)
    scaled = geom.scale_boundary_area(boundary, s)
    assert geom.boundary_area(scaled) / geom.boundary_area(boundary) == pytest.approx(s, abs=1e-9)
    before = np.count_nonzero(geom.contains(boundary, x, y))
    after = np.count_nonzero(geom.contains(scaled, x, y))
    assert after / before == pytest.approx(s, rel=0.02)


@criterion(10, "Area-scaling law")
def test_small_area_change_moves_radius_by_two_and_a_half_percent():
    c = geom.circle(0, 0, 100)
    for s, expected in ((1.05, 1.025), (0.95, 0.975)):
        r = geom.scale_boundary_area(c, s).a / 100
        assert r == pytest.approx(math.sqrt(s), abs=1e-12)
        assert abs(r - expected) < 1e-3


# --------------------------------------------------------------------------- 11

@criterion(11, "z-outlier rule")
def test_z_outlier_rule():
    values = [0.90] * 30 + [0.10]
    assert segmetrics.z_outliers(values) == {30}
    f = np.asarray(values)
    assert abs((0.10 - f.mean()) / f.std()) == pytest.approx(math.sqrt(30), rel=1e-9)
    assert segmetrics.z_outliers([0.7] * 31) == set()
    assert segmetrics.z_outliers([0.7]) == set()
