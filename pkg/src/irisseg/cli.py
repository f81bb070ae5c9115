"""Command-line front end.

Each subcommand writes its artifacts plus a ``manifest.json`` into ``--out``.
Exit status: 0 success, 1 usage error, 2 data error, 3 internal failure.
Errors are reported on stderr as a single JSON record.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, encoder, perturblab, rubbersheet, segmetrics, synthgen
from .datasets import (load_dataset, load_published, read_annotations, read_identities, read_scores,
                       recompute_table3, save_dataset, save_pgm, table3_report, write_scores)
from .datasets.pgm import GrayImage
from .encoder import EncoderParams
from .errors import InvariantViolation, IrisSegError, ParseError
from .evalstats import (GENUINE, Comparison, McNemarTable, ScoreSet, classify_for_mcnemar,
                        eer_threshold, ks_2sample, mcnemar_edwards, roc_curve_csv, roc_summary,
                        spearman)
from .geom import rasterize_iris_mask
from .synthgen import SynthConfig

log = logging.getLogger("irisseg")

MANIFEST = "manifest.json"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# helpers

def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _pipeline_config(args):
    return perturblab.PipelineConfig(
        width=args.width, height=args.height,
        encoder=EncoderParams(args.bands, args.wavelength, args.sigma_on_f),
        max_shift=args.max_shift, far=args.far, jobs=args.jobs)


def _write_manifest(args, argv, inputs, parameters):
    params = {k: v for k, v in sorted(parameters.items())}
    fingerprint = hashlib.sha256(
        json.dumps({"subcommand": args.command, "parameters": params}, sort_keys=True).encode()
    ).hexdigest()
    manifest = {
        "subcommand": args.command,
        "argv": list(argv),
        "inputs": inputs,
        "output": args.out,
        "seed": getattr(args, "seed", None),
        "parameters": params,
        "tool_version": __version__,
        "config_fingerprint": fingerprint,
    }
    _write(os.path.join(args.out, MANIFEST), json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _map(func, items, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(func, items, chunksize=8))
    return [func(i) for i in items]


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth(args):
    cfg = SynthConfig(args.num_eyes, args.images_per_eye, args.image_size, args.seed,
                      args.noise_sigma, args.rotation_jitter, args.boundary_jitter,
                      args.texture_variation)
    save_dataset(args.out, synthgen.generate(cfg))
    params = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    return {}, params


def cmd_segeval(args):
    gt = read_annotations(args.gt)
    rows, per_image = [], ["segmentation,image_id,tp,fp,fn,tn,precision,recall,fmeasure,outlier"]
    for spec in args.pred:
        if "=" not in spec:
            raise UsageError(f"--pred expects NAME=PATH, got {spec!r}")
        name, path = spec.split("=", 1)
        pred = {a.image_id: a for a in read_annotations(path)}
        if set(pred) != {a.image_id for a in gt}:
            raise InvariantViolation(f"{name}: image ids differ from the ground truth")
        counts = [segmetrics.confusion(rasterize_iris_mask(pred[g.image_id], args.width, args.height),
                                       rasterize_iris_mask(g, args.width, args.height)) for g in gt]
        m = segmetrics.database_metrics(counts)
        rows.append((name, m))
        outliers = segmetrics.z_outliers(s.fmeasure for s in m.per_image)
        for k, (g, s) in enumerate(zip(gt, m.per_image)):
            c = s.counts
            per_image.append(f"{name},{g.image_id},{c.tp},{c.fp},{c.fn},{c.tn},"
                             f"{s.precision!r},{s.recall!r},{s.fmeasure!r},{int(k in outliers)}")
    _write(os.path.join(args.out, "metrics.csv"), segmetrics.metrics_table(rows))
    _write(os.path.join(args.out, "per_image.csv"), "\n".join(per_image) + "\n")
    sys.stdout.write(segmetrics.metrics_table(rows))
    return {"gt": args.gt, "pred": args.pred}, {"width": args.width, "height": args.height}


def _normalize_one(job):
    image, ann, width, height = job
    return rubbersheet.normalize(image, ann, width, height)


def cmd_normalize(args):
    ds = load_dataset(args.dataset, args.annotations)
    textures = _map(_normalize_one, [(img, ann, args.width, args.height)
                                     for img, ann in zip(ds.images, ds.annotations)], args.jobs)
    for ann, tex in zip(ds.annotations, textures):
        np.save(os.path.join(args.out, f"{ann.image_id}.values.npy"), tex.values)
        np.save(os.path.join(args.out, f"{ann.image_id}.flags.npy"), tex.flags)
        if args.dump_pgm:
            save_pgm(os.path.join(args.out, f"{ann.image_id}.pgm"),
                     GrayImage(rubbersheet.texture_to_gray8(tex)))
    return ({"dataset": args.dataset, "annotations": args.annotations},
            {"width": args.width, "height": args.height})


def cmd_encode(args):
    params = EncoderParams(args.bands, args.wavelength, args.sigma_on_f)
    names = sorted(f[:-len(".values.npy")] for f in os.listdir(args.textures) if f.endswith(".values.npy"))
    if not names:
        raise ParseError(f"no textures found in {args.textures}")
    for name in names:
        values = np.load(os.path.join(args.textures, f"{name}.values.npy"))
        encoder.write_iriscode(os.path.join(args.out, f"{name}.irc"), encoder.encode(values, params))
    return {"textures": args.textures}, {"bands": args.bands, "wavelength": args.wavelength,
                                         "sigma_on_f": args.sigma_on_f}


def cmd_match(args):
    identities = read_identities(args.identities)
    ids = list(identities)
    codes = {i: encoder.read_iriscode(os.path.join(args.codes, f"{i}.irc")) for i in ids}
    dist, _ = encoder.match_matrix([codes[i] for i in ids], [codes[i] for i in ids], args.max_shift)
    comps = []
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            label = GENUINE if identities[ids[a]] == identities[ids[b]] else "imposter"
            comps.append(Comparison(ids[a], ids[b], label, float(dist[a, b])))
    comps.sort(key=lambda c: (c.id_a, c.id_b))
    write_scores(os.path.join(args.out, "scores.csv"), comps)
    return {"codes": args.codes, "identities": args.identities}, {"max_shift": args.max_shift}


def _summary_csv(summary):
    return ("eer,auc,frr_at_far,far\n"
            f"{summary.eer!r},{summary.auc!r},{summary.frr_at_far!r},{summary.far!r}\n")


def cmd_roc(args):
    scores = ScoreSet.from_comparisons(read_scores(args.scores))
    summary = roc_summary(scores, args.far)
    _write(os.path.join(args.out, "roc_summary.csv"), _summary_csv(summary))
    _write(os.path.join(args.out, "roc_curve.csv"), roc_curve_csv(scores))
    sys.stdout.write(_summary_csv(summary))
    return {"scores": args.scores}, {"far": args.far}


def cmd_stats(args):
    if args.test == "ks":
        a = [c.distance for c in read_scores(args.scores_a) if c.label == args.label]
        b = [c.distance for c in read_scores(args.scores_b) if c.label == args.label]
        res = ks_2sample(a, b)
        text = f"statistic,pvalue,n_a,n_b\n{res.statistic!r},{res.pvalue!r},{len(a)},{len(b)}\n"
        inputs = {"scores_a": args.scores_a, "scores_b": args.scores_b}
        params = {"label": args.label}
    elif args.test == "mcnemar":
        if args.scores_a:
            sys1, sys2 = read_scores(args.scores_a), read_scores(args.scores_b)
            t1 = args.threshold_a if args.threshold_a is not None else eer_threshold(ScoreSet.from_comparisons(sys1))
            t2 = args.threshold_b if args.threshold_b is not None else eer_threshold(ScoreSet.from_comparisons(sys2))
            table = classify_for_mcnemar(sys1, sys2, t1, t2)
            inputs = {"scores_a": args.scores_a, "scores_b": args.scores_b}
            params = {"threshold_a": t1, "threshold_b": t2}
        else:
            if args.b is None or args.c is None:
                raise UsageError("mcnemar needs --b and --c, or --scores-a and --scores-b")
            table = McNemarTable(args.a or 0, args.b, args.c, args.d or 0)
            inputs, params = {}, {"a": table.a, "b": table.b, "c": table.c, "d": table.d}
        res = mcnemar_edwards(table)
        text = ("a,b,c,d,n,chi_squared,reject_at_1_percent\n"
                f"{table.a},{table.b},{table.c},{table.d},{table.n},{res.chi_squared!r},"
                f"{str(res.reject_at_1_percent).lower()}\n")
    else:
        x, y = _floats(args.x), _floats(args.y)
        text = f"rho,n\n{spearman(x, y)!r},{len(x)}\n"
        inputs, params = {}, {"x": x, "y": y}
    _write(os.path.join(args.out, f"{args.test}.csv"), text)
    sys.stdout.write(text)
    return inputs, dict(params, test=args.test)


def cmd_sweep(args):
    values = _floats(args.values) if args.values else None
    ds = load_dataset(args.dataset, args.annotations)
    cfg = _pipeline_config(args)
    if args.kind == perturblab.LIMBIC_SCALE:
        result = perturblab.run_scale_sweep(ds, "limbic", values, cfg)
    elif args.kind == perturblab.PUPIL_SCALE:
        result = perturblab.run_scale_sweep(ds, "pupillary", values, cfg)
    elif args.kind == perturblab.CENTER_TRANSLATE:
        result = perturblab.run_center_sweep(ds, values, cfg)
    else:
        result = perturblab.run_cross_scale(ds, args.boundary, values, args.delta, cfg)
    _write(os.path.join(args.out, "series.csv"), result.series_csv())
    rejected = ["parameter,image_id"] + [f"{v!r},{i}" for v in sorted(result.rejected)
                                         for i in result.rejected[v]]
    _write(os.path.join(args.out, "rejected.csv"), "\n".join(rejected) + "\n")
    sys.stdout.write(result.series_csv())
    params = {"kind": args.kind, "values": values, "boundary": args.boundary, "delta": args.delta,
              "width": cfg.width, "height": cfg.height, "bands": cfg.encoder.bands,
              "wavelength": cfg.encoder.wavelength, "sigma_on_f": cfg.encoder.sigma_on_f,
              "max_shift": cfg.max_shift, "far": cfg.far}
    return {"dataset": args.dataset, "annotations": args.annotations}, params


def cmd_tables(args):
    report = table3_report(recompute_table3(load_published()))
    _write(os.path.join(args.out, "table3.csv"), report)
    sys.stdout.write(report)
    return {}, {}


def replay(manifest_path):
    """Re-run the command recorded in a manifest."""
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    return main(manifest["argv"])


# ---------------------------------------------------------------------------
# parser

def _add_pipeline_options(p, pipeline=True):
    p.add_argument("--width", type=int, default=rubbersheet.DEFAULT_WIDTH, help="angular samples")
    p.add_argument("--height", type=int, default=rubbersheet.DEFAULT_HEIGHT, help="radial samples")
    if pipeline:
        p.add_argument("--bands", type=int, default=EncoderParams.bands)
        p.add_argument("--wavelength", type=float, default=EncoderParams.wavelength)
        p.add_argument("--sigma-on-f", type=float, default=EncoderParams.sigma_on_f)
        p.add_argument("--max-shift", type=int, default=encoder.DEFAULT_MAX_SHIFT)
        p.add_argument("--far", type=float, default=1e-4, help="operating FAR (default 0.01%%)")


def build_parser():
    parser = _Parser(prog="irisseg", description=__doc__.splitlines()[0])
    parser.add_argument("--jobs", type=int, default=1, help="worker processes (outputs do not depend on it)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--out", "-o", required=True, help="output directory")
        p.set_defaults(func=func)
        return p

    d = SynthConfig()
    p = command("synth", cmd_synth, "generate a synthetic dataset")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--num-eyes", type=int, default=d.num_eyes)
    p.add_argument("--images-per-eye", type=int, default=d.images_per_eye)
    p.add_argument("--image-size", type=int, default=d.image_size)
    p.add_argument("--noise-sigma", type=float, default=d.noise_sigma)
    p.add_argument("--rotation-jitter", type=float, default=d.rotation_jitter)
    p.add_argument("--boundary-jitter", type=float, default=d.boundary_jitter)
    p.add_argument("--texture-variation", type=float, default=d.texture_variation)

    p = command("segeval", cmd_segeval, "segmentation accuracy against ground truth")
    p.add_argument("--gt", required=True, help="ground-truth annotation file")
    p.add_argument("--pred", required=True, action="append", metavar="NAME=PATH",
                   help="predicted annotations (repeatable)")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)

    p = command("normalize", cmd_normalize, "rubbersheet-normalize a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--annotations", help="annotation file overriding the dataset's")
    p.add_argument("--dump-pgm", action="store_true", help="also write 8-bit texture images")
    _add_pipeline_options(p, pipeline=False)

    p = command("encode", cmd_encode, "log-Gabor iris codes from textures")
    p.add_argument("--textures", required=True)
    p.add_argument("--bands", type=int, default=EncoderParams.bands)
    p.add_argument("--wavelength", type=float, default=EncoderParams.wavelength)
    p.add_argument("--sigma-on-f", type=float, default=EncoderParams.sigma_on_f)

    p = command("match", cmd_match, "all-pairs matching of iris codes")
    p.add_argument("--codes", required=True)
    p.add_argument("--identities", required=True)
    p.add_argument("--max-shift", type=int, default=encoder.DEFAULT_MAX_SHIFT)

    p = command("roc", cmd_roc, "ROC summary and curve from a score file")
    p.add_argument("--scores", required=True)
    p.add_argument("--far", type=float, default=1e-4)

    p = command("stats", cmd_stats, "KS, McNemar or Spearman tests")
    p.add_argument("test", choices=["ks", "mcnemar", "spearman"])
    p.add_argument("--scores-a")
    p.add_argument("--scores-b")
    p.add_argument("--label", default=GENUINE, choices=[GENUINE, "imposter"])
    p.add_argument("--threshold-a", type=float)
    p.add_argument("--threshold-b", type=float)
    for k in "abcd":
        p.add_argument(f"--{k}", type=int)
    p.add_argument("--x", help="comma-separated values (spearman)")
    p.add_argument("--y", help="comma-separated values (spearman)")

    p = command("sweep", cmd_sweep, "perturbation sweep")
    p.add_argument("--dataset", required=True)
    p.add_argument("--annotations")
    p.add_argument("--kind", required=True, choices=perturblab.KINDS)
    p.add_argument("--values", help="comma-separated parameter grid (use --values=-0.3,0,0.3 for negatives)")
    p.add_argument("--boundary", default="limbic", choices=["limbic", "pupillary"],
                   help="boundary for crossScale")
    p.add_argument("--delta", type=float, default=0.05, help="crossScale scale difference")
    _add_pipeline_options(p)

    command("tables", cmd_tables, "recompute rank correlations from the embedded tables")

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=None)
    return parser


def _check_stats_args(args):
    if args.command == "stats":
        if args.test == "ks" and not (args.scores_a and args.scores_b):
            raise UsageError("ks needs --scores-a and --scores-b")
        if args.test == "spearman" and not (args.x and args.y):
            raise UsageError("spearman needs --x and --y")
        if args.test == "mcnemar" and bool(args.scores_a) != bool(args.scores_b):
            raise UsageError("mcnemar needs both --scores-a and --scores-b")


def _fail(code, message, status):
    sys.stderr.write(json.dumps({"error": code, "message": message, "exit_status": status}) + "\n")
    return status


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        _check_stats_args(args)
    except UsageError as exc:
        return _fail("UsageError", str(exc), 1)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "replay":
        try:
            return replay(args.manifest)
        except (OSError, ValueError, KeyError) as exc:
            return _fail("BadManifest", str(exc), 2)
    try:
        os.makedirs(args.out, exist_ok=True)
        inputs, params = args.func(args)
        _write_manifest(args, argv, inputs, params)
    except UsageError as exc:
        return _fail("UsageError", str(exc), 1)
    except IrisSegError as exc:
        return _fail(exc.code, str(exc), exc.exit_status)
    except OSError as exc:
        return _fail("IOError", str(exc), 2)
    except Exception as exc:  # noqa: BLE001 - surfaced as an internal failure record
        log.exception("internal error")
        return _fail("InternalError", f"{type(exc).__name__}: {exc}", 3)
    return 0


if __name__ == "__main__":
    sys.exit(main())
