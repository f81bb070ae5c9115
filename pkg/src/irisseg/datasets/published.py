"""Published result tables for the three NIR databases, embedded read-only.

``table1.csv`` holds segmentation accuracy (F, E1, E2 in percent) per database
and segmentation; ``table2.csv`` the recognition results (EER, AUC, FRR at
FAR=0.01%) per database, segmentation and feature extractor; ``table3.csv``
the published rank correlations between F and those three columns.

Table 3 lists correlation magnitudes. The recomputation orients EER and the
operating point so that "better segmentation, better recognition" is
positive, and compares its magnitude against the published number.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from importlib import resources

from ..errors import InvariantViolation
from ..evalstats import McNemarTable, spearman

_FILES = ("table1.csv", "table2.csv", "table3.csv")
CHECKSUM = "94df2b8d56291f800a78172209a43cc3c8681bd3bd8e73a336c1f9aeecfcacd8"

DATABASES = ("casia4i", "iitd", "notredame")
FEATURES = ("lg", "qsw", "dct", "ko", "cr", "sift")
MEASURES = ("EER", "AUC", "OP")
# sign applied before correlating with F; lower EER / OP is better
ORIENTATION = {"EER": -1.0, "AUC": 1.0, "OP": -1.0}

# genuine / imposter comparison counts when all pairs are compared
COMPARISON_COUNTS = {
    "casia4i": (8932, 3471909),
    "iitd": (4480, 2503200),
    "notredame": (11808, 338058),
}

# casia4i, qsw features, ground truth vs Osiris at the EER operating point
MCNEMAR_EXAMPLE = McNemarTable(a=3430493, b=22497, c=25023, d=2828)
MCNEMAR_EXAMPLE_CHI2 = 134.167192761


@dataclass(frozen=True)
class PublishedTables:
    table1: dict  # (db, segmentation) -> (F, E1, E2)
    table2: dict  # (db, segmentation, feature) -> (F, EER, AUC, OP), F-descending per group
    table3: dict  # (db, feature) -> {"EER": rho, "AUC": rho, "OP": rho}

    def group(self, database, feature):
        return [(seg, vals) for (db, seg, feat), vals in self.table2.items()
                if db == database and feat == feature]


@dataclass(frozen=True)
class Table3Entry:
    database: str
    feature: str
    measure: str
    rho: float
    published: float
    tied: bool

    @property
    def difference(self):
        return abs(self.rho) - self.published


def _raw_files():
    pkg = resources.files(__package__) / "data"
    return [(pkg / name).read_bytes() for name in _FILES]


def load_published(verify=True):
    raw = _raw_files()
    if verify:
        digest = hashlib.sha256(b"".join(raw)).hexdigest()
        if digest != CHECKSUM:
            raise InvariantViolation(f"embedded table checksum mismatch: {digest}")
    t1, t2, t3 = (list(csv.DictReader(io.StringIO(r.decode("utf-8")))) for r in raw)
    table1 = {(r["database"], r["segmentation"]): (float(r["F"]), float(r["E1"]), float(r["E2"]))
              for r in t1}
    table2 = {(r["database"], r["segmentation"], r["feature"]):
              (float(r["F"]), float(r["EER"]), float(r["AUC"]), float(r["OP"])) for r in t2}
    table3 = {(r["database"], r["feature"]): {m: float(r[m]) for m in MEASURES} for r in t3}
    return PublishedTables(table1, table2, table3)


def recompute_table3(tables):
    entries = []
    for (db, feat), published in tables.table3.items():
        rows = [vals for _, vals in tables.group(db, feat)]
        f = [r[0] for r in rows]
        for col, measure in enumerate(MEASURES, start=1):
            values = [ORIENTATION[measure] * r[col] for r in rows]
            tied = len(set(values)) < len(values) or len(set(f)) < len(f)
            entries.append(Table3Entry(db, feat, measure, spearman(f, values),
                                       published[measure], tied))
    return entries


def table3_report(entries):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["database", "feature", "measure", "rho", "abs_rho", "published", "diff", "rounded_ties"])
    for e in entries:
        w.writerow([e.database, e.feature, e.measure, f"{e.rho:.3f}", f"{abs(e.rho):.3f}",
                    f"{e.published:.3f}", f"{e.difference:+.3f}", "yes" if e.tied else "no"])
    return buf.getvalue()
