"""Score files (one comparison per row) and identity label files."""

from __future__ import annotations

import csv
import io

from ..errors import ParseError
from ..evalstats import GENUINE, IMPOSTER, Comparison

SCORE_COLUMNS = ["id_a", "id_b", "label", "distance"]
IDENTITY_COLUMNS = ["image_id", "eye_id"]


def dumps_scores(comparisons):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCORE_COLUMNS)
    for c in comparisons:
        w.writerow([c.id_a, c.id_b, c.label, repr(float(c.distance))])
    return buf.getvalue()


def loads_scores(text):
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header != SCORE_COLUMNS:
        raise ParseError(f"score file header must be {','.join(SCORE_COLUMNS)}", 1)
    out = []
    for lineno, row in enumerate(rows, 2):
        if not row:
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}", lineno)
        a, b, label, dist = row
        if label not in (GENUINE, IMPOSTER):
            raise ParseError(f"label must be {GENUINE} or {IMPOSTER}, got {label!r}", lineno)
        try:
            d = float(dist)
        except ValueError:
            raise ParseError(f"bad distance {dist!r}", lineno) from None
        out.append(Comparison(a, b, label, d))
    return out


def write_scores(path, comparisons):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_scores(comparisons))


def read_scores(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return loads_scores(fh.read())


def write_identities(path, image_ids, eye_ids):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(IDENTITY_COLUMNS)
        w.writerows(zip(image_ids, eye_ids))


def read_identities(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = csv.reader(fh)
        if next(rows, None) != IDENTITY_COLUMNS:
            raise ParseError(f"identity file header must be {','.join(IDENTITY_COLUMNS)}", 1)
        return {r[0]: r[1] for r in rows if r}
