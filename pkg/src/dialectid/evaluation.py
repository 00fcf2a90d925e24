"""Confusion matrices, unweighted accuracy, run averaging and results tables."""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import DIALECTS

POOLING_COLUMNS = ("MEAN", "STD", "MEANSTD")
MODES = ("SD", "SI")


@dataclass
class EvalReport:
    """Per-class recall (%), macro and overall accuracy, row-normalised confusion (%).

    Classes absent from the test set have NaN recall and a NaN confusion row
    and are listed in ``absent_classes``; they are left out of the macro mean.
    """

    n_test: int
    per_class_recall: np.ndarray
    unweighted_accuracy: float
    overall_accuracy: float
    confusion: np.ndarray
    counts: np.ndarray
    split_name: str = ""
    seeds: list[int] = field(default_factory=list)
    feature_kind: str = ""
    pooling: str = ""
    mode: str = ""
    config_hash: str = ""
    absent_classes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def clean(a):
            return [None if isinstance(v, float) and math.isnan(v) else v
                    for v in np.asarray(a, dtype=float).tolist()]

        return {
            "n_test": self.n_test,
            "per_class_recall": dict(zip(DIALECTS, clean(self.per_class_recall))),
            "unweighted_accuracy": self.unweighted_accuracy,
            "overall_accuracy": self.overall_accuracy,
            "confusion": [clean(row) for row in self.confusion],
            "counts": np.asarray(self.counts).tolist(),
            "split_name": self.split_name,
            "seeds": list(self.seeds),
            "feature_kind": self.feature_kind,
            "pooling": self.pooling,
            "mode": self.mode,
            "config_hash": self.config_hash,
            "absent_classes": list(self.absent_classes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        def arr(a):
            return np.array([np.nan if v is None else v for v in a], dtype=float)

        return cls(
            n_test=d["n_test"],
            per_class_recall=arr([d["per_class_recall"][c] for c in DIALECTS]),
            unweighted_accuracy=d["unweighted_accuracy"],
            overall_accuracy=d["overall_accuracy"],
            confusion=np.stack([arr(r) for r in d["confusion"]]),
            counts=np.asarray(d["counts"]),
            split_name=d.get("split_name", ""),
            seeds=list(d.get("seeds", [])),
            feature_kind=d.get("feature_kind", ""),
            pooling=d.get("pooling", ""),
            mode=d.get("mode", ""),
            config_hash=d.get("config_hash", ""),
            absent_classes=list(d.get("absent_classes", [])),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["true\\pred", *DIALECTS, "recall"])
        for i, c in enumerate(DIALECTS):
            w.writerow([c, *[_fmt(v) for v in self.confusion[i]], _fmt(self.per_class_recall[i])])
        w.writerow(["unweighted_accuracy", _fmt(self.unweighted_accuracy)])
        w.writerow(["overall_accuracy", _fmt(self.overall_accuracy)])
        return buf.getvalue()


def _fmt(v, digits: int = 1) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "-"
    return f"{v:.{digits}f}"


def evaluate(predictions: Iterable[tuple[str, str]], **meta) -> EvalReport:
    """Build a report from ``(true dialect, predicted dialect)`` pairs."""
    pairs = list(predictions)
    if not pairs:
        raise ValueError("cannot evaluate an empty prediction list")
    index = {c: i for i, c in enumerate(DIALECTS)}
    counts = np.zeros((len(DIALECTS), len(DIALECTS)), dtype=np.int64)
    for true, pred in pairs:
        if true not in index or pred not in index:
            raise ValueError(f"label outside {DIALECTS}: ({true!r}, {pred!r})")
        counts[index[true], index[pred]] += 1
    row = counts.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        confusion = np.where(row[:, None] > 0, 100.0 * counts / row[:, None], np.nan)
    recall = np.diag(confusion).copy()
    present = row > 0
    return EvalReport(
        n_test=len(pairs),
        per_class_recall=recall,
        unweighted_accuracy=float(recall[present].mean()),
        overall_accuracy=float(100.0 * np.trace(counts) / len(pairs)),
        confusion=confusion,
        counts=counts,
        absent_classes=[c for c, p in zip(DIALECTS, present) if not p],
        **meta,
    )


def average_reports(reports: Sequence[EvalReport]) -> EvalReport:
    """Elementwise mean over runs of one (feature, pooling, mode) configuration."""
    if not reports:
        raise ValueError("no reports to average")
    first = reports[0]
    for r in reports[1:]:
        for attr in ("feature_kind", "pooling", "mode", "config_hash"):
            if getattr(r, attr) != getattr(first, attr):
                raise ValueError(
                    f"cannot average reports with different {attr}: "
                    f"{getattr(first, attr)!r} vs {getattr(r, attr)!r}"
                )
    if len(reports) == 1:
        return first
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        recall = np.nanmean(np.stack([r.per_class_recall for r in reports]), axis=0)
        confusion = np.nanmean(np.stack([r.confusion for r in reports]), axis=0)
    seeds = [s for r in reports for s in r.seeds]
    absent = sorted({c for r in reports for c in r.absent_classes}, key=DIALECTS.index)
    return EvalReport(
        n_test=sum(r.n_test for r in reports),
        per_class_recall=recall,
        unweighted_accuracy=float(np.mean([r.unweighted_accuracy for r in reports])),
        overall_accuracy=float(np.mean([r.overall_accuracy for r in reports])),
        confusion=confusion,
        counts=np.sum([r.counts for r in reports], axis=0),
        split_name="average(" + ",".join(r.split_name for r in reports) + ")",
        seeds=seeds,
        feature_kind=first.feature_kind,
        pooling=first.pooling,
        mode=first.mode,
        config_hash=first.config_hash,
        absent_classes=absent,
    )


def _score(v) -> float:
    if isinstance(v, EvalReport):
        return v.unweighted_accuracy
    return float(v)


def results_table(results: Mapping[tuple[str, str, str], object],
                  features: Sequence[str] | None = None) -> tuple[str, str]:
    """Render ``{(feature, pooling, mode): report or accuracy}`` as text and CSV.

    Rows are features; columns are pooling x {SD, SI}. Within each row the
    best value per SD/SI group is marked with ``*`` (all tied maxima marked).
    Missing cells render as ``-``.
    """
    if features is None:
        features = list(dict.fromkeys(k[0] for k in results))
    cols = [(p, m) for p in POOLING_COLUMNS for m in MODES]
    header = ["feature"] + [f"{p.lower()}_{m}" for p, m in cols]
    text_rows, csv_rows = [], []
    for feat in features:
        cells = {c: results.get((feat, *c)) for c in cols}
        best = {}
        for m in MODES:
            vals = [_score(cells[(p, m)]) for p in POOLING_COLUMNS if cells[(p, m)] is not None]
            best[m] = max(vals) if vals else None
        txt, raw = [feat], [feat]
        for p, m in cols:
            v = cells[(p, m)]
            if v is None:
                txt.append("-")
                raw.append("")
                continue
            s = _score(v)
            mark = "*" if s == best[m] else ""
            txt.append(f"{s:.1f}{mark}")
            raw.append(f"{s:.1f}{mark}")
        text_rows.append(txt)
        csv_rows.append(raw)
    widths = [max(len(r[i]) for r in [header, *text_rows]) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in [header, *text_rows]]
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(csv_rows)
    return "\n".join(lines) + "\n", buf.getvalue()
