"""Corpus manifest schema, JSON-Lines parsing and utterance statistics."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable

DIALECTS = ("WF", "EF", "SS", "TS")
LANGUAGES = ("fi", "no", "sv")
GENDERS = ("f", "m")
STYLES = ("spontaneous", "read")

LANGUAGE_NAMES = {"fi": "Finnish", "no": "Norwegian", "sv": "Swedish"}

FIELDS = (
    "utt_id",
    "source",
    "speaker_id",
    "dialect",
    "majority_language",
    "gender",
    "dataset_name",
    "style",
    "duration_s",
)
_ENUMS = {
    "dialect": DIALECTS,
    "majority_language": LANGUAGES,
    "gender": GENDERS,
    "style": STYLES,
}


class ManifestError(ValueError):
    """Raised for malformed or inconsistent manifest content."""


@dataclass(frozen=True)
class UtteranceRecord:
    utt_id: str
    source: str
    speaker_id: str
    dialect: str
    majority_language: str
    gender: str
    dataset_name: str
    style: str
    duration_s: float

    def __post_init__(self):
        for name, allowed in _ENUMS.items():
            value = getattr(self, name)
            if value not in allowed:
                raise ManifestError(f"unknown {name} {value!r}")
        if not self.duration_s >= 0:
            raise ManifestError(f"duration_s must be >= 0, got {self.duration_s!r}")

    @property
    def is_audio(self) -> bool:
        return self.source.lower().endswith(".wav")

    @property
    def is_feature(self) -> bool:
        return self.source.lower().endswith(".fmx")


def _record_from_obj(obj: dict) -> UtteranceRecord:
    missing = [f for f in FIELDS if f not in obj]
    if missing:
        raise ManifestError(f"missing field(s): {', '.join(missing)}")
    kwargs = {f: obj[f] for f in FIELDS}
    for f in FIELDS[:-1]:
        if not isinstance(kwargs[f], str):
            raise ManifestError(f"field {f} must be a string")
    if isinstance(kwargs["duration_s"], bool) or not isinstance(
        kwargs["duration_s"], (int, float)
    ):
        raise ManifestError("field duration_s must be a number")
    kwargs["duration_s"] = float(kwargs["duration_s"])
    return UtteranceRecord(**kwargs)


def parse_manifest(text: str) -> list[UtteranceRecord]:
    """Parse JSON-Lines manifest content into records, in file order.

    Blank lines are skipped. Errors carry the 1-based line number.
    """
    records = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"line {lineno}: malformed JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise ManifestError(f"line {lineno}: expected a JSON object")
        try:
            rec = _record_from_obj(obj)
        except ManifestError as exc:
            raise ManifestError(f"line {lineno}: {exc}") from None
        if rec.utt_id in seen:
            raise ManifestError(
                f"line {lineno}: duplicate utt_id {rec.utt_id!r} "
                f"(first seen on line {seen[rec.utt_id]})"
            )
        seen[rec.utt_id] = lineno
        records.append(rec)
    return records


def serialize_manifest(records: Iterable[UtteranceRecord]) -> str:
    return "".join(json.dumps(asdict(r), ensure_ascii=False) + "\n" for r in records)


def load_manifest(path) -> list[UtteranceRecord]:
    """Read a manifest file; relative sources are resolved against its directory."""
    base = Path(path).resolve().parent
    with open(path, encoding="utf-8") as fh:
        records = parse_manifest(fh.read())
    return [r if Path(r.source).is_absolute() else replace(r, source=str(base / r.source))
            for r in records]


@dataclass
class CorpusStats:
    """Utterance counts over dialect x majority language x gender."""

    counts: dict[tuple[str, str, str], int] = field(
        default_factory=lambda: {
            (d, l, g): 0 for d in DIALECTS for l in LANGUAGES for g in GENDERS
        }
    )

    def dialect_total(self, dialect: str) -> int:
        return sum(n for (d, _, _), n in self.counts.items() if d == dialect)

    def language_total(self, language: str, gender: str | None = None) -> int:
        return sum(
            n
            for (_, l, g), n in self.counts.items()
            if l == language and (gender is None or g == gender)
        )

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def render(self) -> str:
        """Text grid laid out like an utterance-count table."""
        header1 = f"{'Dialect':<8}" + "".join(
            f"{LANGUAGE_NAMES[l]:^16}" for l in LANGUAGES
        ) + f"{'Total':>10}"
        header2 = f"{'':<8}" + "".join(f"{'f':>8}{'m':>8}" for _ in LANGUAGES) + (
            f"{'/dialect':>10}"
        )
        lines = [header1, header2]
        for d in DIALECTS:
            cells = "".join(
                f"{self.counts[(d, l, g)]:>8}" for l in LANGUAGES for g in GENDERS
            )
            lines.append(f"{d:<8}{cells}{self.dialect_total(d):>10}")
        cells = "".join(
            f"{self.language_total(l, g):>8}" for l in LANGUAGES for g in GENDERS
        )
        lines.append(f"{'Total':<8}{cells}{self.total:>10}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "counts": {"/".join(k): v for k, v in self.counts.items()},
            "dialect_totals": {d: self.dialect_total(d) for d in DIALECTS},
            "language_totals": {l: self.language_total(l) for l in LANGUAGES},
            "total": self.total,
        }


def corpus_stats(records: Iterable[UtteranceRecord]) -> CorpusStats:
    stats = CorpusStats()
    for r in records:
        stats.counts[(r.dialect, r.majority_language, r.gender)] += 1
    return stats
