"""n-best language-identification hit rates per majority-language group.

Posteriors come from an external LID system as JSON Lines::

    {"utt_id": "u1", "ranking": [["fi", 0.61], ["et", 0.22], ...]}
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus import LANGUAGE_NAMES, LANGUAGES, UtteranceRecord

DEFAULT_N = (1, 2, 5)
FINNIC_MERGE = {"et": "fi"}


class LidError(ValueError):
    pass


@dataclass(frozen=True)
class LidPosterior:
    utt_id: str
    ranking: tuple[tuple[str, float], ...]

    def top(self, n: int) -> tuple[str, ...]:
        return tuple(lang for lang, _ in self.ranking[:n])


def parse_lid_file(text: str) -> list[LidPosterior]:
    out, seen = [], set()
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            utt, ranking = obj["utt_id"], obj["ranking"]
            pairs = [(str(lang), float(score)) for lang, score in ranking]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise LidError(f"line {lineno}: malformed posterior record ({exc})") from None
        if not pairs:
            raise LidError(f"line {lineno}: empty ranking for {utt!r}")
        langs = [lang for lang, _ in pairs]
        dup = sorted({lang for lang in langs if langs.count(lang) > 1})
        if dup:
            raise LidError(f"line {lineno}: duplicate language(s) {dup} in ranking for {utt!r}")
        if utt in seen:
            raise LidError(f"line {lineno}: duplicate utt_id {utt!r}")
        seen.add(utt)
        pairs.sort(key=lambda p: -p[1])
        out.append(LidPosterior(utt, tuple(pairs)))
    return out


def serialize_lid(posteriors: Sequence[LidPosterior]) -> str:
    return "".join(
        json.dumps({"utt_id": p.utt_id, "ranking": [list(x) for x in p.ranking]}) + "\n"
        for p in posteriors
    )


@dataclass
class NBestTable:
    """Rates in percent keyed by (group, probe language, n); NaN for empty groups."""

    rates: dict[tuple[str, str, int], float]
    group_sizes: dict[str, int]
    n_values: tuple[int, ...]
    probes: tuple[str, ...] = LANGUAGES
    groups: tuple[str, ...] = LANGUAGES
    merge: dict[str, str] = field(default_factory=dict)

    @property
    def undefined_groups(self) -> list[str]:
        return [g for g in self.groups if self.group_sizes.get(g, 0) == 0]

    def _columns(self):
        return [(n, l) for n in self.n_values for l in self.probes]

    def render(self) -> str:
        cols = self._columns()
        head1 = f"{'Majority language':<18}" + "".join(
            f"{f'{n}-best':^{7 * len(self.probes)}}" for n in self.n_values)
        head2 = f"{'':<18}" + "".join(f"{l:>7}" for _, l in cols)
        lines = [head1, head2]
        for g in self.groups:
            cells = "".join(f"{_cell(self.rates[(g, l, n)]):>7}" for n, l in cols)
            lines.append(f"{LANGUAGE_NAMES.get(g, g):<18}{cells}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["group", "n_utterances", *[f"{n}best_{l}" for n, l in self._columns()]])
        for g in self.groups:
            w.writerow([g, self.group_sizes.get(g, 0),
                        *[_cell(self.rates[(g, l, n)]) for n, l in self._columns()]])
        return buf.getvalue()


def _cell(v: float) -> str:
    return "-" if math.isnan(v) else f"{v:.1f}"


def nbest_rates(posteriors: Sequence[LidPosterior], records: Sequence[UtteranceRecord],
                n_values: Sequence[int] = DEFAULT_N, merge: Mapping[str, str] | None = None,
                probes: Sequence[str] = LANGUAGES) -> NBestTable:
    """Percentage of each group's utterances whose top-n contains each probe.

    With ``merge`` (source -> target), languages in the top-n prefix are mapped
    through it before the membership test, so a merged source counts as a hit
    on its target and an utterance is counted at most once per cell.
    Rankings shorter than n use the whole available ranking.
    """
    n_values = tuple(int(n) for n in n_values)
    if not n_values or min(n_values) < 1:
        raise LidError("n_values must be a nonempty list of positive integers")
    merge = dict(merge or {})
    by_id = {p.utt_id: p for p in posteriors}
    known = {r.utt_id for r in records}
    unknown = sorted(set(by_id) - known)
    if unknown:
        raise LidError(f"posteriors for unknown utt_id(s): {unknown}")
    missing = sorted(known - set(by_id))
    if missing:
        raise LidError(f"missing posterior(s) for utt_id(s): {missing}")

    hits = {(g, l, n): 0 for g in LANGUAGES for l in probes for n in n_values}
    sizes = {g: 0 for g in LANGUAGES}
    for r in records:
        g = r.majority_language
        sizes[g] += 1
        post = by_id[r.utt_id]
        for n in n_values:
            top = {merge.get(lang, lang) for lang in post.top(n)}
            for l in probes:
                if l in top:
                    hits[(g, l, n)] += 1
    rates = {
        k: (100.0 * v / sizes[k[0]] if sizes[k[0]] else math.nan) for k, v in hits.items()
    }
    return NBestTable(rates, sizes, n_values, tuple(probes), LANGUAGES, merge)


def merged_finnic_rates(posteriors, records, n_values: Sequence[int] = DEFAULT_N) -> NBestTable:
    """n-best rates with Estonian hypotheses counted as Finnish."""
    return nbest_rates(posteriors, records, n_values, merge=FINNIC_MERGE)
