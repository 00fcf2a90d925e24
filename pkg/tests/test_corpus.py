import json

import pytest
from hypothesis import given, settings, strategies as st

from dialectid.corpus import (DIALECTS, GENDERS, LANGUAGES, STYLES, ManifestError,
                              UtteranceRecord, corpus_stats, load_manifest, parse_manifest,
                              serialize_manifest)

from conftest import make_records


def line(**kw):
    base = dict(utt_id="u1", source="a.wav", speaker_id="s1", dialect="WF",
                majority_language="no", gender="f", dataset_name="lia", style="spontaneous",
                duration_s=2.5)
    base.update(kw)
    return json.dumps(base)


def test_empty_manifest():
    assert parse_manifest("") == []
    assert parse_manifest("\n\n") == []


def test_unknown_dialect():
    with pytest.raises(ManifestError, match="unknown dialect"):
        parse_manifest(line(dialect="XX"))


@pytest.mark.parametrize("field,value", [("majority_language", "de"), ("gender", "x"),
                                         ("style", "sung")])
def test_unknown_enum_names_field(field, value):
    with pytest.raises(ManifestError, match=f"unknown {field} '{value}'"):
        parse_manifest(line(**{field: value}))


def test_three_lines_field_by_field():
    text = "\n".join([
        line(utt_id="a", speaker_id="p", dialect="WF", majority_language="no", gender="f"),
        line(utt_id="b", speaker_id="q", dialect="EF", majority_language="fi", gender="m",
             style="read", duration_s=0),
        line(utt_id="c", source="c.fmx", speaker_id="r", dialect="TS", majority_language="sv",
             gender="m", dataset_name="giellagas", duration_s=7),
    ])
    a, b, c = parse_manifest(text)
    assert (a.utt_id, a.speaker_id, a.dialect, a.majority_language, a.gender) == \
        ("a", "p", "WF", "no", "f")
    assert (b.utt_id, b.dialect, b.majority_language, b.style, b.duration_s) == \
        ("b", "EF", "fi", "read", 0.0)
    assert (c.utt_id, c.source, c.dialect, c.dataset_name, c.duration_s) == \
        ("c", "c.fmx", "TS", "giellagas", 7.0)
    assert a.is_audio and not a.is_feature and c.is_feature


def test_malformed_line_reports_line_number():
    text = line(utt_id="a") + "\n{not json\n"
    with pytest.raises(ManifestError, match="line 2"):
        parse_manifest(text)


def test_duplicate_id_named():
    with pytest.raises(ManifestError, match="duplicate utt_id 'u1'"):
        parse_manifest(line() + "\n" + line())


def test_missing_field_and_negative_duration():
    obj = json.loads(line())
    del obj["gender"]
    with pytest.raises(ManifestError, match="missing field"):
        parse_manifest(json.dumps(obj))
    with pytest.raises(ManifestError, match="duration_s"):
        parse_manifest(line(duration_s=-1))


def test_load_manifest_resolves_relative_sources(tmp_path):
    (tmp_path / "m.jsonl").write_text(line(source="wav/a.wav") + "\n")
    (rec,) = load_manifest(tmp_path / "m.jsonl")
    assert rec.source == str(tmp_path.resolve() / "wav" / "a.wav")


def test_stats_empty():
    s = corpus_stats([])
    assert s.total == 0 and all(v == 0 for v in s.counts.values())
    assert len(s.counts) == 4 * 3 * 2


def test_stats_hand_tally():
    spec = [("WF", "no", "f"), ("WF", "no", "f"), ("WF", "fi", "m"), ("EF", "fi", "f"),
            ("EF", "fi", "f"), ("EF", "no", "m"), ("SS", "no", "m"), ("SS", "no", "m"),
            ("SS", "fi", "f"), ("TS", "sv", "f"), ("TS", "sv", "m"), ("TS", "no", "m")]
    recs = [UtteranceRecord(f"u{i}", "x.wav", "s", d, l, g, "d", "read", 1.0)
            for i, (d, l, g) in enumerate(spec)]
    s = corpus_stats(recs)
    assert s.counts[("WF", "no", "f")] == 2
    assert s.counts[("EF", "fi", "f")] == 2
    assert s.counts[("SS", "no", "m")] == 2
    assert s.counts[("TS", "sv", "m")] == 1
    assert s.counts[("TS", "fi", "m")] == 0
    assert [s.dialect_total(d) for d in DIALECTS] == [3, 3, 3, 3]
    assert s.language_total("no") == 6 and s.language_total("fi") == 4
    assert s.language_total("sv") == 2
    assert s.total == 12
    rendered = s.render().splitlines()
    assert rendered[-1].split()[-1] == "12"


records_strategy = st.lists(
    st.builds(
        UtteranceRecord,
        utt_id=st.text(min_size=1, max_size=8),
        source=st.text(max_size=10),
        speaker_id=st.text(max_size=5),
        dialect=st.sampled_from(DIALECTS),
        majority_language=st.sampled_from(LANGUAGES),
        gender=st.sampled_from(GENDERS),
        dataset_name=st.text(max_size=5),
        style=st.sampled_from(STYLES),
        duration_s=st.floats(min_value=0, max_value=1e4, allow_nan=False),
    ),
    max_size=20,
    unique_by=lambda r: r.utt_id,
)


@settings(max_examples=100)
@given(records_strategy)
def test_round_trip_and_total(records):
    assert parse_manifest(serialize_manifest(records)) == records
    assert corpus_stats(records).total == len(records)


def test_row_sums_equal_dialect_totals():
    s = corpus_stats(make_records())
    for d in DIALECTS:
        assert s.dialect_total(d) == sum(s.counts[(d, l, g)] for l in LANGUAGES for g in GENDERS)
