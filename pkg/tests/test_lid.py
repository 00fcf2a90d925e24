import math

import numpy as np
import pytest

from dialectid.corpus import LANGUAGES, UtteranceRecord
from dialectid.lid import (LidError, LidPosterior, merged_finnic_rates, nbest_rates,
                           parse_lid_file, serialize_lid)

LANG_POOL = ("fi", "no", "sv", "et", "da", "en")


def fixture(seed=0, n=20):
    r = np.random.default_rng(seed)
    dialect = {"fi": "EF", "no": "WF", "sv": "TS"}
    recs, posts = [], []
    for i in range(n):
        maj = LANGUAGES[i % 3]
        recs.append(UtteranceRecord(f"u{i}", f"u{i}.wav", f"s{i}", dialect[maj], maj, "f",
                                    "unit", "read", 1.0))
        scores = r.dirichlet(np.ones(len(LANG_POOL)))
        posts.append(LidPosterior(f"u{i}", tuple(sorted(zip(LANG_POOL, scores.tolist()),
                                                        key=lambda p: -p[1]))))
    return recs, posts


def oracle(recs, posts, n, merge):
    out = {}
    by = {p.utt_id: [l for l, _ in p.ranking] for p in posts}
    for g in LANGUAGES:
        members = [r for r in recs if r.majority_language == g]
        for l in LANGUAGES:
            hits = 0
            for r in members:
                prefix = by[r.utt_id][:n]
                if any(merge.get(x, x) == l for x in prefix):
                    hits += 1
            out[(g, l, n)] = 100.0 * hits / len(members) if members else math.nan
    return out


@pytest.mark.parametrize("merge", [{}, {"et": "fi"}])
def test_all_cells_match_oracle(merge):
    recs, posts = fixture()
    table = nbest_rates(posts, recs, (1, 2, 5), merge=merge)
    for n in (1, 2, 5):
        expected = oracle(recs, posts, n, merge)
        for k, v in expected.items():
            assert table.rates[k] == pytest.approx(v)
    assert len(table.rates) == 27


def test_monotone_in_n_and_merge():
    for seed in range(10):
        recs, posts = fixture(seed)
        plain = nbest_rates(posts, recs, (1, 2, 5))
        merged = merged_finnic_rates(posts, recs)
        for g in LANGUAGES:
            for l in LANGUAGES:
                assert plain.rates[(g, l, 1)] <= plain.rates[(g, l, 2)] <= plain.rates[(g, l, 5)]
                for n in (1, 2, 5):
                    assert merged.rates[(g, l, n)] >= plain.rates[(g, l, n)]
                    if l != "fi":
                        assert merged.rates[(g, l, n)] == plain.rates[(g, l, n)]


def test_estonian_top1_strictly_raises_finnish():
    rec = [UtteranceRecord("a", "a.wav", "s", "EF", "fi", "m", "unit", "read", 1.0)]
    post = [LidPosterior("a", (("et", 0.6), ("sv", 0.3), ("fi", 0.1)))]
    plain = nbest_rates(post, rec, (1,))
    merged = merged_finnic_rates(post, rec, (1,))
    assert plain.rates[("fi", "fi", 1)] == 0.0 and merged.rates[("fi", "fi", 1)] == 100.0
    # fi and et both in the top 3: counted once
    assert merged_finnic_rates(post, rec, (3,)).rates[("fi", "fi", 3)] == 100.0


def test_empty_group_is_nan_and_dash():
    rec = [UtteranceRecord("a", "a.wav", "s", "EF", "fi", "m", "unit", "read", 1.0)]
    post = [LidPosterior("a", (("fi", 1.0),))]
    t = nbest_rates(post, rec, (1, 2))
    assert math.isnan(t.rates[("no", "no", 1)]) and set(t.undefined_groups) == {"no", "sv"}
    assert t.rates[("fi", "fi", 2)] == 100.0  # short rankings use what exists
    assert " -" in t.render()
    assert len(t.render().splitlines()) == 5


def test_render_one_decimal():
    recs, posts = fixture()
    text = nbest_rates(posts, recs).render()
    assert "1-best" in text and "Finnish" in text
    assert all("." in c for c in text.splitlines()[2].split()[1:])


def test_parse_and_errors():
    recs, posts = fixture()
    assert parse_lid_file(serialize_lid(posts)) == posts
    unsorted = '{"utt_id": "x", "ranking": [["sv", 0.1], ["fi", 0.9]]}\n'
    assert parse_lid_file(unsorted)[0].top(1) == ("fi",)
    for bad in ('{"utt_id": "x", "ranking": []}',
                '{"utt_id": "x", "ranking": [["fi", 0.5], ["fi", 0.5]]}',
                '{"utt_id": "x"}', 'not json',
                '{"utt_id": "x", "ranking": [["fi", 1]]}\n{"utt_id": "x", "ranking": [["fi", 1]]}'):
        with pytest.raises(LidError):
            parse_lid_file(bad)
    with pytest.raises(LidError, match="missing"):
        nbest_rates(posts[1:], recs)
    with pytest.raises(LidError, match="unknown"):
        nbest_rates(posts, recs[1:])
    with pytest.raises(LidError):
        nbest_rates(posts, recs, ())
