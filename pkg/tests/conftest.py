import numpy as np
import pytest

from dialectid.corpus import UtteranceRecord

SR = 16000


def tone(freq, seconds=1.0, amp=0.5, sr=SR):
    t = np.arange(int(seconds * sr)) / sr
    return amp * np.sin(2 * np.pi * freq * t)


def make_records(n_per_speaker=5, speakers_per_dialect=5, dialects=("WF", "EF", "SS", "TS")):
    langs = {"WF": "no", "EF": "fi", "SS": "no", "TS": "sv"}
    out = []
    for d in dialects:
        for s in range(speakers_per_dialect):
            for u in range(n_per_speaker):
                out.append(UtteranceRecord(
                    utt_id=f"{d}-{s}-{u}", source=f"{d}-{s}-{u}.wav", speaker_id=f"{d}-{s}",
                    dialect=d, majority_language=langs[d], gender="fm"[s % 2],
                    dataset_name="unit", style="read", duration_s=1.0))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
