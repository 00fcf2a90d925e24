"""Speaker-dependent (SD) and speaker-independent (SI) split generation.

All shuffles use :class:`~dialectid.rng.Xoshiro256` over utt_ids (or speaker
ids) in sorted order, so splits depend only on the id sets and the seed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import DIALECTS, UtteranceRecord
from .rng import Xoshiro256, derive_seed

DEFAULT_SEEDS = (11, 22, 33)
TEST_FRACTION = 0.2
VAL_FRACTION = 0.1
HOLDOUT_PER_DIALECT = 3
VAL_SALT = 0x76616C  # "val"


class SplitError(ValueError):
    pass


@dataclass
class SplitSpec:
    name: str
    seed: int
    mode: str
    train_ids: list[str]
    val_ids: list[str]
    test_ids: list[str]
    held_out_speakers: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        """Canonical serialisation: sorted id arrays, sorted keys."""
        obj = {
            "name": self.name,
            "seed": self.seed,
            "mode": self.mode,
            "train_ids": sorted(self.train_ids),
            "val_ids": sorted(self.val_ids),
            "test_ids": sorted(self.test_ids),
            "held_out_speakers": sorted(self.held_out_speakers),
        }
        return json.dumps(obj, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SplitSpec":
        return cls(**json.loads(text))


def _count(n: int, fraction: float) -> int:
    return int(n * fraction + 0.5)


def make_val_split(train_pool: Sequence[str], seed: int) -> tuple[list[str], list[str]]:
    """Seeded uniform 90/10 partition of a train pool of utt_ids."""
    ids = sorted(train_pool)
    if len(ids) < 10:
        raise SplitError(f"train pool too small for a validation split: {len(ids)} < 10")
    Xoshiro256(seed).shuffle(ids)
    n_val = _count(len(ids), VAL_FRACTION)
    return ids[: len(ids) - n_val], ids[len(ids) - n_val:]


def _finish(name, seed, mode, pool, test, held, validation) -> SplitSpec:
    if validation:
        train, val = make_val_split(pool, derive_seed(seed, VAL_SALT))
    else:
        train, val = list(pool), []
    return SplitSpec(name, seed, mode, train, val, list(test), list(held))


def make_sd_split(records: Sequence[UtteranceRecord], seed: int,
                  validation: bool = True) -> SplitSpec:
    """Uniform 80/20 utterance split; speakers are shared between sides."""
    if len(records) < 5:
        raise SplitError(f"too few records for an SD split: {len(records)} < 5")
    ids = sorted(r.utt_id for r in records)
    Xoshiro256(seed).shuffle(ids)
    n_test = _count(len(ids), TEST_FRACTION)
    pool, test = ids[: len(ids) - n_test], ids[len(ids) - n_test:]
    return _finish(f"SD-seed{seed}", seed, "SD", pool, test, [], validation)


def make_si_split(records: Sequence[UtteranceRecord], seed: int,
                  holdout_per_dialect: int = HOLDOUT_PER_DIALECT,
                  validation: bool = True) -> SplitSpec:
    """Hold out ``holdout_per_dialect`` whole speakers per dialect as the test set."""
    speakers: dict[str, set[str]] = {}
    for r in records:
        speakers.setdefault(r.dialect, set()).add(r.speaker_id)
    rng = Xoshiro256(seed)
    held: list[str] = []
    for dialect in DIALECTS:
        if dialect not in speakers:
            continue
        spk = sorted(speakers[dialect])
        if len(spk) <= holdout_per_dialect:
            raise SplitError(
                f"dialect {dialect} has {len(spk)} speaker(s); need more than "
                f"{holdout_per_dialect} to hold out {holdout_per_dialect}"
            )
        rng.shuffle(spk)
        held.extend(spk[:holdout_per_dialect])
    held_set = set(held)
    test = sorted(r.utt_id for r in records if r.speaker_id in held_set)
    pool = sorted(r.utt_id for r in records if r.speaker_id not in held_set)
    return _finish(f"SI-seed{seed}", seed, "SI", pool, test, sorted(held), validation)


def make_split(records, seed: int, mode: str, validation: bool = True) -> SplitSpec:
    if mode == "SD":
        return make_sd_split(records, seed, validation)
    if mode == "SI":
        return make_si_split(records, seed, validation=validation)
    raise SplitError(f"unknown split mode {mode!r}")
