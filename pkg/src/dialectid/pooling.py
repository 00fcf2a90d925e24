"""Utterance pooling (mean / std / meanstd) and per-speaker z-scoring."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .fmx import FeatureKind, FeatureMatrix

ZSCORE_EPS = 1e-8


class Pooling(str, Enum):
    MEAN = "MEAN"
    STD = "STD"
    MEANSTD = "MEANSTD"


@dataclass(frozen=True)
class UtteranceVector:
    values: np.ndarray
    pooling: Pooling
    feature_kind: FeatureKind
    utt_id: str = ""

    @property
    def dims(self) -> int:
        return int(self.values.shape[0])


def pool(matrix, mode, utt_id: str = "") -> UtteranceVector:
    """Collapse a frames x dims matrix into one vector.

    The standard deviation is the population one (divide by the frame count).
    MEANSTD concatenates the mean vector followed by the std vector.
    """
    mode = Pooling(mode)
    if isinstance(matrix, FeatureMatrix):
        x, kind = matrix.values, matrix.feature_kind
    else:
        x, kind = np.asarray(matrix), FeatureKind.EMBEDDING
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("cannot pool an empty matrix")
    mean = x.mean(axis=0)
    if mode is Pooling.MEAN:
        v = mean
    else:
        std = np.sqrt(np.mean((x - mean) ** 2, axis=0))
        v = std if mode is Pooling.STD else np.concatenate([mean, std])
    return UtteranceVector(v, mode, kind, utt_id)


def speaker_zscore(vectors: Sequence[UtteranceVector], speaker_ids: Sequence[str],
                   fit_mask: Sequence[bool] | None = None) -> list[UtteranceVector]:
    """Per-speaker, per-dimension ``(x - mu) / (sigma + 1e-8)``.

    Statistics use population std over each speaker's utterances. With
    ``fit_mask`` the statistics come only from the masked utterances (e.g. the
    training portion); a speaker with no fitted utterance falls back to all of
    their own utterances, since an unseen speaker has no other statistics.
    """
    if len(vectors) != len(speaker_ids):
        raise ValueError("vectors and speaker_ids differ in length")
    if fit_mask is None:
        fit_mask = [True] * len(vectors)
    groups: dict[str, list[int]] = defaultdict(list)
    fitted: dict[str, list[int]] = defaultdict(list)
    for i, spk in enumerate(speaker_ids):
        groups[spk].append(i)
        if fit_mask[i]:
            fitted[spk].append(i)
    out: list[UtteranceVector | None] = [None] * len(vectors)
    for spk, idx in groups.items():
        ref = fitted.get(spk) or idx
        stack = np.stack([vectors[i].values for i in ref])
        mu = stack.mean(axis=0)
        sigma = np.sqrt(np.mean((stack - mu) ** 2, axis=0))
        for i in idx:
            out[i] = replace(vectors[i], values=(vectors[i].values - mu) / (sigma + ZSCORE_EPS))
    return out


def default_normalization(kind) -> bool:
    """Speaker normalisation policy: on for filter banks and prosody, off otherwise."""
    return FeatureKind(kind) in (FeatureKind.FB40, FeatureKind.PROSODY)
