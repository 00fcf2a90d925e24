"""Extraction and experiment orchestration behind the command-line interface."""
from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .audio import read_wav
from .classifier import ModelConfig, predict_proba, save_checkpoint, train
from .config import ExperimentConfig
from .corpus import DIALECTS, UtteranceRecord, load_manifest
from .dsp import DEFAULT_CONFIG, log_mel_fb, mfcc39
from .evaluation import EvalReport, average_reports, evaluate
from .fmx import FeatureKind, FeatureMatrix, read_fmx, write_fmx
from .pooling import pool, speaker_zscore
from .prosody import prosodic_lld
from .splits import make_split

log = logging.getLogger(__name__)

WORKERS_ENV = "DIALECTID_WORKERS"
INDEX_NAME = "index.jsonl"
EXTRACTOR_VERSION = "1"


class PipelineError(RuntimeError):
    """A failure tagged with the pipeline stage (and seed, when per-seed)."""

    def __init__(self, stage: str, message: str, seed: int | None = None,
                 utt_id: str | None = None, missing: list | None = None):
        super().__init__(message)
        self.stage, self.seed, self.utt_id, self.missing = stage, seed, utt_id, missing

    def to_dict(self) -> dict:
        d = {"error": str(self), "stage": self.stage}
        if self.seed is not None:
            d["seed"] = self.seed
        if self.utt_id is not None:
            d["utt_id"] = self.utt_id
        if self.missing:
            d["missing"] = self.missing
        return d


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def extract_matrix(record: UtteranceRecord, kind) -> FeatureMatrix:
    kind = FeatureKind(kind)
    if kind is FeatureKind.EMBEDDING:
        if not record.is_feature:
            raise PipelineError("extract", f"{record.utt_id}: EMBEDDING needs a .fmx feature "
                                f"source, got {record.source!r}", utt_id=record.utt_id)
        return read_fmx(record.source, FeatureKind.EMBEDDING)
    if not record.is_audio:
        raise PipelineError("extract", f"{record.utt_id}: {kind.value} needs a .wav audio "
                            f"source, got {record.source!r}", utt_id=record.utt_id)
    signal = read_wav(record.source)
    if kind is FeatureKind.FB40:
        return log_mel_fb(signal)
    if kind is FeatureKind.MFCC39:
        return mfcc39(signal)
    if kind is FeatureKind.PROSODY:
        return prosodic_lld(signal)
    raise PipelineError("extract", f"feature kind {kind.value} cannot be extracted")


def _content_hash(record: UtteranceRecord, kind: FeatureKind) -> str:
    h = hashlib.sha256()
    h.update(f"{EXTRACTOR_VERSION}|{kind.value}|{DEFAULT_CONFIG}|".encode())
    with open(record.source, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _extract_one(args):
    record, kind, out_path = args
    try:
        matrix = extract_matrix(record, kind)
    except PipelineError:
        raise
    except (OSError, ValueError) as exc:
        raise PipelineError("extract", f"{record.utt_id}: {exc}", utt_id=record.utt_id) from None
    write_fmx(matrix, out_path)
    return matrix.values.shape


def read_index(out_dir) -> dict[str, dict]:
    path = Path(out_dir) / INDEX_NAME
    if not path.exists():
        return {}
    entries = [json.loads(line) for line in path.read_text().splitlines() if line.strip()]
    return {e["utt_id"]: e for e in entries}


def cmd_extract(manifest, kind, out_dir, workers: int | None = None) -> dict:
    """Extract one FMX per utterance into ``out_dir`` and maintain ``index.jsonl``.

    Outputs whose recorded content hash matches the current source are skipped.
    """
    kind = FeatureKind(kind)
    records = load_manifest(manifest) if not isinstance(manifest, list) else manifest
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index = read_index(out)
    jobs, entries, skipped = [], {}, 0
    for r in records:
        if kind is not FeatureKind.EMBEDDING and not r.is_audio:
            raise PipelineError("extract", f"{r.utt_id}: {kind.value} needs audio", utt_id=r.utt_id)
        if kind is FeatureKind.EMBEDDING and not r.is_feature:
            raise PipelineError("extract", f"{r.utt_id}: EMBEDDING kind needs a feature-backed "
                                "record (.fmx source)", utt_id=r.utt_id)
        try:
            digest = _content_hash(r, kind)
        except OSError as exc:
            raise PipelineError("extract", f"{r.utt_id}: {exc}", utt_id=r.utt_id) from None
        path = out / f"{r.utt_id}.{kind.value.lower()}.fmx"
        old = index.get(r.utt_id)
        entry = {"utt_id": r.utt_id, "path": path.name, "feature_kind": kind.value,
                 "hash": digest}
        if old and old.get("hash") == digest and old.get("feature_kind") == kind.value \
                and path.exists():
            entries[r.utt_id] = old
            skipped += 1
            continue
        jobs.append((r, kind, str(path)))
        entries[r.utt_id] = entry
    n_workers = workers or worker_count()
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(n_workers) as ex:
            shapes = list(ex.map(_extract_one, jobs, chunksize=8))
    else:
        shapes = [_extract_one(j) for j in jobs]
    for (r, _, _), shape in zip(jobs, shapes):
        entries[r.utt_id]["rows"], entries[r.utt_id]["cols"] = int(shape[0]), int(shape[1])
    merged = {**index, **entries}
    (out / INDEX_NAME).write_text(
        "".join(json.dumps(merged[k], sort_keys=True) + "\n" for k in sorted(merged)))
    log.info("extract %s: %d written, %d skipped", kind.value, len(jobs), skipped)
    return {"written": len(jobs), "skipped": skipped, "index": str(out / INDEX_NAME)}


def load_pooled(records, features_dir, kind, pooling):
    """Pool every record's frame matrix; returns an (n, dims) array."""
    index = read_index(features_dir)
    missing = [r.utt_id for r in records if r.utt_id not in index]
    if missing:
        raise PipelineError("pool", f"{len(missing)} utterance(s) have no extracted features "
                            f"in {features_dir}", missing=missing[:20])
    vecs = []
    for r in records:
        entry = index[r.utt_id]
        if entry["feature_kind"] != FeatureKind(kind).value:
            raise PipelineError("pool", f"{r.utt_id}: indexed as {entry['feature_kind']}, "
                                f"expected {FeatureKind(kind).value}", utt_id=r.utt_id)
        matrix = read_fmx(Path(features_dir) / entry["path"], kind)
        vecs.append(pool(matrix, pooling, r.utt_id))
    return vecs


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def run_seed(config: ExperimentConfig, records, vectors, seed: int, out: Path):
    chash = config.hash()
    try:
        split = make_split(records, seed, config.split_mode)
    except ValueError as exc:
        raise PipelineError("split", str(exc), seed=seed) from None
    split_obj = json.loads(split.to_json())
    split_obj["config_hash"] = chash
    _write(out / f"split_seed{seed}.json", json.dumps(split_obj, sort_keys=True, indent=1) + "\n")

    pos = {r.utt_id: i for i, r in enumerate(records)}
    if config.apply_normalization:
        fit = None
        if config.norm_stats == "train":
            train_side = set(split.train_ids) | set(split.val_ids)
            fit = [r.utt_id in train_side for r in records]
        vectors = speaker_zscore(vectors, [r.speaker_id for r in records], fit)
    X = np.stack([v.values for v in vectors])
    y = np.array([DIALECTS.index(r.dialect) for r in records])

    def take(ids):
        idx = [pos[u] for u in ids]
        return X[idx], y[idx]

    model_cfg = ModelConfig(input_dim=X.shape[1], layer_sizes=config.model.layer_sizes,
                            n_classes=len(DIALECTS), dropout_p=config.model.dropout_p,
                            activation=config.model.activation, seed=seed)
    try:
        params, history = train(model_cfg, config.train, take(split.train_ids),
                                take(split.val_ids))
    except ValueError as exc:
        raise PipelineError("train", str(exc), seed=seed) from None
    save_checkpoint(out / f"model_seed{seed}.fmxc", params, config.train, history,
                    {"config_hash": chash, "seed": seed, "split": split.name})

    x_te, y_te = take(split.test_ids)
    pred = np.argmax(predict_proba(params, x_te), axis=1)
    report = evaluate(
        [(DIALECTS[t], DIALECTS[p]) for t, p in zip(y_te, pred)],
        split_name=split.name, seeds=[seed], feature_kind=config.feature_kind.value,
        pooling=config.pooling.value, mode=config.split_mode, config_hash=chash,
    )
    _write(out / f"report_seed{seed}.json", report.to_json())
    _write(out / f"report_seed{seed}.csv", report.to_csv())
    log.info("seed %d: UA %.1f%% (best epoch %d)", seed, report.unweighted_accuracy,
             history.best_epoch)
    return report, history


def cmd_run(config: ExperimentConfig) -> dict:
    """Split, pool, normalise (per policy), train and evaluate for every seed."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        records = load_manifest(config.manifest)
    except (OSError, ValueError) as exc:
        raise PipelineError("manifest", str(exc)) from None
    vectors = load_pooled(records, config.features_dir, config.feature_kind, config.pooling)
    reports, histories = [], {}
    for seed in config.seeds:
        report, history = run_seed(config, records, vectors, seed, out)
        reports.append(report)
        histories[str(seed)] = asdict(history)
    avg = average_reports(reports)
    _write(out / "report_avg.json", avg.to_json())
    _write(out / "report_avg.csv", avg.to_csv())
    run_log = {"config": config.to_dict(), "config_hash": config.hash(),
               "seeds": list(config.seeds), "histories": histories,
               "unweighted_accuracy": {str(r.seeds[0]): r.unweighted_accuracy for r in reports},
               "average_unweighted_accuracy": avg.unweighted_accuracy}
    _write(out / "run_log.json", json.dumps(run_log, indent=1, sort_keys=True) + "\n")
    return {"reports": reports, "average": avg, "out_dir": str(out)}
